use std::path::Path;
use std::process::{Command, Output};

struct Csv {
    header: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    text: String,
}

impl Csv {
    fn read(path: &Path) -> Csv {
        let text = std::fs::read_to_string(path).unwrap();
        let mut header = Vec::new();
        let mut body = Vec::new();
        for line in text.lines() {
            match line.strip_prefix("# ") {
                Some(h) => header.push(h.to_string()),
                None => body.push(line),
            }
        }
        let columns = body[0].split(',').map(String::from).collect();
        let rows = body[1..]
            .iter()
            .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
            .collect();
        Csv { header, columns, rows, text }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetnet-dc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn negative_density_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["probabilities", "--set", "lambda_s=-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda_s"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_and_small_sample_count_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 3\nwavelength = 2\n").unwrap();
    let o = run(&["probabilities", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wavelength"));

    let o = run(&["probabilities", "--samples", "100"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tight_simplex_tolerance_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["probabilities", "--no-monte-carlo", "--sweep", "lambda_s_ratio=1:10:91", "--set", "simplex_tolerance=1e-15"],
        dir.path(),
    );
    match o.status.code() {
        Some(0) => assert!(dir.path().join("fig2.csv").exists()),
        Some(1) => assert!(stderr(&o).contains("simplex"), "{}", stderr(&o)),
        other => panic!("unexpected exit {other:?}: {}", stderr(&o)),
    }
}

#[test]
fn probability_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["probabilities", "--samples", "10000", "--seed", "9"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = Csv::read(&dir.path().join("fig2.csv"));
    assert!(csv.header.iter().any(|h| h == "seed = 9"));
    assert!(csv.header.iter().any(|h| h == "figure = fig2"));
    assert_eq!(csv.rows.len(), 10);
    for row in &csv.rows {
        assert!(row.iter().all(|v| v.is_finite()));
        let s: f64 = row[1..7].iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    // Every cell prints back to the same text.
    for (line, row) in csv.text.lines().filter(|l| !l.starts_with('#')).skip(1).zip(&csv.rows) {
        let again: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        assert_eq!(line, again.join(","));
    }
    let hw = csv.column("hw99_dude");
    let (mc, closed) = (csv.column("mc_dude"), csv.column("dude"));
    for i in 0..csv.rows.len() {
        assert!((mc[i] - closed[i]).abs() < 2.0 * hw[i]);
    }
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run(&["probabilities", "--figure", "fig3", "--samples", "20000"], d.path()).status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fig3.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn near_equal_powers_remove_decoupling() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["probabilities", "--no-monte-carlo", "--set", "p_s_dbm=42.99999999"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = Csv::read(&dir.path().join("fig2.csv"));
    for c in ["p3", "p4", "p5", "dude"] {
        assert!(csv.column(c).iter().all(|&v| (0.0..1e-8).contains(&v)), "{c}");
    }
    let o = run(&["probabilities", "--set", "p_s_dbm=43"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p_s_dbm"));
}

#[test]
fn distance_densities_integrate_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["distances", "--samples", "20000"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = Csv::read(&dir.path().join("fig4.csv"));
    let x = csv.column("distance_m");
    let h = x[1] - x[0];
    let pdf_cols: Vec<&String> = csv.columns.iter().filter(|c| c.ends_with("_pdf")).collect();
    assert_eq!(pdf_cols.len(), 8);
    for name in pdf_cols {
        let y = csv.column(name);
        let trapezoid: f64 = y.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum::<f64>() + 0.5 * h * (y[0] + y[y.len() - 1]);
        assert!((trapezoid - 1.0).abs() < 1e-3, "{name}: {trapezoid}");
        let mc: f64 = csv.column(&name.replace("_pdf", "_mc_density")).iter().sum::<f64>() * h;
        assert!((mc - 1.0).abs() < 1e-3, "{name}: {mc}");
    }
}

#[test]
fn capacity_comparisons() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["capacity", "--figure", "fig5b", "--set", "p_s_dbm=30", "--sweep", "p_s_dbm=28:32:3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = Csv::read(&dir.path().join("fig5b.csv"));
    let (d, r, ratio, diff) = (csv.column("c3_dude_bps"), csv.column("c3_drp_bps"), csv.column("c3_ratio"), csv.column("c3_diff_bps"));
    for i in 0..3 {
        assert!(d[i] > r[i]);
        assert!((ratio[i] - d[i] / r[i]).abs() < 1e-12);
        assert!((diff[i] - (d[i] - r[i])).abs() <= 1e-6 * d[i]);
    }
    let o = run(&["capacity", "--figure", "fig7", "--no-monte-carlo", "--sweep", "lambda_s_ratio=5:5:1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = Csv::read(&dir.path().join("fig7.csv"));
    for c in [3, 4, 5] {
        assert!(csv.column(&format!("c{c}_dude_bps"))[0] > csv.column(&format!("c{c}_bl2_bps"))[0]);
    }
}

#[test]
fn validate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--samples", "20000"], dir.path());
    assert!(o.status.success(), "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let csv = Csv::read(&dir.path().join("validate.csv"));
    assert!(csv.rows.len() > 20);
    assert!(csv.column("pass").iter().all(|&p| p == 1.0));
}
