//! Figure datasets. Every function returns a [`Table`] ready to write.

use std::collections::HashMap;

use rayon::prelude::*;

use hetnet_dc::association::{single_connectivity_probabilities, SingleAssociation};
use hetnet_dc::capacity::{
    decoupled_link, drp_roles, dude_roles, role_efficiency, sir_gain, Baseline,
};
use hetnet_dc::distance::{ConditionalDistance, DistanceLaw};
use hetnet_dc::montecarlo::{
    empirical_case_links, estimate_single_link_frequencies, estimate_subcase_frequencies, sample_case_triples,
    InterfererField, InterfererRegion, Origin,
};
use hetnet_dc::stats::{ks_coefficient, ks_statistic, Z_99};
use hetnet_dc::{all_case_probabilities, CaseProbabilities, Cell, Scenario, ValidParams};

use crate::config::{ExperimentConfig, Sweep, SweepParam};
use crate::dataset::Table;
use crate::CliError;

pub const DECOUPLED_CASES: [u8; 3] = [3, 4, 5];

/// Histogram bin width for distance densities, in metres.
pub const BIN_WIDTH: f64 = 2.0;

/// Nominal extent of the distance grid; widened until every law has
/// less than `GRID_TAIL` mass beyond it.
pub const GRID_EXTENT: f64 = 500.0;
const GRID_TAIL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Fig6,
    Fig7,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5a => "fig5a",
            Figure::Fig5b => "fig5b",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }

    fn default_sweep(self) -> Option<Sweep> {
        match self {
            Figure::Fig2 | Figure::Fig3 => Some(Sweep::new(SweepParam::LambdaSRatio, 1.0, 10.0, 10)),
            Figure::Fig4 => None,
            Figure::Fig5a | Figure::Fig6 | Figure::Fig7 => Some(Sweep::new(SweepParam::LambdaSRatio, 2.0, 10.0, 9)),
            Figure::Fig5b => Some(Sweep::new(SweepParam::PsDbm, 26.0, 40.0, 8)),
        }
    }

    pub fn build(self, cfg: &ExperimentConfig) -> Result<Table, CliError> {
        match self {
            Figure::Fig2 => probabilities(cfg),
            Figure::Fig3 => single_vs_dual(cfg),
            Figure::Fig4 => distances(cfg),
            Figure::Fig5a => sir_gains(cfg),
            Figure::Fig5b => dude_vs_drp(cfg),
            Figure::Fig6 => dude_vs_bl1(cfg),
            Figure::Fig7 => dude_vs_bl23(cfg),
        }
    }
}

fn table(cfg: &ExperimentConfig, fig: Figure, columns: Vec<String>) -> Table {
    let mut t = Table::new(columns);
    t.meta("generator", concat!("hetnet-dc ", env!("CARGO_PKG_VERSION")));
    t.meta("figure", fig.name());
    for (k, v) in cfg.provenance() {
        t.meta(k, v);
    }
    t
}

struct Points {
    name: &'static str,
    values: Vec<(f64, ValidParams)>,
}

fn points(cfg: &ExperimentConfig, fig: Figure) -> Result<Points, CliError> {
    let (param, values) = cfg.sweep_points(fig.default_sweep())?;
    let values = match param {
        Some(_) => values,
        None => values.into_iter().map(|(_, p)| (p.raw().lambda_s_ratio(), p)).collect(),
    };
    Ok(Points { name: param.unwrap_or(SweepParam::LambdaSRatio).name(), values })
}

/// Evaluates `f` at each sweep point in parallel; rows keep sweep order.
fn rows<F>(pts: &Points, f: F) -> Result<Vec<Vec<f64>>, CliError>
where
    F: Fn(&ValidParams) -> Result<Vec<f64>, CliError> + Sync,
{
    pts.values
        .par_iter()
        .map(|(x, p)| {
            let mut row = vec![*x];
            row.extend(f(p)?);
            Ok(row)
        })
        .collect()
}

pub fn check_simplex(p: &CaseProbabilities, tol: f64) -> Result<(), CliError> {
    let dev = (p.sum() - 1.0).abs();
    if dev > tol || p.as_array().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(CliError::Check(format!(
            "case probabilities {:?} deviate from the simplex by {dev:.3e} (tolerance {tol:.1e})",
            p.as_array()
        )));
    }
    Ok(())
}

fn names(prefixes: &[&str], stems: &[String]) -> Vec<String> {
    stems.iter().flat_map(|s| prefixes.iter().map(move |p| format!("{p}{s}"))).collect()
}

fn probabilities(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg, Figure::Fig2)?;
    let mut stems: Vec<String> = (1..=6).map(|c| format!("p{c}")).collect();
    stems.extend(["dude", "dual_conn", "scell"].map(String::from));
    let mut cols = vec![pts.name.to_string()];
    cols.extend(stems.iter().cloned());
    if cfg.monte_carlo {
        cols.extend(names(&["mc_", "hw99_"], &stems));
    }
    let mut t = table(cfg, Figure::Fig2, cols);
    t.note("p1..p6: closed-form case probabilities; dude = p3+p4+p5, dual_conn = p1+p2, scell = p6");
    if cfg.monte_carlo {
        t.note("mc_*: independent-Rayleigh Monte Carlo frequencies, hw99_*: 99% normal half-widths");
        t.note("every sweep point reuses the same seed (common random numbers)");
    }
    for r in rows(&pts, |p| {
        let closed = all_case_probabilities(&p.scenario());
        check_simplex(&closed, cfg.simplex_tolerance)?;
        let mut row = closed.as_array().to_vec();
        row.extend([closed.dude(), closed.dual_conn(), closed.scell()]);
        if cfg.monte_carlo {
            let f = estimate_subcase_frequencies(p, cfg.samples, Origin::Model, cfg.seed)?;
            let mut mc = f.case_frequencies().to_vec();
            mc.extend([f.dude(), f.dual_conn(), f.case_frequency(6)]);
            for v in mc {
                row.extend([v, Z_99 * f.sigma(v)]);
            }
        }
        Ok(row)
    })? {
        t.push(r);
    }
    Ok(t)
}

fn single_vs_dual(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg, Figure::Fig3)?;
    let stems: Vec<String> = ["dc_dude", "dc_dual_conn", "sc_macro", "sc_decoupled", "sc_small"].map(String::from).to_vec();
    let mut cols = vec![pts.name.to_string()];
    cols.extend(stems.iter().cloned());
    if cfg.monte_carlo {
        cols.extend(names(&["mc_", "hw99_"], &stems));
    }
    let mut t = table(cfg, Figure::Fig3, cols);
    t.note("dc_*: dual connectivity with one MCell and two SCells");
    t.note("sc_*: single connectivity computed with one MCell and only the nearest SCell");
    t.note("sc_decoupled: UL to the SCell while DL stays on the MCell");
    for r in rows(&pts, |p| {
        let s = p.scenario();
        let closed = all_case_probabilities(&s);
        check_simplex(&closed, cfg.simplex_tolerance)?;
        let sc = single_connectivity_probabilities(s.lambda_m, s.lambda_s, s.eta)?;
        let mut row = vec![closed.dude(), closed.dual_conn(), sc.macro_coupled, sc.decoupled, sc.small_coupled];
        if cfg.monte_carlo {
            let f = estimate_subcase_frequencies(p, cfg.samples, Origin::Model, cfg.seed)?;
            let g = estimate_single_link_frequencies(&s, cfg.samples, cfg.seed)?;
            row.extend([f.dude(), Z_99 * f.sigma(f.dude()), f.dual_conn(), Z_99 * f.sigma(f.dual_conn())]);
            for which in [SingleAssociation::Macro, SingleAssociation::Decoupled, SingleAssociation::Small] {
                row.extend([g.fraction(which), g.half_width_99(which)]);
            }
        }
        Ok(row)
    })? {
        t.push(r);
    }
    Ok(t)
}

pub fn pair_name(case: u8, role: Cell) -> String {
    let r = match role {
        Cell::MCell => "m",
        Cell::SCell1 => "s1",
        Cell::SCell2 => "s2",
    };
    format!("c{case}_{r}")
}

/// Bin centres `1, 3, 5, ...` up to at least [`GRID_EXTENT`].
fn grid(laws: &[ConditionalDistance]) -> Result<Vec<f64>, CliError> {
    let mut end = GRID_EXTENT;
    for law in laws {
        while 1.0 - law.cdf(end)? > GRID_TAIL {
            end += 50.0 * BIN_WIDTH;
        }
    }
    let n = (end / BIN_WIDTH).round() as usize;
    Ok((0..n).map(|i| (i as f64 + 0.5) * BIN_WIDTH).collect())
}

/// Cdf tabulated by the trapezoid rule on a fine grid, then linearly
/// interpolated. Exact quadrature per sample would dominate the KS run.
struct TabulatedCdf {
    step: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    fn new(law: &ConditionalDistance, end: f64) -> Self {
        let step = 0.05;
        let n = (end / step).ceil() as usize;
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = law.pdf(0.0);
        values.push(0.0);
        for i in 1..=n {
            let cur = law.pdf(i as f64 * step);
            acc += 0.5 * step * (prev + cur);
            values.push(acc);
            prev = cur;
        }
        TabulatedCdf { step, values }
    }

    fn eval(&self, x: f64) -> f64 {
        let u = x / self.step;
        let i = u.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap_or(&1.0);
        }
        let w = u - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

fn distances(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    if cfg.sweep.is_some() {
        return Err(CliError::Config("the distance densities are computed at a single point; drop the sweep".into()));
    }
    let p = cfg.validate()?;
    let s = p.scenario();
    let probs = all_case_probabilities(&s);
    check_simplex(&probs, cfg.simplex_tolerance)?;

    let mut laws = Vec::new();
    let mut empty = Vec::new();
    for (case, role) in ConditionalDistance::pairs() {
        match ConditionalDistance::new(case, role, &s) {
            Ok(l) => laws.push(l),
            Err(hetnet_dc::Error::EmptyRegion { .. }) => empty.push(pair_name(case, role)),
            Err(e) => return Err(e.into()),
        }
    }
    let centres = grid(&laws)?;
    let end = centres.last().copied().unwrap_or(0.0) + 0.5 * BIN_WIDTH;

    let mut cols = vec!["distance_m".to_string()];
    for l in &laws {
        cols.push(format!("{}_pdf", pair_name(l.case(), l.role())));
    }
    if cfg.monte_carlo {
        for l in &laws {
            cols.push(format!("{}_mc_density", pair_name(l.case(), l.role())));
        }
    }
    let mut t = table(cfg, Figure::Fig4, cols);
    t.meta("bin_width_m", BIN_WIDTH);
    t.note("c<case>_<role>: distance to the MCell (m), the nearer SCell (s1) or the farther SCell (s2) given the case");
    for name in &empty {
        t.note(format!("{name}: case has zero probability at these parameters, column omitted"));
    }

    let mut columns: Vec<Vec<f64>> = laws
        .iter()
        .map(|l| centres.iter().map(|&x| l.pdf(x)).collect())
        .collect();

    let mut summary: Vec<String> = Vec::new();
    let means: Vec<f64> = laws.iter().map(|l| l.mean()).collect::<Result<_, _>>()?;
    if cfg.monte_carlo {
        let cases: Vec<u8> = DECOUPLED_CASES.iter().copied().filter(|c| laws.iter().any(|l| l.case() == *c)).collect();
        let accepted = cases
            .par_iter()
            .map(|&c| sample_case_triples(&s, c, cfg.samples, cfg.seed).map(|a| (c, a)))
            .collect::<Result<HashMap<_, _>, _>>()?;
        let critical = ks_coefficient(0.01) / (cfg.samples as f64).sqrt();
        let mut hist_cols = Vec::new();
        for (l, mean) in laws.iter().zip(&means) {
            let mut xs = accepted[&l.case()].role_distances(l.role());
            let mut hist = vec![0.0; centres.len()];
            for &x in &xs {
                let b = (x / BIN_WIDTH) as usize;
                if b < hist.len() {
                    hist[b] += 1.0;
                }
            }
            let norm = xs.len() as f64 * BIN_WIDTH;
            hist.iter_mut().for_each(|h| *h /= norm);
            let mc_mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let cdf = TabulatedCdf::new(l, end.max(xs.iter().cloned().fold(0.0, f64::max)));
            let d = ks_statistic(&mut xs, |x| cdf.eval(x));
            summary.push(format!(
                "{}: mean {mean:.3} m (mc {mc_mean:.3} m), ks {d:.5} (1% critical {critical:.5})",
                pair_name(l.case(), l.role())
            ));
            hist_cols.push(hist);
        }
        columns.extend(hist_cols);
    } else {
        for (l, mean) in laws.iter().zip(&means) {
            summary.push(format!("{}: mean {mean:.3} m", pair_name(l.case(), l.role())));
        }
    }
    for line in summary {
        t.note(line);
    }
    for (i, &x) in centres.iter().enumerate() {
        let mut row = vec![x];
        row.extend(columns.iter().map(|c| c[i]));
        t.push(row);
    }
    Ok(t)
}

/// Spectral efficiency per `(case, role)` at one point, computed once.
fn role_table(s: &Scenario, cases: &[u8]) -> Result<HashMap<(u8, Cell), f64>, CliError> {
    let mut out = HashMap::new();
    for &case in cases {
        for role in Cell::ALL {
            match role_efficiency(case, role, s) {
                Ok(e) => {
                    out.insert((case, role), e.value);
                }
                Err(hetnet_dc::Error::UndefinedRole { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(out)
}

fn summed(se: &HashMap<(u8, Cell), f64>, case: u8, roles: &[Cell]) -> f64 {
    roles.iter().map(|r| se[&(case, *r)]).sum()
}

fn sir_gains(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg, Figure::Fig5a)?;
    let mut cols = vec![pts.name.to_string()];
    for c in DECOUPLED_CASES {
        for k in ["dl_se", "mcell_se", "dl_sir_db", "mcell_sir_db", "gain_db"] {
            cols.push(format!("c{c}_{k}"));
        }
        if cfg.monte_carlo {
            for k in ["mc_dl_se", "hw99_dl_se", "mc_mcell_se", "hw99_mcell_se", "mc_gain_db", "hw99_gain_db"] {
                cols.push(format!("c{c}_{k}"));
            }
        }
    }
    let mut t = table(cfg, Figure::Fig5a, cols);
    t.note("dl: the link decoupling moves off the MCell (farther SCell in case 3, nearer SCell otherwise)");
    t.note("se in bit/s/Hz; sir_db is the mean of 10 log10 SIR; gain_db = dl_sir_db - mcell_sir_db");
    for r in rows(&pts, |p| {
        let s = p.scenario();
        let field = if cfg.monte_carlo { Some(InterfererField::from_scenario(&s, InterfererRegion::FullPlane)?) } else { None };
        let mut row = Vec::new();
        for c in DECOUPLED_CASES {
            let dl = decoupled_link(c)?;
            let g = sir_gain(c, &s)?;
            row.extend([
                role_efficiency(c, dl, &s)?.value,
                role_efficiency(c, Cell::MCell, &s)?.value,
                g.decoupled_db,
                g.mcell_db,
                g.gain_db(),
            ]);
            if let Some(field) = &field {
                let mc = empirical_case_links(&s, c, &[dl, Cell::MCell], cfg.samples, cfg.seed, field)?;
                let (a, b) = (&mc.links[0], &mc.links[1]);
                let gain_hw = a.sir_db.half_width_99().hypot(b.sir_db.half_width_99());
                row.extend([
                    a.spectral_efficiency.mean(),
                    a.spectral_efficiency.half_width_99(),
                    b.spectral_efficiency.mean(),
                    b.spectral_efficiency.half_width_99(),
                    a.sir_db.mean() - b.sir_db.mean(),
                    gain_hw,
                ]);
            }
        }
        Ok(row)
    })? {
        t.push(r);
    }
    Ok(t)
}

fn dude_vs_drp(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg, Figure::Fig5b)?;
    let mut cols = vec![pts.name.to_string()];
    for c in DECOUPLED_CASES {
        for k in ["dude_bps", "drp_bps", "ratio", "diff_bps"] {
            cols.push(format!("c{c}_{k}"));
        }
    }
    cols.extend(["agg_dude_bps", "agg_drp_bps", "agg_ratio", "agg_diff_bps"].map(String::from));
    let mut t = table(cfg, Figure::Fig5b, cols);
    t.note("dude: UL links by UL ranking; drp: both UL links follow the DL ranking");
    t.note("ratio = dude/drp; diff = dude - drp; agg_*: averages over cases 3-5 weighted by case probability");
    for r in rows(&pts, |p| {
        let s = p.scenario();
        let se = role_table(&s, &DECOUPLED_CASES)?;
        let probs = all_case_probabilities(&s);
        let mut row = Vec::new();
        let (mut agg_d, mut agg_r, mut w) = (0.0, 0.0, 0.0);
        for c in DECOUPLED_CASES {
            let d = summed(&se, c, &dude_roles(c)?) * s.bandwidth_hz;
            let r = summed(&se, c, &drp_roles(c)?) * s.bandwidth_hz;
            row.extend([d, r, d / r, d - r]);
            let pc = probs.get(c);
            agg_d += pc * d;
            agg_r += pc * r;
            w += pc;
        }
        let (agg_d, agg_r) = (agg_d / w, agg_r / w);
        row.extend([agg_d, agg_r, agg_d / agg_r, agg_d - agg_r]);
        Ok(row)
    })? {
        t.push(r);
    }
    Ok(t)
}

fn dude_vs_bl1(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg, Figure::Fig6)?;
    let cases = [3u8, 4];
    let mut cols = vec![pts.name.to_string()];
    for c in cases {
        for k in ["dude_bps", "bl1_bps", "ratio"] {
            cols.push(format!("c{c}_{k}"));
        }
    }
    let mut t = table(cfg, Figure::Fig6, cols);
    t.note("bl1: dual connectivity with both UL links following the DL ranking; undefined for case 5");
    for r in rows(&pts, |p| {
        let s = p.scenario();
        let se = role_table(&s, &cases)?;
        let mut row = Vec::new();
        for c in cases {
            let d = summed(&se, c, &dude_roles(c)?) * s.bandwidth_hz;
            let b = summed(&se, c, &Baseline::Bl1.roles(c)?) * s.bandwidth_hz;
            row.extend([d, b, d / b]);
        }
        Ok(row)
    })? {
        t.push(r);
    }
    Ok(t)
}

fn dude_vs_bl23(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg, Figure::Fig7)?;
    let mut cols = vec![pts.name.to_string()];
    for c in DECOUPLED_CASES {
        for k in ["dude_bps", "bl2_bps", "bl3_bps"] {
            cols.push(format!("c{c}_{k}"));
        }
    }
    let mut t = table(cfg, Figure::Fig7, cols);
    t.note("bl2: one decoupled UL link at full power; bl3: both carriers towards the DL-best cell");
    for r in rows(&pts, |p| {
        let s = p.scenario();
        let se = role_table(&s, &DECOUPLED_CASES)?;
        let mut row = Vec::new();
        for c in DECOUPLED_CASES {
            row.push(summed(&se, c, &dude_roles(c)?) * s.bandwidth_hz);
            for b in [Baseline::Bl2, Baseline::Bl3] {
                row.push(summed(&se, c, &b.roles(c)?) * s.bandwidth_hz);
            }
        }
        Ok(row)
    })? {
        t.push(r);
    }
    Ok(t)
}
