//! Experiment configuration: defaults, a flat `key = value` file, and
//! command-line overrides applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use hetnet_dc::{NetworkParams, ValidParams};

use crate::CliError;

/// Parameters that may be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    LambdaSRatio,
    PsDbm,
    Alpha,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::LambdaSRatio => "lambda_s_ratio",
            SweepParam::PsDbm => "p_s_dbm",
            SweepParam::Alpha => "alpha",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "lambda_s_ratio" => Ok(SweepParam::LambdaSRatio),
            "p_s_dbm" => Ok(SweepParam::PsDbm),
            "alpha" => Ok(SweepParam::Alpha),
            other => Err(CliError::Config(format!(
                "cannot sweep '{other}' (expected lambda_s_ratio, p_s_dbm or alpha)"
            ))),
        }
    }
}

/// `name=start:stop:steps`, with `steps` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn new(param: SweepParam, start: f64, stop: f64, steps: usize) -> Self {
        Sweep { param, start, stop, steps }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("sweep '{s}' is not of the form name=start:stop:steps"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, steps] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        if steps == 0 || !start.is_finite() || !stop.is_finite() || (steps == 1 && start != stop) {
            return Err(CliError::Config(format!("sweep '{s}' needs steps >= 1 and finite bounds (a single step needs start = stop)")));
        }
        Ok(Sweep { param: SweepParam::parse(name.trim())?, start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.param.name(), self.start, self.stop, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SmallDensity {
    Absolute(f64),
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    params: NetworkParams,
    small: SmallDensity,
    pub sweep: Option<Sweep>,
    pub samples: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub simplex_tolerance: f64,
    pub monte_carlo: bool,
}

pub const MIN_SAMPLES: u64 = hetnet_dc::montecarlo::MIN_SAMPLES;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let params = NetworkParams::reference(5.0);
        ExperimentConfig {
            small: SmallDensity::Ratio(params.lambda_s_ratio()),
            params,
            sweep: None,
            samples: 100_000,
            seed: 1,
            out: PathBuf::from("out"),
            simplex_tolerance: 1e-9,
            monte_carlo: true,
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        let value = value.trim();
        let p = &mut self.params;
        match key {
            "lambda_m" => p.lambda_m = number(key, value)?,
            "lambda_s" => self.small = SmallDensity::Absolute(number(key, value)?),
            "lambda_s_ratio" => self.small = SmallDensity::Ratio(number(key, value)?),
            "lambda_d" => p.lambda_d = number(key, value)?,
            "p_m_dbm" => p.p_m_dbm = number(key, value)?,
            "p_s_dbm" => p.p_s_dbm = number(key, value)?,
            "p_d_dbm" => p.p_d_dbm = number(key, value)?,
            "p0_dbm" => p.p0_dbm = number(key, value)?,
            "gamma" => p.gamma = number(key, value)?,
            "alpha" => p.alpha = number(key, value)?,
            "bandwidth_hz" => p.bandwidth_hz = number(key, value)?,
            "window_side_m" => p.window_side_m = number(key, value)?,
            "samples" => self.samples = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "sweep" => self.sweep = Some(Sweep::parse(value)?),
            "simplex_tolerance" => self.simplex_tolerance = number(key, value)?,
            "monte_carlo" => {
                self.monte_carlo = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(CliError::Config(format!("monte_carlo: expected true or false, got '{value}'"))),
                }
            }
            "format" => {
                if value != "csv" {
                    return Err(CliError::Config(format!("format: only 'csv' is supported, got '{value}'")));
                }
            }
            other => return Err(CliError::Config(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` (as given to `--set`).
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("'{pair}' is not of the form key=value")))?;
        self.set(k, v)
    }

    pub fn load_str(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected 'key = value'", i + 1)))?;
            self.set(k, v).map_err(|e| CliError::Config(format!("{origin}:{}: {}", i + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.load_str(&text, &path.display().to_string())
    }

    /// Raw parameters with the SCell density resolved.
    pub fn params(&self) -> NetworkParams {
        let mut p = self.params;
        p.lambda_s = match self.small {
            SmallDensity::Absolute(v) => v,
            SmallDensity::Ratio(r) => r * p.lambda_m,
        };
        p
    }

    /// Checks the parameters and the experiment settings.
    pub fn validate(&self) -> Result<ValidParams, CliError> {
        if self.samples < MIN_SAMPLES {
            return Err(CliError::Config(format!("samples must be at least {MIN_SAMPLES}, got {}", self.samples)));
        }
        if !(self.simplex_tolerance >= 0.0) {
            return Err(CliError::Config(format!("simplex_tolerance must be non-negative, got {}", self.simplex_tolerance)));
        }
        self.params().validate().map_err(|e| CliError::Config(e.to_string()))
    }

    /// Parameters at one sweep value, validated.
    pub fn at(&self, param: SweepParam, value: f64) -> Result<ValidParams, CliError> {
        let mut c = self.clone();
        match param {
            SweepParam::LambdaSRatio => c.small = SmallDensity::Ratio(value),
            SweepParam::PsDbm => c.params.p_s_dbm = value,
            SweepParam::Alpha => c.params.alpha = value,
        }
        c.params()
            .validate()
            .map_err(|e| CliError::Config(format!("at {}={value}: {e}", param.name())))
    }

    /// Sweep points: the configured sweep, else `fallback`, else the single
    /// configured point.
    pub fn sweep_points(&self, fallback: Option<Sweep>) -> Result<(Option<SweepParam>, Vec<(f64, ValidParams)>), CliError> {
        match self.sweep.or(fallback) {
            Some(sw) => {
                let points = sw.values().into_iter().map(|v| self.at(sw.param, v).map(|p| (v, p))).collect::<Result<_, _>>()?;
                Ok((Some(sw.param), points))
            }
            None => Ok((None, vec![(f64::NAN, self.validate()?)])),
        }
    }

    /// `key = value` lines describing everything needed to reproduce a run.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let p = self.params();
        let mut out = vec![
            ("seed".into(), self.seed.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("monte_carlo".into(), self.monte_carlo.to_string()),
            ("simplex_tolerance".into(), format!("{:e}", self.simplex_tolerance)),
        ];
        if let Some(s) = self.sweep {
            out.push(("sweep".into(), s.to_string()));
        }
        for (k, v) in [
            ("lambda_m", p.lambda_m),
            ("lambda_s", p.lambda_s),
            ("lambda_d", p.lambda_d),
            ("p_m_dbm", p.p_m_dbm),
            ("p_s_dbm", p.p_s_dbm),
            ("p_d_dbm", p.p_d_dbm),
            ("p0_dbm", p.p0_dbm),
            ("gamma", p.gamma),
            ("alpha", p.alpha),
            ("bandwidth_hz", p.bandwidth_hz),
            ("window_side_m", p.window_side_m),
        ] {
            out.push((k.into(), format!("{v:?}")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = ExperimentConfig::default();
        c.load_str("# comment\nlambda_s_ratio = 3\n\nseed = 42  # trailing\n", "test").unwrap();
        assert_eq!(c.seed, 42);
        assert!((c.params().lambda_s_ratio() - 3.0).abs() < 1e-12);
        c.set_pair("lambda_m=2e-5").unwrap();
        assert!((c.params().lambda_s - 6e-5).abs() < 1e-18);
        c.set_pair("lambda_s=1e-4").unwrap();
        assert_eq!(c.params().lambda_s, 1e-4);
    }

    #[test]
    fn bad_lines_name_location() {
        let mut c = ExperimentConfig::default();
        let e = c.load_str("seed = 1\nnot a pair\n", "f.cfg").unwrap_err();
        assert!(e.message().contains("f.cfg:2"));
        let e = c.load_str("colour = red\n", "f.cfg").unwrap_err();
        assert!(e.message().contains("colour"));
    }

    #[test]
    fn negative_density_is_rejected_by_field() {
        let mut c = ExperimentConfig::default();
        c.set_pair("lambda_s=-1").unwrap();
        assert!(c.validate().unwrap_err().message().contains("lambda_s"));
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("lambda_s_ratio=1:10:10").unwrap();
        assert_eq!(s.values(), (1..=10).map(|v| v as f64).collect::<Vec<_>>());
        assert_eq!(Sweep::parse("p_s_dbm=30:30:1").unwrap().values(), vec![30.0]);
        assert!(Sweep::parse("lambda_m=1:2:3").is_err());
        assert!(Sweep::parse("alpha=3:4").is_err());
        assert!(Sweep::parse("alpha=3:4:0").is_err());
    }

    #[test]
    fn minimum_samples() {
        let mut c = ExperimentConfig::default();
        c.samples = 10;
        assert!(c.validate().is_err());
    }
}
