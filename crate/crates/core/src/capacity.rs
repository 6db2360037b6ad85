//! Uplink SIR distribution and spectral efficiency.
//!
//! With unit-mean exponential fading and interferers forming a PPP of
//! intensity `lambda_id` over the whole plane, the SIR of a link at distance
//! `x` satisfies
//!
//! ```text
//! Pr(SIR > theta | x) = exp(-pi lambda_id K(alpha) theta^(2/alpha) x^2)
//! ```
//!
//! where `K(alpha) = 2 pi / (alpha sin(2 pi / alpha))`. Averaging over the
//! serving-distance law and integrating `Pr(ln(1 + SIR) > t)` over `t` gives
//! the ergodic spectral efficiency in nats, divided by `ln 2` for bits.
//! Transmit power cancels between signal and interference and so never
//! enters.

use std::f64::consts::{LN_2, PI};

use crate::association::Cell;
use crate::distance::{ConditionalDistance, DistanceLaw};
use crate::error::{Error, Result};
use crate::params::Scenario;
use crate::quad::{integrate, Tolerance};

/// The SIR ccdf is treated as zero below this level.
pub const CCDF_FLOOR: f64 = 1e-10;

/// Give up if the ccdf has not reached [`CCDF_FLOOR`] by this many nats.
pub const T_LIMIT: f64 = 700.0;

const OUTER_TOL: f64 = 1e-9;
const INNER_TOL: f64 = 1e-13;

/// `K(alpha) = integral_0^inf dv / (1 + v^(alpha/2)) = 2 pi / (alpha sin(2 pi / alpha))`.
pub fn interference_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::Domain { what: "alpha", value: alpha });
    }
    Ok(2.0 * PI / (alpha * (2.0 * PI / alpha).sin()))
}

/// `K(alpha)` by direct quadrature, for cross-checking the closed form.
pub fn interference_constant_quadrature(alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::Domain { what: "alpha", value: alpha });
    }
    // On [1, inf) substitute v = w^(-1/(a-1)), which leaves the bounded
    // integrand 1 / ((a-1)(1 + w^(a/(a-1)))) on (0, 1].
    let a = alpha / 2.0;
    let tol = Tolerance::absolute(1e-13);
    let head = integrate(|v| 1.0 / (1.0 + v.powf(a)), 0.0, 1.0, tol)?;
    let tail = integrate(|w| 1.0 / ((a - 1.0) * (1.0 + w.powf(a / (a - 1.0)))), 0.0, 1.0, tol)?;
    Ok(head.value + tail.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceField {
    intensity: f64,
    alpha: f64,
    k: f64,
}

impl InterferenceField {
    pub fn new(intensity: f64, alpha: f64) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::Domain { what: "interferer intensity", value: intensity });
        }
        Ok(InterferenceField { intensity, alpha, k: interference_constant(alpha)? })
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        InterferenceField::new(s.interferer_intensity, s.alpha).expect("scenario invariants hold")
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        InterferenceField::new(self.intensity * factor, self.alpha)
    }

    /// `c` in `Pr(SIR > theta | x) = exp(-c x^2)`, given `ln theta`.
    fn rate_from_log_theta(&self, ln_theta: f64) -> f64 {
        PI * self.intensity * self.k * (2.0 / self.alpha * ln_theta).exp()
    }
}

/// `ln(e^t - 1)` without overflow for large `t`.
fn ln_expm1(t: f64) -> f64 {
    if t > 1.0 {
        t + (-(-t).exp()).ln_1p()
    } else {
        t.exp_m1().ln()
    }
}

/// `E_x[exp(-c x^2)]` under `law`.
fn laplace_gaussian<L: DistanceLaw>(law: &L, c: f64) -> Result<f64> {
    // exp(-c x^2) < 1e-16 beyond this point.
    let upper = law.cutoff().min((36.9 / c).sqrt());
    let r = integrate(|x| (-c * x * x).exp() * law.pdf(x), 0.0, upper, Tolerance::absolute(INNER_TOL))?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// `Pr(SIR > theta)` for the threshold `theta = e^ln_theta`.
pub fn sir_threshold_ccdf<L: DistanceLaw>(ln_theta: f64, law: &L, field: &InterferenceField) -> Result<f64> {
    laplace_gaussian(law, field.rate_from_log_theta(ln_theta))
}

/// `Pr(ln(1 + SIR) > t)`.
pub fn sir_ccdf<L: DistanceLaw>(t: f64, law: &L, field: &InterferenceField) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain { what: "t", value: t });
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    sir_threshold_ccdf(ln_expm1(t), law, field)
}

/// Spectral efficiency of one link with its quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEfficiency {
    /// bits/s/Hz
    pub value: f64,
    pub abs_err: f64,
    /// Upper end of the `t` integration.
    pub t_max: f64,
}

/// First integer `t` at which `g(t)` falls below `floor`.
fn decay_point<G: FnMut(f64) -> Result<f64>>(mut g: G, floor: f64) -> Result<f64> {
    let mut t = 1.0;
    loop {
        let v = g(t)?;
        if v < floor {
            return Ok(t);
        }
        if t >= T_LIMIT {
            return Err(Error::Divergence { t_max: t, ccdf: v, threshold: floor });
        }
        t += 1.0;
    }
}

pub fn spectral_efficiency<L: DistanceLaw>(law: &L, field: &InterferenceField) -> Result<LinkEfficiency> {
    let t_max = decay_point(|t| sir_ccdf(t, law, field), CCDF_FLOOR)?;
    let mut failure = None;
    let r = integrate(
        |t| match sir_ccdf(t, law, field) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t_max,
        Tolerance::absolute(OUTER_TOL * LN_2),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(LinkEfficiency { value: r.value / LN_2, abs_err: r.abs_err / LN_2, t_max })
}

/// `E[ln SIR]` from the SIR distribution:
/// `integral_0^inf Pr(ln SIR > u) du - integral_-inf^0 Pr(ln SIR < u) du`.
pub fn mean_log_sir<L: DistanceLaw>(law: &L, field: &InterferenceField) -> Result<f64> {
    let upper = |u: f64| sir_threshold_ccdf(u, law, field);
    let lower = |u: f64| sir_threshold_ccdf(-u, law, field).map(|g| 1.0 - g);
    let u_hi = decay_point(upper, CCDF_FLOOR)?;
    let u_lo = decay_point(lower, CCDF_FLOOR)?;
    let tol = Tolerance::absolute(OUTER_TOL);
    let pos = integrate(|u| upper(u).unwrap_or(f64::NAN), 0.0, u_hi, tol)?;
    let neg = integrate(|u| lower(u).unwrap_or(f64::NAN), 0.0, u_lo, tol)?;
    let value = pos.value - neg.value;
    if !value.is_finite() {
        return Err(Error::Quadrature { value, abs_err: f64::NAN, intervals: pos.intervals + neg.intervals });
    }
    Ok(value)
}

/// Mean SIR in dB, i.e. `E[10 log10 SIR]`.
pub fn mean_sir_db<L: DistanceLaw>(law: &L, field: &InterferenceField) -> Result<f64> {
    Ok(10.0 / std::f64::consts::LN_10 * mean_log_sir(law, field)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub capacity_bps: f64,
    pub spectral_efficiency: f64,
    pub quadrature_abs_err: f64,
    pub per_link: Vec<f64>,
}

impl CapacityResult {
    fn from_links(links: &[LinkEfficiency], bandwidth_hz: f64) -> Self {
        let se: f64 = links.iter().map(|l| l.value).sum();
        CapacityResult {
            capacity_bps: se * bandwidth_hz,
            spectral_efficiency: se,
            quadrature_abs_err: links.iter().map(|l| l.abs_err).sum(),
            per_link: links.iter().map(|l| l.value).collect(),
        }
    }
}

pub fn link_capacity<L: DistanceLaw>(law: &L, field: &InterferenceField, bandwidth_hz: f64) -> Result<CapacityResult> {
    Ok(CapacityResult::from_links(&[spectral_efficiency(law, field)?], bandwidth_hz))
}

/// Spectral efficiency of one `(case, role)` link.
pub fn role_efficiency(case: u8, role: Cell, s: &Scenario) -> Result<LinkEfficiency> {
    let law = ConditionalDistance::new(case, role, s)?;
    spectral_efficiency(&law, &InterferenceField::from_scenario(s))
}

fn compose(case: u8, roles: &[Cell], s: &Scenario) -> Result<CapacityResult> {
    let links = roles.iter().map(|&r| role_efficiency(case, r, s)).collect::<Result<Vec<_>>>()?;
    Ok(CapacityResult::from_links(&links, s.bandwidth_hz))
}

fn require_decoupled(case: u8) -> Result<()> {
    match case {
        3..=5 => Ok(()),
        1 | 2 | 6 => Err(Error::NotDecoupled(case)),
        _ => Err(Error::UnknownCase(case)),
    }
}

/// The two UL links under decoupled association.
pub fn dude_roles(case: u8) -> Result<[Cell; 2]> {
    require_decoupled(case)?;
    Ok(match case {
        5 => [Cell::SCell1, Cell::MCell],
        _ => [Cell::SCell1, Cell::SCell2],
    })
}

/// The two UL links when both follow the DL ranking.
pub fn drp_roles(case: u8) -> Result<[Cell; 2]> {
    require_decoupled(case)?;
    Ok(match case {
        3 => [Cell::SCell1, Cell::MCell],
        _ => [Cell::MCell, Cell::SCell1],
    })
}

pub fn dude_case_capacity(case: u8, s: &Scenario) -> Result<CapacityResult> {
    compose(case, &dude_roles(case)?, s)
}

pub fn drp_case_capacity(case: u8, s: &Scenario) -> Result<CapacityResult> {
    compose(case, &drp_roles(case)?, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// Dual connectivity with both UL links following the DL ranking.
    Bl1,
    /// Single decoupled UL link, no aggregation.
    Bl2,
    /// Both carriers aggregated towards the DL-best cell.
    Bl3,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::Bl1, Baseline::Bl2, Baseline::Bl3];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Bl1 => "BL1",
            Baseline::Bl2 => "BL2",
            Baseline::Bl3 => "BL3",
        }
    }

    pub fn roles(self, case: u8) -> Result<Vec<Cell>> {
        require_decoupled(case)?;
        Ok(match (self, case) {
            (Baseline::Bl1, 5) => return Err(Error::BaselineUndefined { baseline: self.name(), case }),
            (Baseline::Bl1, _) => drp_roles(case)?.to_vec(),
            (Baseline::Bl2, _) => vec![Cell::SCell1],
            (Baseline::Bl3, 3) => vec![Cell::SCell1, Cell::SCell1],
            (Baseline::Bl3, _) => vec![Cell::MCell, Cell::MCell],
        })
    }
}

pub fn baseline_capacity(baseline: Baseline, case: u8, s: &Scenario) -> Result<CapacityResult> {
    compose(case, &baseline.roles(case)?, s)
}

/// The link that decoupling moves away from the MCell.
pub fn decoupled_link(case: u8) -> Result<Cell> {
    require_decoupled(case)?;
    Ok(if case == 3 { Cell::SCell2 } else { Cell::SCell1 })
}

/// Mean SIR of the decoupled link minus that of the sub-optimal MCell link,
/// both under the case-conditional geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirGain {
    pub decoupled_db: f64,
    pub mcell_db: f64,
}

impl SirGain {
    pub fn gain_db(&self) -> f64 {
        self.decoupled_db - self.mcell_db
    }
}

pub fn sir_gain(case: u8, s: &Scenario) -> Result<SirGain> {
    if s.eta <= 1.0 {
        return Err(Error::EtaBelowOne(s.eta));
    }
    let field = InterferenceField::from_scenario(s);
    let served = ConditionalDistance::new(case, decoupled_link(case)?, s)?;
    let mcell = ConditionalDistance::new(case, Cell::MCell, s)?;
    Ok(SirGain { decoupled_db: mean_sir_db(&served, &field)?, mcell_db: mean_sir_db(&mcell, &field)? })
}

pub fn sir_gain_db(case: u8, s: &Scenario) -> Result<f64> {
    Ok(sir_gain(case, s)?.gain_db())
}
