//! Model constants and their validation.
//!
//! [`NetworkParams`] is the raw, user-facing parameter set (powers in dBm).
//! [`NetworkParams::validate`] checks every invariant and produces
//! [`ValidParams`], which caches the linear powers and the power-imbalance
//! constant used by the rest of the crate.

use thiserror::Error;

/// MCell intensity of the reference deployment, per square meter.
pub const REFERENCE_LAMBDA_M: f64 = 1.47e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    pub lambda_m: f64,
    pub lambda_s: f64,
    pub lambda_d: f64,
    pub p_m_dbm: f64,
    pub p_s_dbm: f64,
    pub p_d_dbm: f64,
    /// Open-loop power control operating point. Carried, unused while `gamma == 0`.
    pub p0_dbm: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub bandwidth_hz: f64,
    pub window_side_m: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },

    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },

    #[error("transmit powers must satisfy p_d_dbm < p_s_dbm < p_m_dbm, got p_d_dbm = {p_d}, p_s_dbm = {p_s}, p_m_dbm = {p_m}")]
    PowerOrdering { p_d: f64, p_s: f64, p_m: f64 },

    #[error("alpha must be greater than 2, got {0}")]
    Exponent(f64),

    #[error("gamma must be 0 (fractional path-loss compensation is not modeled), got {0}")]
    Gamma(f64),
}

impl NetworkParams {
    /// Reference deployment with `lambda_s = ratio * lambda_m`.
    pub fn reference(lambda_s_ratio: f64) -> Self {
        NetworkParams {
            lambda_m: REFERENCE_LAMBDA_M,
            lambda_s: lambda_s_ratio * REFERENCE_LAMBDA_M,
            lambda_d: 0.037,
            p_m_dbm: 43.0,
            p_s_dbm: 30.0,
            p_d_dbm: 23.0,
            p0_dbm: 23.0,
            gamma: 0.0,
            alpha: 4.0,
            bandwidth_hz: 20e6,
            window_side_m: 1650.0,
        }
    }

    pub fn lambda_s_ratio(&self) -> f64 {
        self.lambda_s / self.lambda_m
    }

    pub fn with_lambda_s_ratio(mut self, ratio: f64) -> Self {
        self.lambda_s = ratio * self.lambda_m;
        self
    }

    pub fn validate(&self) -> Result<ValidParams, ParamError> {
        let fields = [
            ("lambda_m", self.lambda_m),
            ("lambda_s", self.lambda_s),
            ("lambda_d", self.lambda_d),
            ("p_m_dbm", self.p_m_dbm),
            ("p_s_dbm", self.p_s_dbm),
            ("p_d_dbm", self.p_d_dbm),
            ("p0_dbm", self.p0_dbm),
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("bandwidth_hz", self.bandwidth_hz),
            ("window_side_m", self.window_side_m),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { field, value });
            }
        }
        let positive = [
            ("lambda_m", self.lambda_m),
            ("lambda_s", self.lambda_s),
            ("lambda_d", self.lambda_d),
            ("bandwidth_hz", self.bandwidth_hz),
            ("window_side_m", self.window_side_m),
        ];
        for (field, value) in positive {
            if value <= 0.0 {
                return Err(ParamError::NonPositive { field, value });
            }
        }
        if !(self.p_d_dbm < self.p_s_dbm && self.p_s_dbm < self.p_m_dbm) {
            return Err(ParamError::PowerOrdering { p_d: self.p_d_dbm, p_s: self.p_s_dbm, p_m: self.p_m_dbm });
        }
        if self.alpha <= 2.0 {
            return Err(ParamError::Exponent(self.alpha));
        }
        if self.gamma != 0.0 {
            return Err(ParamError::Gamma(self.gamma));
        }

        let p_m_mw = dbm_to_linear(self.p_m_dbm);
        let p_s_mw = dbm_to_linear(self.p_s_dbm);
        let p_d_mw = dbm_to_linear(self.p_d_dbm);
        Ok(ValidParams { raw: *self, p_m_mw, p_s_mw, p_d_mw, eta: eta(p_m_mw, p_s_mw, self.alpha) })
    }
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams::reference(5.0)
    }
}

/// Parameters that passed [`NetworkParams::validate`]. Immutable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidParams {
    raw: NetworkParams,
    p_m_mw: f64,
    p_s_mw: f64,
    p_d_mw: f64,
    eta: f64,
}

impl ValidParams {
    pub fn raw(&self) -> &NetworkParams {
        &self.raw
    }

    pub fn lambda_m(&self) -> f64 {
        self.raw.lambda_m
    }

    pub fn lambda_s(&self) -> f64 {
        self.raw.lambda_s
    }

    pub fn lambda_d(&self) -> f64 {
        self.raw.lambda_d
    }

    pub fn alpha(&self) -> f64 {
        self.raw.alpha
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.raw.bandwidth_hz
    }

    pub fn window_side_m(&self) -> f64 {
        self.raw.window_side_m
    }

    pub fn p_m_mw(&self) -> f64 {
        self.p_m_mw
    }

    pub fn p_s_mw(&self) -> f64 {
        self.p_s_mw
    }

    pub fn p_d_mw(&self) -> f64 {
        self.p_d_mw
    }

    /// `(P_m / P_s)^(2 / alpha)`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Intensity of the interfering-user field: one dominant interferer per
    /// cell, i.e. `p * lambda_d` with `p = (lambda_m + lambda_s) / lambda_d`.
    pub fn interferer_intensity(&self) -> f64 {
        self.raw.lambda_m + self.raw.lambda_s
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            lambda_m: self.raw.lambda_m,
            lambda_s: self.raw.lambda_s,
            eta: self.eta,
            alpha: self.raw.alpha,
            interferer_intensity: self.interferer_intensity(),
            bandwidth_hz: self.raw.bandwidth_hz,
        }
    }
}

/// The subset of the model the analytic formulas depend on.
///
/// Built from [`ValidParams`] in normal use. [`Scenario::new`] also admits
/// `eta == 1` (equal powers), which the full parameter set forbids, so the
/// degenerate limits of the closed forms can be exercised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub lambda_m: f64,
    pub lambda_s: f64,
    pub eta: f64,
    pub alpha: f64,
    pub interferer_intensity: f64,
    pub bandwidth_hz: f64,
}

impl Scenario {
    pub fn new(
        lambda_m: f64,
        lambda_s: f64,
        eta: f64,
        alpha: f64,
        interferer_intensity: f64,
        bandwidth_hz: f64,
    ) -> crate::Result<Self> {
        for (field, value) in [
            ("lambda_m", lambda_m),
            ("lambda_s", lambda_s),
            ("interferer_intensity", interferer_intensity),
            ("bandwidth_hz", bandwidth_hz),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive { field, value }.into());
            }
        }
        if !(eta >= 1.0 && eta.is_finite()) {
            return Err(crate::Error::EtaBelowOne(eta));
        }
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(ParamError::Exponent(alpha).into());
        }
        Ok(Scenario { lambda_m, lambda_s, eta, alpha, interferer_intensity, bandwidth_hz })
    }

    /// `sqrt(eta) = (P_m / P_s)^(1 / alpha)`: the factor by which the MCell's
    /// DL reach exceeds an SCell's at equal received power.
    pub fn distance_scale(&self) -> f64 {
        self.eta.sqrt()
    }

    pub fn lambda_s_ratio(&self) -> f64 {
        self.lambda_s / self.lambda_m
    }
}

pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn linear_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Power-imbalance constant `(P_m / P_s)^(2 / alpha)`, powers in linear scale.
pub fn eta(p_m_mw: f64, p_s_mw: f64, alpha: f64) -> f64 {
    (p_m_mw / p_s_mw).powf(2.0 / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dbm_conversion_examples() {
        assert_eq!(dbm_to_linear(0.0), 1.0);
        assert!((dbm_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((dbm_to_linear(23.0) - 199.526_231_496_887_96).abs() < 1e-9);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(5.0, 5.0, 3.7), 1.0);
        let pm = dbm_to_linear(43.0);
        let ps = dbm_to_linear(30.0);
        // 10^0.65
        assert!((eta(pm, ps, 4.0) - 4.466_835_921_509_632).abs() < 1e-12);
        // 10^(1.3 * 2 / 2.0000001)
        let near = eta(pm, ps, 2.000_000_1);
        assert!((near - 19.952_620_163_419_35).abs() < 1e-9, "{near}");
    }

    #[test]
    fn reference_params_validate() {
        for ratio in 1..=10 {
            let v = NetworkParams::reference(ratio as f64).validate().unwrap();
            assert!((v.eta() - 10f64.powf(0.65)).abs() < 1e-12);
            assert_eq!(v.interferer_intensity(), v.lambda_m() + v.lambda_s());
        }
    }

    #[test]
    fn power_ordering_rejected() {
        let p = NetworkParams { p_d_dbm: 31.0, ..NetworkParams::default() };
        assert!(matches!(p.validate(), Err(ParamError::PowerOrdering { .. })));
        let p = NetworkParams { p_s_dbm: 43.0, ..NetworkParams::default() };
        assert!(matches!(p.validate(), Err(ParamError::PowerOrdering { .. })));
    }

    #[test]
    fn exponent_rejected() {
        let p = NetworkParams { alpha: 2.0, ..NetworkParams::default() };
        assert_eq!(p.validate(), Err(ParamError::Exponent(2.0)));
    }

    #[test]
    fn gamma_rejected() {
        let p = NetworkParams { gamma: 0.8, ..NetworkParams::default() };
        assert_eq!(p.validate(), Err(ParamError::Gamma(0.8)));
    }

    #[test]
    fn errors_name_the_field() {
        let p = NetworkParams { lambda_s: -1.0, ..NetworkParams::default() };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("lambda_s"), "{msg}");
        let p = NetworkParams { window_side_m: 0.0, ..NetworkParams::default() };
        assert!(p.validate().unwrap_err().to_string().contains("window_side_m"));
        let p = NetworkParams { bandwidth_hz: f64::NAN, ..NetworkParams::default() };
        assert!(p.validate().unwrap_err().to_string().contains("bandwidth_hz"));
    }

    #[test]
    fn scenario_admits_equal_powers() {
        let s = Scenario::new(1.0, 2.0, 1.0, 4.0, 3.0, 1.0).unwrap();
        assert_eq!(s.distance_scale(), 1.0);
        assert!(matches!(Scenario::new(1.0, 2.0, 0.9, 4.0, 3.0, 1.0), Err(crate::Error::EtaBelowOne(_))));
    }

    proptest! {
        #[test]
        fn dbm_round_trip(dbm in -100.0f64..100.0) {
            let back = linear_to_dbm(dbm_to_linear(dbm));
            prop_assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }

        #[test]
        fn eta_increasing_in_power_ratio(r1 in 1.0f64..1e4, bump in 1e-6f64..10.0, alpha in 2.01f64..8.0) {
            prop_assert!(eta(r1 * (1.0 + bump), 1.0, alpha) > eta(r1, 1.0, alpha));
        }
    }
}
