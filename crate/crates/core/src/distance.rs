//! Serving-distance laws: the Rayleigh nearest-point law and the
//! conditional distance densities of the decoupled cases.

use std::f64::consts::PI;

use rand::Rng;

use crate::association::{case_probability, Cell, Classifier, DistanceTriple};
use crate::error::{Error, Result};
use crate::params::Scenario;
use crate::quad::{integrate, Tolerance};

/// Exponential factors below this are treated as zero when choosing the
/// upper integration limit.
const NEGLIGIBLE: f64 = 1e-16;

/// A probability density on `[0, inf)` that the capacity integrals can use.
pub trait DistanceLaw {
    fn pdf(&self, x: f64) -> f64;

    /// Distance beyond which the density is negligible.
    fn cutoff(&self) -> f64;
}

/// Distance from the origin to the nearest point of a PPP of intensity `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rayleigh {
    lambda: f64,
}

impl Rayleigh {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain { what: "intensity", value: lambda });
        }
        Ok(Rayleigh { lambda })
    }

    pub fn intensity(&self) -> f64 {
        self.lambda
    }

    pub fn try_pdf(&self, x: f64) -> Result<f64> {
        check_distance(x)?;
        Ok(self.pdf(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_distance(x)?;
        Ok(-(-PI * self.lambda * x * x).exp_m1())
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain { what: "probability", value: u });
        }
        Ok((-(-u).ln_1p() / (PI * self.lambda)).sqrt())
    }

    pub fn mean(&self) -> f64 {
        0.5 / self.lambda.sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1 - U lies in (0, 1], so the log is finite.
        let u: f64 = rng.random();
        (-(1.0 - u).ln() / (PI * self.lambda)).sqrt()
    }
}

impl DistanceLaw for Rayleigh {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        2.0 * PI * self.lambda * x * (-PI * self.lambda * x * x).exp()
    }

    fn cutoff(&self) -> f64 {
        cutoff_for(self.lambda)
    }
}

fn check_distance(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "distance", value: x })
    }
}

fn cutoff_for(rate: f64) -> f64 {
    (-NEGLIGIBLE.ln() / (PI * rate)).sqrt()
}

/// Distance to one serving cell, conditioned on the user lying in a
/// decoupled case.
///
/// Roles follow the n.1 subcase labels after folding the mirror subcase:
/// `SCell1` is the nearer of the two SCells and `SCell2` the farther.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalDistance {
    case: u8,
    role: Cell,
    scenario: Scenario,
    probability: f64,
}

impl ConditionalDistance {
    pub fn new(case: u8, role: Cell, scenario: &Scenario) -> Result<Self> {
        match (case, role) {
            (3 | 4, _) | (5, Cell::MCell | Cell::SCell1) => {}
            (5, Cell::SCell2) => return Err(Error::UndefinedRole { case, role: role.name() }),
            (1 | 2 | 6, _) => return Err(Error::NotDecoupled(case)),
            _ => return Err(Error::UnknownCase(case)),
        }
        let probability = case_probability(case, scenario.lambda_m, scenario.lambda_s, scenario.eta)?;
        if probability <= 0.0 {
            return Err(Error::EmptyRegion { case });
        }
        Ok(ConditionalDistance { case, role, scenario: *scenario, probability })
    }

    /// Every `(case, role)` pair with a conditional law.
    pub fn pairs() -> [(u8, Cell); 8] {
        use Cell::*;
        [(3, SCell1), (3, SCell2), (3, MCell), (4, SCell1), (4, SCell2), (4, MCell), (5, SCell1), (5, MCell)]
    }

    pub fn case(&self) -> u8 {
        self.case
    }

    pub fn role(&self) -> Cell {
        self.role
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Closed-form probability of the conditioning case.
    pub fn case_probability(&self) -> f64 {
        self.probability
    }

    pub fn try_pdf(&self, x: f64) -> Result<f64> {
        check_distance(x)?;
        Ok(self.pdf(x))
    }

    /// `Pr(X <= x)` by adaptive quadrature of the density.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_distance(x)?;
        let upper = x.min(self.cutoff());
        let r = integrate(|z| self.pdf(z), 0.0, upper, Tolerance::absolute(1e-9))?;
        Ok(r.value.clamp(0.0, 1.0))
    }

    /// Integral of the density over `[0, inf)`; 1 up to quadrature error.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(integrate(|z| self.pdf(z), 0.0, self.cutoff(), Tolerance::absolute(1e-10))?.value)
    }

    pub fn mean(&self) -> Result<f64> {
        // Scale the tolerance to the distance unit.
        let tol = Tolerance::absolute(1e-10).with_rel(1e-10);
        Ok(integrate(|z| z * self.pdf(z), 0.0, self.cutoff(), tol)?.value)
    }

    /// Draws a triple from the independent-Rayleigh model until it falls in
    /// this case, and returns the role's distance together with the number
    /// of triples drawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, u64)> {
        let classifier = Classifier::from_scenario(&self.scenario);
        let macro_law = Rayleigh::new(self.scenario.lambda_m)?;
        let small_law = Rayleigh::new(self.scenario.lambda_s)?;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let t = DistanceTriple {
                x_m: macro_law.sample(rng),
                x_1: small_law.sample(rng),
                x_2: small_law.sample(rng),
            };
            if classifier.by_inequalities(&t)?.case() == self.case {
                return Ok((t.role_distance(self.role), attempts));
            }
        }
    }

    fn bracket(&self, x: f64) -> f64 {
        let Scenario { lambda_m: lm, lambda_s: ls, eta: e, .. } = self.scenario;
        let ex = |rate: f64| (-PI * rate * x * x).exp();
        match (self.case, self.role) {
            (3, Cell::SCell1) => lm / (lm + ls / e) * ex(lm * e + ls) - lm / (lm + ls) * ex((lm + ls) * e),
            (3, Cell::SCell2) => {
                let c = lm * e / (ls + lm * e);
                ex(lm) - ex(lm * e) - c * ex(ls / e + lm) + c * ex(ls + lm * e)
            }
            (3, Cell::MCell) => (ex(ls / e) - ex(ls)) * -(-PI * ls / e * x * x).exp_m1(),
            (4, Cell::SCell1) => {
                ls / (lm + ls) * (ex(lm + ls) - ex((lm + ls) * e)) - ex(lm * e + ls) + ex((lm + ls) * e)
            }
            (4, Cell::SCell2) => {
                ex(ls / e + lm) - ex(lm + ls) + ls / (ls + lm * e) * (ex(ls + lm * e) - ex(ls / e + lm))
            }
            // Half the square of (e^{-pi ls x^2 / eta} - e^{-pi ls x^2}).
            (4, Cell::MCell) => {
                let d = ex(ls / e) - ex(ls);
                0.5 * d * d
            }
            (5, Cell::SCell1) => lm / (ls + lm) * (ex(ls + lm) - ex((ls + lm) * e)),
            (5, Cell::MCell) => ex(ls) * (ex(ls / e) - ex(ls)),
            _ => unreachable!("pair validated at construction"),
        }
    }
}

impl DistanceLaw for ConditionalDistance {
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let base = match self.role {
            Cell::MCell => self.scenario.lambda_m,
            _ => self.scenario.lambda_s,
        };
        let own = 2.0 * PI * base * x * (-PI * base * x * x).exp();
        // The factor 2 folds in the mirror subcase.
        (2.0 / self.probability * self.bracket(x) * own).max(0.0)
    }

    fn cutoff(&self) -> f64 {
        let s = &self.scenario;
        cutoff_for(s.lambda_m.min(s.lambda_s / s.eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NetworkParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> Scenario {
        NetworkParams::reference(5.0).validate().unwrap().scenario()
    }

    #[test]
    fn rayleigh_examples() {
        let r = Rayleigh::new(1.0 / PI).unwrap();
        assert_eq!(r.cdf(0.0).unwrap(), 0.0);
        assert!((r.cdf(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let r4 = Rayleigh::new(1e-4).unwrap();
        for x in [0.1, 1.0, 100.0] {
            let back = r4.quantile(r4.cdf(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-10 * x.max(1.0), "{x} -> {back}");
        }
        assert!(r.cdf(-1.0).is_err());
        assert!(r.quantile(0.0).is_err());
        assert!(r.quantile(1.0).is_err());
        assert!(Rayleigh::new(0.0).is_err());
    }

    #[test]
    fn rayleigh_mean_matches_quadrature() {
        let r = Rayleigh::new(3e-5).unwrap();
        let q = integrate(|x| x * r.pdf(x), 0.0, r.cutoff(), Tolerance::absolute(1e-9)).unwrap();
        assert!((q.value - r.mean()).abs() < 1e-8);
    }

    #[test]
    fn every_pair_normalizes() {
        for ratio in [1.0, 5.0, 10.0] {
            let s = NetworkParams::reference(ratio).validate().unwrap().scenario();
            for (case, role) in ConditionalDistance::pairs() {
                let d = ConditionalDistance::new(case, role, &s).unwrap();
                let m = d.total_mass().unwrap();
                assert!((m - 1.0).abs() < 1e-6, "case {case} {role} ratio {ratio}: {m}");
            }
        }
    }

    #[test]
    fn undefined_pairs_rejected() {
        let s = reference();
        assert_eq!(
            ConditionalDistance::new(5, Cell::SCell2, &s),
            Err(Error::UndefinedRole { case: 5, role: "SCell2" })
        );
        assert_eq!(ConditionalDistance::new(2, Cell::MCell, &s), Err(Error::NotDecoupled(2)));
        assert_eq!(ConditionalDistance::new(9, Cell::MCell, &s), Err(Error::UnknownCase(9)));
        let flat = Scenario::new(1e-5, 5e-5, 1.0, 4.0, 6e-5, 1.0).unwrap();
        assert_eq!(ConditionalDistance::new(3, Cell::SCell1, &flat), Err(Error::EmptyRegion { case: 3 }));
    }

    #[test]
    fn macro_density_vanishes_at_origin() {
        let d = ConditionalDistance::new(3, Cell::MCell, &reference()).unwrap();
        assert_eq!(d.pdf(0.0), 0.0);
        assert!(d.pdf(1e-3) < 1e-12);
    }

    #[test]
    fn cdf_is_monotone_and_differentiates_to_pdf() {
        let s = reference();
        for (case, role) in ConditionalDistance::pairs() {
            let d = ConditionalDistance::new(case, role, &s).unwrap();
            assert_eq!(d.cdf(0.0).unwrap(), 0.0);
            let far = 10.0 * Rayleigh::new(s.lambda_m.min(s.lambda_s / s.eta)).unwrap().quantile(0.99999).unwrap();
            assert!((d.cdf(far).unwrap() - 1.0).abs() < 1e-6);
            let mut prev = 0.0;
            for i in 1..=40 {
                let c = d.cdf(i as f64 * 10.0).unwrap();
                assert!(c >= prev - 1e-12);
                prev = c;
            }
            for x in [30.0, 60.0, 120.0] {
                let h = 1e-3;
                let deriv = (d.cdf(x + h).unwrap() - d.cdf(x - h).unwrap()) / (2.0 * h);
                let p = d.pdf(x);
                assert!((deriv - p).abs() <= 1e-4 * p, "case {case} {role} x {x}: {deriv} vs {p}");
            }
        }
    }

    #[test]
    fn serving_scell_is_closer_than_mcell() {
        let s = reference();
        for case in [3, 4, 5] {
            let near = ConditionalDistance::new(case, Cell::SCell1, &s).unwrap().mean().unwrap();
            let mac = ConditionalDistance::new(case, Cell::MCell, &s).unwrap().mean().unwrap();
            assert!(near < mac, "case {case}: {near} vs {mac}");
        }
    }

    #[test]
    fn sampler_mean_and_acceptance() {
        let s = reference();
        let d = ConditionalDistance::new(3, Cell::SCell1, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let (mut sum, mut sq, mut tries) = (0.0, 0.0, 0u64);
        for _ in 0..n {
            let (x, a) = d.sample(&mut rng).unwrap();
            sum += x;
            sq += x * x;
            tries += a;
        }
        let mean = sum / n as f64;
        let sd = (sq / n as f64 - mean * mean).sqrt();
        assert!((mean - d.mean().unwrap()).abs() < 3.0 * sd / (n as f64).sqrt());
        let p = d.case_probability();
        let rate = n as f64 / tries as f64;
        let sigma = (p * (1.0 - p) / tries as f64).sqrt();
        assert!((rate - p).abs() < 3.0 * sigma, "acceptance {rate} vs {p}");
    }
}
