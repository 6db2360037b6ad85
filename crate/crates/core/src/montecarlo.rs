//! Monte Carlo oracle for the analytic model.
//!
//! Work is split into fixed-size batches, each driven by its own ChaCha8
//! stream derived from `(seed, purpose, batch)`. Batches run on the rayon
//! pool and are merged in batch order, so results depend only on the seed
//! and the sample count, never on the number of worker threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::association::{Cell, Classifier, DistanceTriple, SingleAssociation, Subcase};
use crate::distance::{ConditionalDistance, Rayleigh};
use crate::error::{Error, Result};
use crate::params::{Scenario, ValidParams};
use crate::stats::{binomial_sigma, ks_coefficient, ks_statistic, total_variation, Moments, Z_99};

/// Samples per batch; one random stream each.
pub const BATCH: u64 = 1 << 14;

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: u64 = 10_000;

/// A reproducible random stream. Distinct `stream_id`s under the same seed
/// give independent sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// High bits of the stream id; the batch index fills the low 40 bits.
#[derive(Debug, Clone, Copy)]
enum Purpose {
    ModelFrequencies = 1,
    PppFrequencies = 2,
    Agreement = 3,
    Conditional = 4,
    Links = 5,
    PppMarginals = 6,
    SingleLink = 7,
}

fn stream(seed: u64, purpose: Purpose, case: u8, batch: u64) -> ChaCha8Rng {
    RandomStream::new(seed, ((purpose as u64) << 48) | ((case as u64) << 40) | batch).rng()
}

/// Sizes of the batches covering `n` samples.
fn batches(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(BATCH)).map(|b| (b, BATCH.min(n - b * BATCH))).collect()
}

fn check_samples(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::Config(format!("sample count {n} is below the minimum of {MIN_SAMPLES}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Independent Rayleigh distances.
    Model,
    /// Nearest points of simulated PPPs in a finite window.
    Ppp,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Model => "model",
            Origin::Ppp => "ppp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSample {
    pub triple: DistanceTriple,
    pub subcase: Subcase,
    pub origin: Origin,
}

/// Independent-Rayleigh triple.
pub fn sample_triple_model<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> DistanceTriple {
    let m = Rayleigh::new(s.lambda_m).expect("positive intensity");
    let sc = Rayleigh::new(s.lambda_s).expect("positive intensity");
    DistanceTriple { x_m: m.sample(rng), x_1: sc.sample(rng), x_2: sc.sample(rng) }
}

/// Nearest MCell and the two nearest SCells of PPPs scattered over a square
/// window centred on the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PppSampler {
    half_side: f64,
    macro_count: Poisson<f64>,
    small_count: Poisson<f64>,
}

impl PppSampler {
    /// Fails if the window is small enough that the nearest MCell or the
    /// second-nearest SCell falls outside it with probability above 1e-6.
    pub fn new(params: &ValidParams) -> Result<Self> {
        let side = params.window_side_m();
        let area = side * side;
        let reach_m = Rayleigh::new(params.lambda_m())?.quantile(1.0 - 1e-6)?;
        // Pr(fewer than two points within r) = e^{-a}(1 + a), a = pi lambda r^2.
        let a = second_nearest_tail_area(1e-6);
        let reach_s = (a / (PI * params.lambda_s())).sqrt();
        let reach = reach_m.max(reach_s);
        if reach >= side / 2.0 {
            return Err(Error::Config(format!(
                "window side {side} m is too small: nearest points reach {reach:.1} m with probability 1e-6"
            )));
        }
        let poisson = |mean: f64| Poisson::new(mean).map_err(|e| Error::Config(format!("poisson mean {mean}: {e}")));
        Ok(PppSampler {
            half_side: side / 2.0,
            macro_count: poisson(params.lambda_m() * area)?,
            small_count: poisson(params.lambda_s() * area)?,
        })
    }

    /// Returns the triple with `x_1 <= x_2` and the number of degenerate
    /// draws (fewer than one MCell or two SCells) that were discarded.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (DistanceTriple, u64) {
        let mut resampled = 0;
        loop {
            let n_m = self.macro_count.sample(rng) as u64;
            let n_s = self.small_count.sample(rng) as u64;
            if n_m < 1 || n_s < 2 {
                resampled += 1;
                continue;
            }
            let x_m = (0..n_m).map(|_| self.point_distance_sq(rng)).fold(f64::INFINITY, f64::min);
            let (mut first, mut second) = (f64::INFINITY, f64::INFINITY);
            for _ in 0..n_s {
                let d = self.point_distance_sq(rng);
                if d < first {
                    second = first;
                    first = d;
                } else if d < second {
                    second = d;
                }
            }
            let t = DistanceTriple { x_m: x_m.sqrt(), x_1: first.sqrt(), x_2: second.sqrt() };
            if t.x_m > 0.0 && t.x_1 > 0.0 {
                return (t, resampled);
            }
            resampled += 1;
        }
    }

    fn point_distance_sq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = (rng.random::<f64>() * 2.0 - 1.0) * self.half_side;
        let y = (rng.random::<f64>() * 2.0 - 1.0) * self.half_side;
        x * x + y * y
    }
}

/// Solves `e^{-a}(1 + a) = p` for `a` by bisection.
fn second_nearest_tail_area(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (-mid).exp() * (1.0 + mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Per-subcase counts with confidence half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcaseFrequencies {
    pub origin: Origin,
    pub counts: [u64; 12],
    pub n: u64,
    /// Degenerate PPP draws discarded (always 0 for the model origin).
    pub resampled: u64,
}

impl SubcaseFrequencies {
    fn empty(origin: Origin) -> Self {
        SubcaseFrequencies { origin, counts: [0; 12], n: 0, resampled: 0 }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.n += other.n;
        self.resampled += other.resampled;
    }

    pub fn subcase_frequency(&self, s: Subcase) -> f64 {
        self.counts[s.index()] as f64 / self.n as f64
    }

    pub fn case_count(&self, case: u8) -> u64 {
        let i = (case as usize - 1) * 2;
        self.counts[i] + self.counts[i + 1]
    }

    pub fn case_frequency(&self, case: u8) -> f64 {
        self.case_count(case) as f64 / self.n as f64
    }

    pub fn case_frequencies(&self) -> [f64; 6] {
        std::array::from_fn(|i| self.case_frequency(i as u8 + 1))
    }

    /// Binomial standard deviation of a frequency whose true value is `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        binomial_sigma(p, self.n)
    }

    /// 99% half-width of a case frequency, from the observed frequency.
    pub fn half_width_99(&self, case: u8) -> f64 {
        Z_99 * binomial_sigma(self.case_frequency(case), self.n)
    }

    pub fn dude(&self) -> f64 {
        self.case_frequency(3) + self.case_frequency(4) + self.case_frequency(5)
    }

    pub fn dual_conn(&self) -> f64 {
        self.case_frequency(1) + self.case_frequency(2)
    }
}

/// Classifies `n` triples from the given origin and counts subcases.
pub fn estimate_subcase_frequencies(params: &ValidParams, n: u64, origin: Origin, seed: u64) -> Result<SubcaseFrequencies> {
    check_samples(n)?;
    let s = params.scenario();
    let classifier = Classifier::from_scenario(&s);
    let ppp = match origin {
        Origin::Ppp => Some(PppSampler::new(params)?),
        Origin::Model => None,
    };
    let purpose = match origin {
        Origin::Model => Purpose::ModelFrequencies,
        Origin::Ppp => Purpose::PppFrequencies,
    };
    let parts: Vec<Result<SubcaseFrequencies>> = batches(n)
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, purpose, 0, b);
            let mut part = SubcaseFrequencies::empty(origin);
            for _ in 0..size {
                let t = match &ppp {
                    Some(p) => {
                        let (t, r) = p.sample(&mut rng);
                        part.resampled += r;
                        t
                    }
                    None => sample_triple_model(&s, &mut rng),
                };
                part.counts[classifier.by_inequalities(&t)?.index()] += 1;
                part.n += 1;
            }
            Ok(part)
        })
        .collect();
    let mut total = SubcaseFrequencies::empty(origin);
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Counts of the two-cell (MCell plus nearest SCell) single-connectivity
/// association outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SingleLinkFrequencies {
    pub macro_coupled: u64,
    pub decoupled: u64,
    pub small_coupled: u64,
    pub n: u64,
}

impl SingleLinkFrequencies {
    pub fn fraction(&self, which: SingleAssociation) -> f64 {
        let c = match which {
            SingleAssociation::Macro => self.macro_coupled,
            SingleAssociation::Decoupled => self.decoupled,
            SingleAssociation::Small => self.small_coupled,
        };
        c as f64 / self.n as f64
    }

    pub fn half_width_99(&self, which: SingleAssociation) -> f64 {
        Z_99 * binomial_sigma(self.fraction(which), self.n)
    }
}

/// Classifies `n` model draws of `(x_m, x_s)` with the two-cell rule.
pub fn estimate_single_link_frequencies(s: &Scenario, n: u64, seed: u64) -> Result<SingleLinkFrequencies> {
    check_samples(n)?;
    let classifier = Classifier::from_scenario(s);
    let m = Rayleigh::new(s.lambda_m)?;
    let sc = Rayleigh::new(s.lambda_s)?;
    let parts: Vec<SingleLinkFrequencies> = batches(n)
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, Purpose::SingleLink, 0, b);
            let mut f = SingleLinkFrequencies::default();
            for _ in 0..size {
                let (x_m, x_s) = (m.sample(&mut rng), sc.sample(&mut rng));
                match classifier.single_link(x_m, x_s) {
                    SingleAssociation::Macro => f.macro_coupled += 1,
                    SingleAssociation::Decoupled => f.decoupled += 1,
                    SingleAssociation::Small => f.small_coupled += 1,
                }
                f.n += 1;
            }
            f
        })
        .collect();
    Ok(parts.iter().fold(SingleLinkFrequencies::default(), |a, b| SingleLinkFrequencies {
        macro_coupled: a.macro_coupled + b.macro_coupled,
        decoupled: a.decoupled + b.decoupled,
        small_coupled: a.small_coupled + b.small_coupled,
        n: a.n + b.n,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AgreementReport {
    pub n: u64,
    pub disagreements: u64,
    pub unclassifiable: u64,
    pub ambiguous: u64,
    pub impossible: u64,
}

impl AgreementReport {
    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.disagreements += o.disagreements;
        self.unclassifiable += o.unclassifiable;
        self.ambiguous += o.ambiguous;
        self.impossible += o.impossible;
    }

    pub fn is_clean(&self) -> bool {
        self.disagreements == 0 && self.unclassifiable == 0 && self.ambiguous == 0 && self.impossible == 0
    }
}

/// Runs both classifiers on `n` model triples and tallies every failure mode.
pub fn classifier_agreement(s: &Scenario, n: u64, seed: u64) -> AgreementReport {
    let classifier = Classifier::from_scenario(s);
    let parts: Vec<AgreementReport> = batches(n)
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, Purpose::Agreement, 0, b);
            let mut r = AgreementReport::default();
            for _ in 0..size {
                let t = sample_triple_model(s, &mut rng);
                r.n += 1;
                let a = classifier.by_inequalities(&t);
                let o = classifier.by_orderings(&t);
                for res in [&a, &o] {
                    match res {
                        Err(Error::Unclassifiable(_)) => r.unclassifiable += 1,
                        Err(Error::AmbiguousClassification { .. }) => r.ambiguous += 1,
                        Err(Error::ImpossibleAssociation(_)) => r.impossible += 1,
                        _ => {}
                    }
                }
                if a.ok() != o.ok() {
                    r.disagreements += 1;
                }
            }
            r
        })
        .collect();
    let mut total = AgreementReport::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Triples from the model that fall in `case`, with the number drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedTriples {
    pub case: u8,
    pub triples: Vec<DistanceTriple>,
    pub attempts: u64,
}

impl AcceptedTriples {
    pub fn acceptance_rate(&self) -> f64 {
        self.triples.len() as f64 / self.attempts as f64
    }

    pub fn role_distances(&self, role: Cell) -> Vec<f64> {
        self.triples.iter().map(|t| t.role_distance(role)).collect()
    }
}

fn accept_batch<R: Rng + ?Sized>(s: &Scenario, case: u8, size: u64, rng: &mut R, mut visit: impl FnMut(&DistanceTriple, &mut R)) -> Result<u64> {
    let classifier = Classifier::from_scenario(s);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < size {
        attempts += 1;
        let t = sample_triple_model(s, rng);
        if classifier.by_inequalities(&t)?.case() == case {
            accepted += 1;
            visit(&t, rng);
        }
    }
    Ok(attempts)
}

/// Rejection-samples `n` triples from `case`.
pub fn sample_case_triples(s: &Scenario, case: u8, n: u64, seed: u64) -> Result<AcceptedTriples> {
    if !(1..=6).contains(&case) {
        return Err(Error::UnknownCase(case));
    }
    if crate::association::case_probability(case, s.lambda_m, s.lambda_s, s.eta)? <= 0.0 {
        return Err(Error::EmptyRegion { case });
    }
    let parts: Vec<Result<(Vec<DistanceTriple>, u64)>> = batches(n)
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, Purpose::Conditional, case, b);
            let mut out = Vec::with_capacity(size as usize);
            let attempts = accept_batch(s, case, size, &mut rng, |t, _| out.push(*t))?;
            Ok((out, attempts))
        })
        .collect();
    let mut triples = Vec::with_capacity(n as usize);
    let mut attempts = 0;
    for p in parts {
        let (t, a) = p?;
        triples.extend(t);
        attempts += a;
    }
    Ok(AcceptedTriples { case, triples, attempts })
}

/// Where interferers may lie.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfererRegion {
    /// The whole disc of radius `R_cut` around the receiver.
    FullPlane,
    /// Only farther than the serving distance.
    Exclusion,
}

/// Interferer field truncated to a disc of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererField {
    intensity: f64,
    alpha: f64,
    radius: f64,
    region: InterfererRegion,
}

/// Default truncation: the outside tail is this fraction of the reference
/// interference level.
pub const DEFAULT_TAIL_FRACTION: f64 = 1e-3;

impl InterfererField {
    /// Field with the radius at which [`InterfererField::tail_ratio`] equals
    /// `tail_fraction`.
    pub fn new(intensity: f64, alpha: f64, tail_fraction: f64, region: InterfererRegion) -> Result<Self> {
        if !(intensity > 0.0) || !(alpha > 2.0) {
            return Err(Error::Config(format!("interferer field needs intensity > 0 and alpha > 2, got {intensity}, {alpha}")));
        }
        if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
            return Err(Error::Config(format!("tail fraction must lie in (0, 1), got {tail_fraction}")));
        }
        // 2 pi l R^(2 - a) / (a - 2) = f (pi l)^(a / 2)
        let k = tail_fraction * (alpha - 2.0) * (PI * intensity).powf(alpha / 2.0) / (2.0 * PI * intensity);
        let radius = k.powf(1.0 / (2.0 - alpha));
        Ok(InterfererField { intensity, alpha, radius, region })
    }

    /// Field with an explicit radius; rejected if the tail it drops exceeds
    /// 0.1% of the reference interference level.
    pub fn with_radius(intensity: f64, alpha: f64, radius: f64, region: InterfererRegion) -> Result<Self> {
        let f = InterfererField { intensity, alpha, radius, region };
        if !(radius > 0.0) || f.tail_ratio() > 1e-3 {
            return Err(Error::Config(format!(
                "interferer radius {radius} m drops {:.3e} of the reference interference (limit 1e-3)",
                f.tail_ratio()
            )));
        }
        Ok(f)
    }

    pub fn from_scenario(s: &Scenario, region: InterfererRegion) -> Result<Self> {
        InterfererField::new(s.interferer_intensity, s.alpha, DEFAULT_TAIL_FRACTION, region)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Expected interference from beyond the radius, per unit transmit power.
    pub fn tail_bound(&self) -> f64 {
        2.0 * PI * self.intensity * self.radius.powf(2.0 - self.alpha) / (self.alpha - 2.0)
    }

    /// Typical interference level `(pi lambda)^(alpha/2)`: the received
    /// power from an interferer at the mean nearest-neighbour scale.
    pub fn reference_level(&self) -> f64 {
        (PI * self.intensity).powf(self.alpha / 2.0)
    }

    pub fn tail_ratio(&self) -> f64 {
        self.tail_bound() / self.reference_level()
    }

    /// Sum of faded received powers per unit transmit power. With
    /// [`InterfererRegion::Exclusion`] only points beyond `serving` count.
    pub fn sample<R: Rng + ?Sized>(&self, serving: f64, rng: &mut R) -> f64 {
        let r2_max = self.radius * self.radius;
        let r2_min = match self.region {
            InterfererRegion::FullPlane => 0.0,
            InterfererRegion::Exclusion => (serving * serving).min(r2_max),
        };
        let mean = PI * self.intensity * (r2_max - r2_min);
        if mean <= 0.0 {
            return 0.0;
        }
        let count = Poisson::new(mean).expect("positive mean").sample(rng) as u64;
        let half = self.alpha / 2.0;
        let int_half = (half.fract() == 0.0 && half <= 16.0).then_some(half as i32);
        let mut total = 0.0;
        for _ in 0..count {
            let r2 = r2_min + (r2_max - r2_min) * (1.0 - rng.random::<f64>());
            let h: f64 = Exp1.sample(rng);
            let gain = match int_half {
                Some(k) => r2.powi(-k),
                None => r2.powf(-half),
            };
            total += h * gain;
        }
        total
    }
}

/// Empirical link statistics for one `(case, role)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStats {
    pub case: u8,
    pub role: Cell,
    /// `log2(1 + SIR)`, bits/s/Hz.
    pub spectral_efficiency: Moments,
    pub sir_db: Moments,
    pub distance: Moments,
}

impl LinkStats {
    fn new(case: u8, role: Cell) -> Self {
        LinkStats { case, role, spectral_efficiency: Moments::default(), sir_db: Moments::default(), distance: Moments::default() }
    }

    fn merge(&mut self, o: &Self) {
        self.spectral_efficiency.merge(&o.spectral_efficiency);
        self.sir_db.merge(&o.sir_db);
        self.distance.merge(&o.distance);
    }
}

/// Empirical SIR results for all requested roles of one case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseLinkStats {
    pub case: u8,
    pub links: Vec<LinkStats>,
    pub accepted: u64,
    pub attempts: u64,
    /// Interference per unit transmit power over all samples.
    pub interference: Moments,
    pub tail_bound: f64,
    pub radius: f64,
}

impl CaseLinkStats {
    pub fn link(&self, role: Cell) -> Option<&LinkStats> {
        self.links.iter().find(|l| l.role == role)
    }

    /// Analytic tail beyond the radius over the empirical mean interference.
    pub fn tail_to_mean(&self) -> f64 {
        self.tail_bound / self.interference.mean()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.attempts as f64
    }
}

/// Rejection-samples `n` triples in `case` and, for each, draws one
/// interferer field per link and unit-mean exponential fading on the
/// serving link. In the full-plane region one field is shared by all roles
/// of a sample. Transmit power is common to signal and interference and is
/// left out.
pub fn empirical_case_links(
    s: &Scenario,
    case: u8,
    roles: &[Cell],
    n: u64,
    seed: u64,
    field: &InterfererField,
) -> Result<CaseLinkStats> {
    check_samples(n)?;
    for &role in roles {
        ConditionalDistance::new(case, role, s)?;
    }
    let half = s.alpha / 2.0;
    type Part = (Vec<LinkStats>, Moments, u64);
    let parts: Vec<Result<Part>> = batches(n)
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, Purpose::Links, case, b);
            let mut links: Vec<LinkStats> = roles.iter().map(|&r| LinkStats::new(case, r)).collect();
            let mut interference = Moments::default();
            let attempts = accept_batch(s, case, size, &mut rng, |t, rng| {
                let shared = match field.region {
                    InterfererRegion::FullPlane => {
                        let i = field.sample(0.0, rng);
                        interference.push(i);
                        Some(i)
                    }
                    InterfererRegion::Exclusion => None,
                };
                for link in links.iter_mut() {
                    let x = t.role_distance(link.role);
                    let i = shared.unwrap_or_else(|| {
                        let i = field.sample(x, rng);
                        interference.push(i);
                        i
                    });
                    let h: f64 = Exp1.sample(rng);
                    let signal = h * (x * x).powf(-half);
                    let sir = signal / i;
                    link.spectral_efficiency.push(sir.ln_1p() / std::f64::consts::LN_2);
                    link.sir_db.push(10.0 * sir.log10());
                    link.distance.push(x);
                }
            })?;
            Ok((links, interference, attempts))
        })
        .collect();

    let mut links: Vec<LinkStats> = roles.iter().map(|&r| LinkStats::new(case, r)).collect();
    let mut interference = Moments::default();
    let mut attempts = 0;
    for p in parts {
        let (l, i, a) = p?;
        for (dst, src) in links.iter_mut().zip(&l) {
            dst.merge(src);
        }
        interference.merge(&i);
        attempts += a;
    }
    let out = CaseLinkStats {
        case,
        links,
        accepted: n,
        attempts,
        interference,
        tail_bound: field.tail_bound(),
        radius: field.radius(),
    };
    if out.tail_to_mean() > 1e-3 {
        return Err(Error::Config(format!(
            "interferer radius {:.1} m drops {:.3e} of the mean interference (limit 1e-3)",
            field.radius(),
            out.tail_to_mean()
        )));
    }
    Ok(out)
}

/// Single-role convenience wrapper over [`empirical_case_links`] with the
/// default full-plane field.
pub fn empirical_sir_capacity(case: u8, role: Cell, params: &ValidParams, n: u64, seed: u64) -> Result<LinkStats> {
    let s = params.scenario();
    let field = InterfererField::from_scenario(&s, InterfererRegion::FullPlane)?;
    Ok(empirical_case_links(&s, case, &[role], n, seed, &field)?.links[0])
}

/// Comparison of PPP-derived triples with the independent-Rayleigh model.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub model: SubcaseFrequencies,
    pub ppp: SubcaseFrequencies,
    /// Total-variation distance between the six case frequencies.
    pub case_tv: f64,
    pub ks_samples: u64,
    /// KS statistic of the PPP nearest-MCell distance against Rayleigh(lambda_m).
    pub ks_macro: f64,
    /// KS statistic of the PPP nearest-SCell distance against Rayleigh(lambda_s).
    pub ks_small: f64,
    /// Critical value at significance 0.01.
    pub ks_critical: f64,
}

impl ApproximationReport {
    pub fn marginals_pass(&self) -> bool {
        self.ks_macro < self.ks_critical && self.ks_small < self.ks_critical
    }
}

/// PPP samples are ordered (`x_1 <= x_2`) while model samples are not, so
/// they are compared at the case level where the mirror subcases merge.
pub fn ppp_vs_model(params: &ValidParams, n: u64, ks_samples: u64, seed: u64) -> Result<ApproximationReport> {
    let model = estimate_subcase_frequencies(params, n, Origin::Model, seed)?;
    let ppp = estimate_subcase_frequencies(params, n, Origin::Ppp, seed)?;
    let case_tv = total_variation(&model.case_frequencies(), &ppp.case_frequencies());

    let sampler = PppSampler::new(params)?;
    let parts: Vec<(Vec<f64>, Vec<f64>)> = batches(ks_samples)
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, Purpose::PppMarginals, 0, b);
            (0..size)
                .map(|_| {
                    let (t, _) = sampler.sample(&mut rng);
                    (t.x_m, t.x_1)
                })
                .unzip()
        })
        .collect();
    let (mut xm, mut x1): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for (a, b) in parts {
        xm.extend(a);
        x1.extend(b);
    }
    let rm = Rayleigh::new(params.lambda_m())?;
    let rs = Rayleigh::new(params.lambda_s())?;
    let ks_macro = ks_statistic(&mut xm, |x| rm.cdf(x).unwrap_or(0.0));
    let ks_small = ks_statistic(&mut x1, |x| rs.cdf(x).unwrap_or(0.0));
    Ok(ApproximationReport {
        model,
        ppp,
        case_tv,
        ks_samples,
        ks_macro,
        ks_small,
        ks_critical: ks_coefficient(0.01) / (ks_samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NetworkParams;

    fn params(ratio: f64) -> ValidParams {
        NetworkParams::reference(ratio).validate().unwrap()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map({
            let mut r = RandomStream::new(9, 1).rng();
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = RandomStream::new(9, 1).rng();
            move |_| r.random()
        }).collect();
        let c: u64 = RandomStream::new(9, 2).rng().random();
        assert_eq!(a, b);
        assert_ne!(a[0], c);
    }

    #[test]
    fn model_triple_is_deterministic() {
        let s = params(5.0).scenario();
        let t1 = sample_triple_model(&s, &mut RandomStream::new(3, 0).rng());
        let t2 = sample_triple_model(&s, &mut RandomStream::new(3, 0).rng());
        assert_eq!(t1, t2);
    }

    #[test]
    fn batching_covers_exactly() {
        let b = batches(3 * BATCH + 5);
        assert_eq!(b.len(), 4);
        assert_eq!(b.iter().map(|x| x.1).sum::<u64>(), 3 * BATCH + 5);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(matches!(estimate_subcase_frequencies(&params(5.0), 10, Origin::Model, 1), Err(Error::Config(_))));
    }

    #[test]
    fn frequencies_are_deterministic() {
        let p = params(5.0);
        let a = estimate_subcase_frequencies(&p, 20_000, Origin::Model, 11).unwrap();
        let b = estimate_subcase_frequencies(&p, 20_000, Origin::Model, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), a.n);
    }

    #[test]
    fn second_nearest_area_solves_tail() {
        let a = second_nearest_tail_area(1e-6);
        assert!(((-a).exp() * (1.0 + a) - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn small_window_rejected() {
        let mut raw = NetworkParams::reference(5.0);
        raw.window_side_m = 500.0;
        assert!(matches!(PppSampler::new(&raw.validate().unwrap()), Err(Error::Config(_))));
    }

    #[test]
    fn ppp_triples_are_ordered() {
        let sampler = PppSampler::new(&params(5.0)).unwrap();
        let mut rng = RandomStream::new(5, 0).rng();
        for _ in 0..200 {
            let (t, _) = sampler.sample(&mut rng);
            assert!(t.x_1 <= t.x_2);
        }
    }

    #[test]
    fn default_radius_meets_tail_fraction() {
        let f = InterfererField::new(8.82e-5, 4.0, 1e-3, InterfererRegion::FullPlane).unwrap();
        assert!((f.tail_ratio() - 1e-3).abs() < 1e-12);
        let g = InterfererField::new(8.82e-5, 3.5, 1e-3, InterfererRegion::FullPlane).unwrap();
        assert!((g.tail_ratio() - 1e-3).abs() < 1e-12);
        assert!(InterfererField::with_radius(8.82e-5, 4.0, 100.0, InterfererRegion::FullPlane).is_err());
    }

    #[test]
    fn single_link_frequencies_match_closed_form() {
        let s = params(3.0).scenario();
        let f = estimate_single_link_frequencies(&s, 200_000, 4).unwrap();
        let p = crate::association::single_connectivity_probabilities(s.lambda_m, s.lambda_s, s.eta).unwrap();
        assert_eq!(f.macro_coupled + f.decoupled + f.small_coupled, f.n);
        let d = f.fraction(SingleAssociation::Decoupled);
        assert!((d - p.decoupled).abs() < 3.0 * binomial_sigma(p.decoupled, f.n));
    }

    #[test]
    fn more_interferers_lower_sir() {
        let s = params(5.0).scenario();
        let roles = [Cell::SCell1];
        let f1 = InterfererField::new(s.interferer_intensity, s.alpha, 1e-3, InterfererRegion::FullPlane).unwrap();
        let f2 = InterfererField::new(2.0 * s.interferer_intensity, s.alpha, 1e-3, InterfererRegion::FullPlane).unwrap();
        let a = empirical_case_links(&s, 4, &roles, 10_000, 2, &f1).unwrap();
        let b = empirical_case_links(&s, 4, &roles, 10_000, 2, &f2).unwrap();
        assert!(b.links[0].sir_db.mean() < a.links[0].sir_db.mean());
    }
}
