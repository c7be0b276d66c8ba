//! Reward environments with exactly known ground truth.
//!
//! An [`Instance`] pairs a hypothesis class and a designated true function
//! with one [`RewardDistribution`] per action whose mean is that function's
//! value. All moments are computed in closed form from the finite support, so
//! regret and variance oracles are exact.

use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hypothesis::HypothesisClass;
use crate::rng::{self, Domain};

const PROB_SLACK: f64 = 1e-12;

/// Shape of a reward distribution before its additive shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardKind {
    Deterministic(f64),
    ThreePoint { values: [f64; 3], probs: [f64; 3] },
    /// `scale` with probability `p`, else 0.
    BernoulliScaled { p: f64, scale: f64 },
}

/// A finitely supported reward distribution with cached moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardDistribution {
    kind: RewardKind,
    shift: f64,
    mean: f64,
    variance: f64,
    variance_of_square: f64,
}

impl RewardDistribution {
    pub fn deterministic(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid(format!("non-finite reward {value}")));
        }
        Ok(Self::build(RewardKind::Deterministic(value), 0.0))
    }

    pub fn three_point(values: [f64; 3], probs: [f64; 3]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("three-point support must be finite"));
        }
        if probs.iter().any(|p| !(*p >= 0.0 && *p <= 1.0)) {
            return Err(Error::invalid(format!("probabilities must lie in [0,1], got {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SLACK {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::build(RewardKind::ThreePoint { values, probs }, 0.0))
    }

    pub fn bernoulli_scaled(p: f64, scale: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("bernoulli p must lie in [0,1], got {p}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!("bernoulli scale must be > 0, got {scale}")));
        }
        Ok(Self::build(RewardKind::BernoulliScaled { p, scale }, 0.0))
    }

    /// The same distribution translated by `c`.
    pub fn shifted(self, c: f64) -> Self {
        Self::build(self.kind, self.shift + c)
    }

    /// The same distribution translated to have mean `m`.
    pub fn recentered(self, m: f64) -> Self {
        Self::build(self.kind, self.shift + (m - self.mean))
    }

    fn build(kind: RewardKind, shift: f64) -> Self {
        let mut d = Self { kind, shift, mean: 0.0, variance: 0.0, variance_of_square: 0.0 };
        let support = d.support();
        let mean: f64 = support.iter().map(|(v, p)| p * v).sum();
        let var: f64 = support.iter().map(|(v, p)| p * (v - mean).powi(2)).sum();
        let m4: f64 = support.iter().map(|(v, p)| p * (v - mean).powi(4)).sum();
        d.mean = match kind {
            RewardKind::Deterministic(v) => v + shift,
            _ => mean,
        };
        d.variance = var;
        d.variance_of_square = (m4 - var * var).max(0.0);
        d
    }

    /// `(value, probability)` pairs, zero-probability atoms included.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let s = self.shift;
        match self.kind {
            RewardKind::Deterministic(v) => vec![(v + s, 1.0)],
            RewardKind::ThreePoint { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| (v + s, p)).collect()
            }
            RewardKind::BernoulliScaled { p, scale } => vec![(s, 1.0 - p), (scale + s, p)],
        }
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `Var[η²]` for the centered noise `η = y − mean`.
    pub fn variance_of_square(&self) -> f64 {
        self.variance_of_square
    }

    /// Largest `|y − mean|` over atoms with positive probability.
    pub fn noise_extent(&self) -> f64 {
        self.support()
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(v, _)| (v - self.mean).abs())
            .fold(0.0, f64::max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            RewardKind::Deterministic(v) => v + self.shift,
            RewardKind::ThreePoint { values, probs } => {
                let u: f64 = rng.gen();
                let v = if u < probs[0] {
                    values[0]
                } else if u < probs[0] + probs[1] {
                    values[1]
                } else {
                    values[2]
                };
                v + self.shift
            }
            RewardKind::BernoulliScaled { p, scale } => {
                let u: f64 = rng.gen();
                if u < p {
                    scale + self.shift
                } else {
                    self.shift
                }
            }
        }
    }
}

/// Three-point shape on `{2σ, 2σR, 0}` with probabilities
/// `((σ+s)/(2σ), (σ+s)/(2σR²), rest)`, where `s = ±ε` selects the variant.
pub fn lower_bound_arm(sigma: f64, signed_epsilon: f64, r: f64) -> Result<RewardDistribution> {
    let m = sigma + signed_epsilon;
    let p1 = m / (2.0 * sigma);
    let p2 = m / (2.0 * sigma * r * r);
    RewardDistribution::three_point([2.0 * sigma, 2.0 * sigma * r, 0.0], [p1, p2, 1.0 - p1 - p2])
}

/// Centered heavy-tailed noise with standard deviation `sigma`: the
/// `ε = 0` lower-bound shape rescaled to unit variance per `σ`, then centered.
/// Its largest atom sits near `1.15·σ·R` above the mean and has probability
/// `1/(2R²)`.
pub fn heavy_noise(sigma: f64, r: f64) -> Result<RewardDistribution> {
    if !(sigma > 0.0 && r > 3f64.sqrt()) {
        return Err(Error::invalid(format!("heavy noise needs sigma > 0 and R > sqrt(3), got {sigma}, {r}")));
    }
    let k = 1.0 / (4.0 - (1.0 + 1.0 / r).powi(2)).sqrt();
    let p1 = 0.5;
    let p2 = 1.0 / (2.0 * r * r);
    let base = RewardDistribution::three_point(
        [2.0 * sigma * k, 2.0 * sigma * r * k, 0.0],
        [p1, p2, 1.0 - p1 - p2],
    )?;
    Ok(base.recentered(0.0))
}

/// Zero-mean scaled Bernoulli noise `R(B − p)` whose variance is `σ²`.
pub fn bernoulli_noise(sigma: f64, r: f64) -> Result<RewardDistribution> {
    if !(sigma > 0.0 && 2.0 * sigma <= r) {
        return Err(Error::invalid(format!("bernoulli noise needs 0 < 2σ ≤ R, got σ={sigma}, R={r}")));
    }
    let p = 0.5 * (1.0 - (1.0 - 4.0 * sigma * sigma / (r * r)).sqrt());
    Ok(RewardDistribution::bernoulli_scaled(p, r)?.recentered(0.0))
}

/// Which decision set the learner faces each round.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextSchedule {
    /// Every action, every round.
    Full,
    /// The same subset every round.
    Fixed(Vec<usize>),
    /// A sliding window of `k` consecutive actions (mod M) advancing by `k`
    /// each round.
    RoundRobinSubsets(usize),
    /// A uniformly random `k`-subset per round, drawn from the run's context
    /// stream.
    SeededRandomSubsets(usize),
}

/// Lower-bound construction variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plus,
    Minus,
}

/// A contextual bandit environment with a realizable true function.
#[derive(Debug, Clone)]
pub struct Instance {
    class: Arc<HypothesisClass>,
    true_function: usize,
    distributions: Vec<RewardDistribution>,
    noise_range: f64,
    sigma_eta: f64,
    c_eta: f64,
    schedule: ContextSchedule,
}

impl Instance {
    /// Validates realizability, the noise range and the schedule, then
    /// computes `σ_η` and `c_η` from the distributions.
    pub fn new(
        class: Arc<HypothesisClass>,
        true_function: usize,
        distributions: Vec<RewardDistribution>,
        noise_range: f64,
        schedule: ContextSchedule,
    ) -> Result<Self> {
        if true_function >= class.n_functions() {
            return Err(Error::invalid(format!("true function {true_function} not in class")));
        }
        if distributions.len() != class.n_actions() {
            return Err(Error::invalid(format!(
                "{} distributions for {} actions",
                distributions.len(),
                class.n_actions()
            )));
        }
        if !(noise_range.is_finite() && noise_range > 0.0) {
            return Err(Error::invalid(format!("noise range must be > 0, got {noise_range}")));
        }
        for (x, d) in distributions.iter().enumerate() {
            let target = class.value(true_function, x);
            if (d.mean() - target).abs() > 1e-12 * target.abs().max(1.0) {
                return Err(Error::invalid(format!(
                    "action {x}: distribution mean {} differs from f*(x) = {target}",
                    d.mean()
                )));
            }
            if d.noise_extent() > noise_range * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "action {x}: noise extent {} exceeds range {noise_range}",
                    d.noise_extent()
                )));
            }
        }
        let m = class.n_actions();
        match &schedule {
            ContextSchedule::Full => {}
            ContextSchedule::Fixed(set) => {
                if set.is_empty() || set.iter().any(|&x| x >= m) {
                    return Err(Error::invalid("fixed context set must be a nonempty subset of the actions"));
                }
            }
            ContextSchedule::RoundRobinSubsets(k) | ContextSchedule::SeededRandomSubsets(k) => {
                if *k == 0 || *k > m {
                    return Err(Error::invalid(format!("subset size {k} must lie in [1, {m}]")));
                }
            }
        }
        let sigma_eta = distributions.iter().map(|d| d.variance()).fold(0.0, f64::max).sqrt();
        let c_eta = distributions
            .iter()
            .filter(|d| d.variance() > 0.0)
            .map(|d| d.variance_of_square() / d.variance())
            .fold(0.0, f64::max);
        Ok(Self { class, true_function, distributions, noise_range, sigma_eta, c_eta, schedule })
    }

    /// Overrides `c_η` with a larger asserted value.
    pub fn with_c_eta(mut self, c_eta: f64) -> Result<Self> {
        if !(c_eta.is_finite() && c_eta >= self.c_eta) {
            return Err(Error::invalid(format!(
                "asserted c_eta {c_eta} is below the realized ratio {}",
                self.c_eta
            )));
        }
        self.c_eta = c_eta;
        Ok(self)
    }

    pub fn class(&self) -> &Arc<HypothesisClass> {
        &self.class
    }

    pub fn true_function(&self) -> usize {
        self.true_function
    }

    pub fn distribution(&self, x: usize) -> Result<&RewardDistribution> {
        self.distributions
            .get(x)
            .ok_or(Error::UnknownAction { action: x, universe: self.distributions.len() })
    }

    pub fn noise_range(&self) -> f64 {
        self.noise_range
    }

    /// `max_x sqrt(Var[y|x])`.
    pub fn sigma_eta(&self) -> f64 {
        self.sigma_eta
    }

    /// `max_x Var[η²|x] / Var[η|x]` over actions with positive variance.
    pub fn c_eta(&self) -> f64 {
        self.c_eta
    }

    pub fn schedule(&self) -> &ContextSchedule {
        &self.schedule
    }

    /// Decision set for `round` (1-based) of the run seeded with `seed`.
    pub fn context(&self, seed: u64, round: usize) -> Vec<usize> {
        let m = self.class.n_actions();
        match &self.schedule {
            ContextSchedule::Full => (0..m).collect(),
            ContextSchedule::Fixed(set) => set.clone(),
            ContextSchedule::RoundRobinSubsets(k) => {
                let start = (round.saturating_sub(1) * k) % m;
                let mut set: Vec<usize> = (0..*k).map(|j| (start + j) % m).collect();
                set.sort_unstable();
                set
            }
            ContextSchedule::SeededRandomSubsets(k) => {
                let mut r = rng::stream(seed, Domain::Context, round as u64);
                let mut set = sample_indices(&mut r, m, *k).into_vec();
                set.sort_unstable();
                set
            }
        }
    }

    /// Draws a reward for `x` from a caller-owned generator.
    pub fn sample_reward<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<f64> {
        Ok(self.distribution(x)?.sample(rng))
    }

    /// The reward for `x` at `round` of run `seed`; independent of any other
    /// draw.
    pub fn reward(&self, seed: u64, round: usize, x: usize) -> Result<f64> {
        let mut r = rng::stream(seed, Domain::Reward, round as u64);
        self.sample_reward(x, &mut r)
    }

    pub fn mean_reward(&self, x: usize) -> Result<f64> {
        self.class.check_action(x)?;
        Ok(self.class.value(self.true_function, x))
    }

    /// `max_{x ∈ context} f*(x) − f*(chosen)`.
    pub fn instant_regret(&self, context: &[usize], chosen: usize) -> Result<f64> {
        if !context.contains(&chosen) {
            return Err(Error::invalid(format!("action {chosen} is not in the decision set")));
        }
        let best = context
            .iter()
            .map(|&x| self.mean_reward(x))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((best - self.mean_reward(chosen)?).max(0.0))
    }

    /// Exact `Var[y|x]`.
    pub fn variance_oracle(&self, x: usize) -> Result<f64> {
        Ok(self.distribution(x)?.variance())
    }
}

/// The two-armed instance used for variance-dependent lower bounds.
///
/// Arm 0 pays `σ(1 + 1/R)` deterministically; arm 1 is three-point on
/// `{2σ, 2σR, 0}` with mean `(σ ± ε)(1 + 1/R)`. The class holds both
/// variants' mean vectors, `+` first.
pub fn make_lower_bound_instance(sigma: f64, epsilon: f64, r: f64, variant: Variant) -> Result<Instance> {
    if !(sigma > 0.0 && sigma <= 0.5) {
        return Err(Error::invalid(format!("sigma must lie in (0, 1/2], got {sigma}")));
    }
    if !(epsilon >= 0.0 && epsilon <= sigma / 2.0) {
        return Err(Error::invalid(format!("epsilon must lie in [0, sigma/2], got {epsilon}")));
    }
    if !(r > 3f64.sqrt() && r.is_finite()) {
        return Err(Error::invalid(format!("R must exceed sqrt(3), got {r}")));
    }
    let g = 1.0 + 1.0 / r;
    let base = sigma * g;
    let plus = lower_bound_arm(sigma, epsilon, r)?;
    let minus = lower_bound_arm(sigma, -epsilon, r)?;
    let rows = vec![vec![base, plus.mean()], vec![base, minus.mean()]];
    let lf = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let class = Arc::new(HypothesisClass::new(rows, lf)?.with_labels(vec!["sure".into(), "risky".into()])?);
    let (truth, arm) = match variant {
        Variant::Plus => (0, plus),
        Variant::Minus => (1, minus),
    };
    Instance::new(
        class,
        truth,
        vec![RewardDistribution::deterministic(base)?, arm],
        2.0 * sigma * r,
        ContextSchedule::Full,
    )
}

/// `ε = sqrt(σ² / (4(1 + R⁻²)T))`, the gap that makes the two variants
/// statistically indistinguishable over `T` rounds.
pub fn lower_bound_epsilon(sigma: f64, r: f64, horizon: usize) -> f64 {
    (sigma * sigma / (4.0 * (1.0 + 1.0 / (r * r)) * horizon as f64)).sqrt()
}

/// Closed-form variance of the risky arm: `(σ ± ε)(4σ − (1+R⁻¹)²(σ ± ε))`.
pub fn lower_bound_arm_variance(sigma: f64, epsilon: f64, r: f64, variant: Variant) -> f64 {
    let m = match variant {
        Variant::Plus => sigma + epsilon,
        Variant::Minus => sigma - epsilon,
    };
    let g = 1.0 + 1.0 / r;
    m * (4.0 * sigma - g * g * m)
}

/// Adds the same zero-mean noise to every action of `class` around row
/// `truth`.
pub fn with_noise(
    class: Arc<HypothesisClass>,
    truth: usize,
    noise: RewardDistribution,
    noise_range: f64,
    schedule: ContextSchedule,
) -> Result<Instance> {
    if truth >= class.n_functions() {
        return Err(Error::invalid(format!("true function {truth} not in class")));
    }
    let dists = (0..class.n_actions()).map(|x| noise.recentered(class.value(truth, x))).collect();
    Instance::new(class, truth, dists, noise_range, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lower_bound_means_and_variances() {
        let (s, e, r) = (0.3, 0.1, 10.0);
        let g = 1.0 + 1.0 / r;
        for variant in [Variant::Plus, Variant::Minus] {
            let inst = make_lower_bound_instance(s, e, r, variant).unwrap();
            assert_relative_eq!(inst.mean_reward(0).unwrap(), s * g, epsilon = 1e-15);
            assert_eq!(inst.variance_oracle(0).unwrap(), 0.0);
            let want = match variant {
                Variant::Plus => (s + e) * g,
                Variant::Minus => (s - e) * g,
            };
            assert_relative_eq!(inst.mean_reward(1).unwrap(), want, epsilon = 1e-14);
            assert_relative_eq!(
                inst.variance_oracle(1).unwrap(),
                lower_bound_arm_variance(s, e, r, variant),
                epsilon = 1e-12
            );
            let probs: f64 = inst.distribution(1).unwrap().support().iter().map(|(_, p)| p).sum();
            assert_relative_eq!(probs, 1.0, epsilon = 1e-15);
        }
        assert!(lower_bound_arm_variance(s, e, r, Variant::Plus) <= 6.0 * s * s);
        // The minus arm peaks at 4σ²/(1+1/R)² and only drops below 2σ² once ε is
        // a sizable fraction of σ.
        let minus = lower_bound_arm_variance(s, e, r, Variant::Minus);
        assert!(minus <= 4.0 * s * s / (g * g));
        assert!(minus > 2.0 * s * s);
        assert!(lower_bound_arm_variance(s, 0.25, r, Variant::Minus) <= 2.0 * s * s);
    }

    #[test]
    fn lower_bound_regret() {
        let (s, e, r) = (0.4, 0.2, 5.0);
        let inst = make_lower_bound_instance(s, e, r, Variant::Plus).unwrap();
        assert_relative_eq!(inst.instant_regret(&[0, 1], 0).unwrap(), e * (1.0 + 1.0 / r), epsilon = 1e-14);
        assert_eq!(inst.instant_regret(&[0, 1], 1).unwrap(), 0.0);
        assert_eq!(inst.instant_regret(&[0], 0).unwrap(), 0.0);
        assert!(inst.instant_regret(&[0], 1).is_err());
    }

    #[test]
    fn lower_bound_parameter_ranges() {
        assert!(make_lower_bound_instance(0.6, 0.1, 10.0, Variant::Plus).is_err());
        assert!(make_lower_bound_instance(0.3, 0.2, 10.0, Variant::Plus).is_err());
        assert!(make_lower_bound_instance(0.3, 0.1, 1.5, Variant::Plus).is_err());
        let eps = lower_bound_epsilon(0.5, 100.0, 1000);
        assert!(make_lower_bound_instance(0.5, eps, 100.0, Variant::Minus).is_ok());
    }

    #[test]
    fn bernoulli_moments() {
        let d = RewardDistribution::bernoulli_scaled(0.3, 10.0).unwrap();
        assert_relative_eq!(d.mean(), 3.0, epsilon = 1e-14);
        assert_relative_eq!(d.variance(), 100.0 * 0.3 * 0.7, epsilon = 1e-12);
        let z = RewardDistribution::bernoulli_scaled(0.0, 10.0).unwrap();
        let mut r = rng::stream(1, Domain::Reward, 0);
        assert!((0..100).all(|_| z.sample(&mut r) == 0.0));
        let n = bernoulli_noise(0.1, 100.0).unwrap();
        assert_relative_eq!(n.variance(), 0.01, epsilon = 1e-12);
        assert!(n.mean().abs() < 1e-15);
    }

    #[test]
    fn heavy_noise_has_requested_scale() {
        let n = heavy_noise(0.5, 100.0).unwrap();
        assert!(n.mean().abs() < 1e-14);
        assert_relative_eq!(n.variance(), 0.25, epsilon = 1e-12);
        assert!(n.noise_extent() <= 100.0);
    }

    #[test]
    fn deterministic_sampling() {
        let d = RewardDistribution::deterministic(1.5).unwrap();
        let mut r = rng::stream(3, Domain::Reward, 9);
        assert!((0..10).all(|_| d.sample(&mut r) == 1.5));
        assert_eq!(d.variance(), 0.0);
    }

    #[test]
    fn realizability_and_c_eta_checks() {
        let class = Arc::new(HypothesisClass::new(vec![vec![0.2, 0.8]], 1.0).unwrap());
        let wrong = vec![RewardDistribution::deterministic(0.2).unwrap(), RewardDistribution::deterministic(0.7).unwrap()];
        assert!(Instance::new(class.clone(), 0, wrong, 1.0, ContextSchedule::Full).is_err());
        let inst = with_noise(class, 0, heavy_noise(0.1, 10.0).unwrap(), 10.0, ContextSchedule::Full).unwrap();
        assert!(inst.c_eta() > 0.0);
        assert!(inst.clone().with_c_eta(inst.c_eta() * 0.5).is_err());
        assert!(inst.clone().with_c_eta(inst.c_eta() * 2.0).is_ok());
    }

    #[test]
    fn schedules() {
        let class = Arc::new(HypothesisClass::new(vec![vec![0.0; 5]], 1.0).unwrap());
        let dists = vec![RewardDistribution::deterministic(0.0).unwrap(); 5];
        let rr = Instance::new(class.clone(), 0, dists.clone(), 1.0, ContextSchedule::RoundRobinSubsets(2)).unwrap();
        assert_eq!(rr.context(0, 1), vec![0, 1]);
        assert_eq!(rr.context(0, 2), vec![2, 3]);
        assert_eq!(rr.context(0, 3), vec![0, 4]);
        let sr = Instance::new(class.clone(), 0, dists.clone(), 1.0, ContextSchedule::SeededRandomSubsets(3)).unwrap();
        assert_eq!(sr.context(11, 4), sr.context(11, 4));
        assert_eq!(sr.context(11, 4).len(), 3);
        assert!(Instance::new(class, 0, dists, 1.0, ContextSchedule::Fixed(vec![7])).is_err());
    }
}
