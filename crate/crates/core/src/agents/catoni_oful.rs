use std::sync::Arc;

use super::saddle::{self, LossContext, PairStats, WeightedHistory};
use super::{check_context, log_at_least_one, optimistic_argmax, Agent, AgentConfig, Decision, Diagnostics, ProblemInfo};
use crate::error::{Error, Result};
use crate::hypothesis::{eluder_coefficient_over, refit_version_space, HypothesisClass, PairAccumulator, VersionSpace};

/// Optimistic agent with known per-round variances and a Catoni-robust
/// saddle-point estimator. Confidence sets are nested across rounds.
#[derive(Debug, Clone)]
pub struct CatoniOful {
    class: Arc<HypothesisClass>,
    config: AgentConfig,
    acc: PairAccumulator,
    history: WeightedHistory,
    space: VersionSpace,
    iota_raw: f64,
    beta_hat: f64,
    last: Diagnostics,
}

impl CatoniOful {
    pub fn new(class: Arc<HypothesisClass>, config: AgentConfig, info: ProblemInfo) -> Result<Self> {
        config.validate()?;
        info.validate()?;
        let n = class.n_functions() as f64;
        let t = info.horizon as f64;
        let r = info.noise_range;
        let lf = class.range_bound();
        let iota_raw = log_at_least_one(720.0 * r * r * lf.powi(3) * n * n * t.powi(5) / config.delta).sqrt();
        let beta_hat = config.constant_scale * log_at_least_one(r * lf * n * t / config.delta).sqrt();
        Ok(Self {
            acc: PairAccumulator::for_class(&class),
            space: VersionSpace::full(class.n_functions(), 0),
            class,
            config,
            history: WeightedHistory::default(),
            iota_raw,
            beta_hat,
            last: Diagnostics::default(),
        })
    }

    /// The log factor `ι(δ)` after scaling.
    pub fn iota(&self) -> f64 {
        self.config.constant_scale * self.iota_raw
    }

    /// The confidence radius `β̂`; constant across rounds.
    pub fn beta_hat(&self) -> f64 {
        self.beta_hat
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.space
    }

    pub fn history(&self) -> &WeightedHistory {
        &self.history
    }

    pub fn accumulator(&self) -> &PairAccumulator {
        &self.acc
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    /// `σ̄ = max(α, σ_t, sqrt(4 ι L_f D))` with `D` the unit-weight eluder
    /// coefficient of `x` over the current version space.
    pub fn weight(&self, x: usize, sigma_t: f64) -> Result<f64> {
        let d = eluder_coefficient_over(&self.class, &self.acc, &self.space.members(), x, 1.0, self.config.lambda)?;
        let uncertainty = (4.0 * self.iota() * self.class.range_bound() * d).sqrt();
        Ok(self.config.alpha.max(sigma_t).max(uncertainty))
    }

    /// `θ(f,f') = 2ι / sqrt(V(1 + sqrt(β̂² + λ)/(2ι)) + ε²)`.
    pub fn theta(&self, stats: PairStats) -> f64 {
        let iota = self.iota();
        let inflate = 1.0 + (self.beta_hat * self.beta_hat + self.config.lambda).sqrt() / (2.0 * iota);
        2.0 * iota / (stats.distance * inflate + self.config.epsilon_offset.powi(2)).sqrt()
    }

    fn context(&self) -> LossContext<'_> {
        LossContext {
            class: &self.class,
            acc: &self.acc,
            history: &self.history,
            tolerance: self.config.catoni_tolerance,
        }
    }

    /// Robust excess loss of `f` over `g` on the current history.
    pub fn excess_loss(&self, f: usize, g: usize) -> Result<f64> {
        let theta = |s: PairStats| self.theta(s);
        saddle::excess_loss(&self.context(), f, g, &theta, &mut Vec::new())
    }

    /// Saddle-point estimator over the current version space.
    pub fn fit(&self) -> Result<usize> {
        let theta = |s: PairStats| self.theta(s);
        saddle::minmax(&self.context(), &self.space.members(), self.space.estimator(), &theta)
    }
}

impl Agent for CatoniOful {
    fn name(&self) -> &str {
        "catoni-oful"
    }

    fn needs_variance(&self) -> bool {
        true
    }

    fn select(&mut self, context: &[usize]) -> Result<Decision> {
        check_context(&self.class, context)?;
        let (x, _) = optimistic_argmax(&self.class, &self.space.members(), context);
        Ok(Decision::optimistic(x))
    }

    fn observe(&mut self, decision: &Decision, reward: f64, noise_std: Option<f64>) -> Result<()> {
        let sigma_t = noise_std.ok_or_else(|| Error::invalid("catoni-oful needs the reward standard deviation"))?;
        let x = decision.action;
        let w = self.weight(x, sigma_t)?;
        self.acc.update(&self.class, x, w)?;
        self.history.push(x, reward, w);
        let estimator = if self.config.refit_cadence.due(self.history.len()) {
            self.fit()?
        } else {
            self.space.estimator()
        };
        self.space = refit_version_space(&self.acc, self.space.mask(), estimator, self.beta_hat * self.beta_hat)?;
        self.last = Diagnostics {
            weight: Some(w),
            level: None,
            active_size: Some(self.space.size()),
            beta_hat: Some(self.beta_hat),
        };
        Ok(())
    }

    fn diagnostics(&self) -> Diagnostics {
        self.last
    }

    fn contains(&self, f: usize) -> bool {
        self.space.contains(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> ProblemInfo {
        ProblemInfo { horizon: 100, noise_range: 1.0, sigma_eta: 0.0, c_eta: 0.0 }
    }

    #[test]
    fn optimistic_selection() {
        let class = Arc::new(HypothesisClass::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 1.0).unwrap());
        let mut agent = CatoniOful::new(class, AgentConfig::default(), info()).unwrap();
        assert_eq!(agent.select(&[0, 1]).unwrap().action, 0);
        assert_eq!(agent.select(&[1]).unwrap().action, 1);
    }

    #[test]
    fn weight_examples() {
        let class = Arc::new(HypothesisClass::new(vec![vec![0.0], vec![1.0]], 1.0).unwrap());
        let agent = CatoniOful::new(class, AgentConfig { alpha: 0.01, ..AgentConfig::default() }, info()).unwrap();
        let c = 1.0 / agent.iota_raw;
        let agent = CatoniOful { config: AgentConfig { constant_scale: c, ..agent.config }, ..agent };
        assert!((agent.iota() - 1.0).abs() < 1e-12);
        assert!((agent.weight(0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(agent.weight(0, 50.0).unwrap(), 50.0);

        let single = Arc::new(HypothesisClass::new(vec![vec![0.3]], 1.0).unwrap());
        let agent = CatoniOful::new(single, AgentConfig { alpha: 0.01, ..AgentConfig::default() }, info()).unwrap();
        assert_eq!(agent.weight(0, 0.0).unwrap(), 0.01);
    }

    #[test]
    fn requires_variance() {
        let class = Arc::new(HypothesisClass::new(vec![vec![0.0], vec![1.0]], 1.0).unwrap());
        let mut agent = CatoniOful::new(class, AgentConfig::default(), info()).unwrap();
        let d = agent.select(&[0]).unwrap();
        assert!(agent.observe(&d, 0.5, None).is_err());
    }
}
