use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::saddle::{self, LossContext, PairStats, WeightedHistory};
use super::{check_context, log_at_least_one, optimistic_argmax, Agent, AgentConfig, Decision, Diagnostics, ProblemInfo};
use crate::error::{Error, Result};
use crate::hypothesis::{eluder_coefficient_over, refit_version_space, HypothesisClass, PairAccumulator, VersionSpace};

/// `sqrt(8(8·13⁴ + 2·13² + 13)) = sqrt(1830712)`.
pub const EXPLICIT_RADIUS_CORE: f64 = 1_353.038_063_027_053;

/// How the candidate-set agent sizes its radius `β̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusRule {
    /// `c·sqrt(log(R L_f N T / δ))`.
    #[default]
    Logarithmic,
    /// `c·(sqrt(1830712) + 13√2·λ^{1/4})·ι`.
    Explicit,
}

/// Known-variance optimistic agent whose estimator is any hypothesis that no
/// rival beats by more than `β̂²/4` in robust excess loss. The confidence set
/// is rebuilt over the whole class every round.
#[derive(Debug, Clone)]
pub struct CandidateSetOful {
    class: Arc<HypothesisClass>,
    config: AgentConfig,
    acc: PairAccumulator,
    history: WeightedHistory,
    space: VersionSpace,
    iota_raw: f64,
    beta_hat: f64,
    failures: Vec<usize>,
    last: Diagnostics,
}

impl CandidateSetOful {
    pub fn new(class: Arc<HypothesisClass>, config: AgentConfig, info: ProblemInfo, rule: RadiusRule) -> Result<Self> {
        config.validate()?;
        info.validate()?;
        let n = class.n_functions() as f64;
        let t = info.horizon as f64;
        let r = info.noise_range;
        let lf = class.range_bound();
        let delta_nt = config.delta / (n * (t + 1.0));
        let iota_raw = log_at_least_one(21f64.sqrt() * 288.0 * lf * lf * r * r * t.powf(3.5) / delta_nt).sqrt();
        let beta_hat = config.constant_scale
            * match rule {
                RadiusRule::Logarithmic => log_at_least_one(r * lf * n * t / config.delta).sqrt(),
                RadiusRule::Explicit => {
                    (EXPLICIT_RADIUS_CORE + 13.0 * 2f64.sqrt() * config.lambda.powf(0.25)) * iota_raw
                }
            };
        Ok(Self {
            acc: PairAccumulator::for_class(&class),
            space: VersionSpace::full(class.n_functions(), 0),
            class,
            config,
            history: WeightedHistory::default(),
            iota_raw,
            beta_hat,
            failures: Vec::new(),
            last: Diagnostics::default(),
        })
    }

    pub fn iota(&self) -> f64 {
        self.config.constant_scale * self.iota_raw
    }

    pub fn beta_hat(&self) -> f64 {
        self.beta_hat
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.space
    }

    pub fn history(&self) -> &WeightedHistory {
        &self.history
    }

    /// Rounds at which the candidate set came up empty.
    pub fn failures(&self) -> &[usize] {
        &self.failures
    }

    /// `σ̄ = max(σ_t, α, 4 sqrt(2 ι L_f D))`, `D` taken over the whole class.
    pub fn weight(&self, x: usize, sigma_t: f64) -> Result<f64> {
        let all: Vec<usize> = (0..self.class.n_functions()).collect();
        let d = eluder_coefficient_over(&self.class, &self.acc, &all, x, 1.0, self.config.lambda)?;
        let uncertainty = 4.0 * (2.0 * self.iota() * self.class.range_bound() * d).sqrt();
        Ok(sigma_t.max(self.config.alpha).max(uncertainty))
    }

    /// `θ = ι / sqrt(V + 2Σ(f − f̂)⁴/σ̄⁴ + ε²)`.
    pub fn theta(&self, stats: PairStats) -> f64 {
        let iota = self.iota();
        iota / (stats.distance + 2.0 * stats.quartic + self.config.epsilon_offset.powi(2)).sqrt()
    }

    fn context(&self) -> LossContext<'_> {
        LossContext {
            class: &self.class,
            acc: &self.acc,
            history: &self.history,
            tolerance: self.config.catoni_tolerance,
        }
    }

    /// Whether no rival beats `f_hat` by more than `β̂²/4`.
    pub fn is_candidate(&self, f_hat: usize) -> Result<bool> {
        if f_hat >= self.class.n_functions() {
            return Err(Error::invalid(format!("function {f_hat} not in class")));
        }
        let ctx = self.context();
        let theta = |s: PairStats| self.theta(s);
        let floor = -0.25 * self.beta_hat * self.beta_hat;
        let mut buf = Vec::with_capacity(self.history.len());
        let first = self.space.estimator();
        let order = std::iter::once(first).chain((0..self.class.n_functions()).filter(|&f| f != first));
        for f in order {
            if f != f_hat && saddle::excess_loss(&ctx, f, f_hat, &theta, &mut buf)? < floor {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every candidate, in index order.
    pub fn candidate_set(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for f in 0..self.class.n_functions() {
            if self.is_candidate(f)? {
                out.push(f);
            }
        }
        Ok(out)
    }

    /// The lowest-index candidate.
    pub fn fit(&self) -> Result<usize> {
        for f in 0..self.class.n_functions() {
            if self.is_candidate(f)? {
                return Ok(f);
            }
        }
        Err(Error::ConfidenceFailure { round: self.history.len() })
    }
}

impl Agent for CandidateSetOful {
    fn name(&self) -> &str {
        "catoni-oful-cs"
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
        let sigma_t = noise_std.ok_or_else(|| Error::invalid("catoni-oful-cs needs the reward standard deviation"))?;
        let x = decision.action;
        let w = self.weight(x, sigma_t)?;
        self.acc.update(&self.class, x, w)?;
        self.history.push(x, reward, w);
        let fitted = if self.config.refit_cadence.due(self.history.len()) {
            self.fit()
        } else {
            Ok(self.space.estimator())
        };
        let (estimator, outcome) = match fitted {
            Ok(f) => (f, Ok(())),
            Err(e @ Error::ConfidenceFailure { .. }) => {
                self.failures.push(self.history.len());
                (self.space.estimator(), Err(e))
            }
            Err(e) => return Err(e),
        };
        let everything = vec![true; self.class.n_functions()];
        self.space = refit_version_space(&self.acc, &everything, estimator, self.beta_hat * self.beta_hat)?;
        self.last = Diagnostics {
            weight: Some(w),
            level: None,
            active_size: Some(self.space.size()),
            beta_hat: Some(self.beta_hat),
        };
        outcome
    }

    fn diagnostics(&self) -> Diagnostics {
        self.last
    }

    fn contains(&self, f: usize) -> bool {
        self.space.contains(f)
    }
}
