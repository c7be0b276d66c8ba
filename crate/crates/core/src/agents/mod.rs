//! Bandit agents sharing a select/observe interface.
//!
//! | agent | variance | confidence set |
//! |---|---|---|
//! | [`CatoniOful`] | known | nested, saddle-point estimator |
//! | [`CandidateSetOful`] | known | rebuilt each round around a candidate estimator |
//! | [`Vacb`] | unknown | one nested set per uncertainty level |
//! | [`OfulLs`] | ignored | nested, least squares, range-scaled radius |

mod candidate_set;
mod catoni_oful;
mod oful_ls;
pub mod saddle;
mod vacb;

pub use candidate_set::{CandidateSetOful, RadiusRule, EXPLICIT_RADIUS_CORE};
pub use catoni_oful::CatoniOful;
pub use oful_ls::OfulLs;
pub use saddle::WeightedHistory;
pub use vacb::{LevelState, Vacb, VarianceRecord};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::HypothesisClass;

/// How often the saddle-point estimator is recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefitCadence {
    EveryRound,
    /// Only at rounds 1, 2, 4, 8, …; the previous estimator is reused in between.
    Doubling,
}

impl RefitCadence {
    pub(crate) fn due(self, t: usize) -> bool {
        match self {
            RefitCadence::EveryRound => true,
            RefitCadence::Doubling => t.is_power_of_two(),
        }
    }
}

/// Tuning shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Failure probability δ.
    pub delta: f64,
    /// Regularizer λ in eluder coefficients.
    pub lambda: f64,
    /// Weight floor α.
    pub alpha: f64,
    /// Offset ε inside the robustness parameter θ.
    pub epsilon_offset: f64,
    /// Multiplier `c` on the log factors, radii, bonus and level threshold.
    pub constant_scale: f64,
    pub catoni_tolerance: f64,
    pub refit_cadence: RefitCadence,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            lambda: 1.0,
            alpha: 0.01,
            epsilon_offset: 1e-3,
            constant_scale: 1.0,
            catoni_tolerance: 1e-10,
            refit_cadence: RefitCadence::EveryRound,
        }
    }
}

impl AgentConfig {
    /// Defaults with `α = 1/√T` and `ε = 1/T`.
    pub fn for_horizon(horizon: usize) -> Self {
        let t = horizon.max(1) as f64;
        Self { alpha: 1.0 / t.sqrt(), epsilon_offset: 1.0 / t, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        positive("delta", self.delta)?;
        positive("lambda", self.lambda)?;
        positive("alpha", self.alpha)?;
        positive("epsilon_offset", self.epsilon_offset)?;
        positive("constant_scale", self.constant_scale)?;
        positive("catoni_tolerance", self.catoni_tolerance)?;
        if self.delta >= 1.0 {
            return Err(Error::invalid(format!("delta must be < 1, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Environment facts an agent may use: the horizon and the noise envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemInfo {
    pub horizon: usize,
    /// Almost-sure noise bound `R`.
    pub noise_range: f64,
    /// Uniform noise standard-deviation bound `σ_η`.
    pub sigma_eta: f64,
    /// Ratio bound `c_η` with `Var[η²] ≤ c_η Var[η]`.
    pub c_eta: f64,
}

impl ProblemInfo {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be >= 1"));
        }
        if !(self.noise_range.is_finite() && self.noise_range > 0.0) {
            return Err(Error::invalid(format!("noise range must be > 0, got {}", self.noise_range)));
        }
        if !(self.sigma_eta >= 0.0 && self.c_eta >= 0.0) {
            return Err(Error::invalid("sigma_eta and c_eta must be >= 0"));
        }
        Ok(())
    }
}

/// What the agent does in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Optimistic,
    Explore,
    Exploit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: usize,
    pub mode: Mode,
    pub level: Option<usize>,
    /// Weight fixed at selection time, when the agent sets one there.
    pub weight: Option<f64>,
}

impl Decision {
    pub(crate) fn optimistic(action: usize) -> Self {
        Self { action, mode: Mode::Optimistic, level: None, weight: None }
    }
}

/// Per-round diagnostics, blank where they do not apply.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    pub weight: Option<f64>,
    pub level: Option<usize>,
    pub active_size: Option<usize>,
    pub beta_hat: Option<f64>,
}

/// The select/observe protocol.
pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Whether `observe` expects the reward's standard deviation.
    fn needs_variance(&self) -> bool;

    fn select(&mut self, context: &[usize]) -> Result<Decision>;

    /// Feeds back the reward for the last decision. `noise_std` is `σ_t` for
    /// known-variance agents and ignored otherwise.
    ///
    /// An [`Error::ConfidenceFailure`] leaves the agent usable.
    fn observe(&mut self, decision: &Decision, reward: f64, noise_std: Option<f64>) -> Result<()>;

    /// State after the most recent `observe`.
    fn diagnostics(&self) -> Diagnostics;

    /// Whether `f` is in the agent's confidence set(s).
    fn contains(&self, f: usize) -> bool;
}

/// `ln(max(x, e))`, so that log factors never drop below 1.
pub(crate) fn log_at_least_one(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln()
}

pub(crate) fn check_context(class: &HypothesisClass, context: &[usize]) -> Result<()> {
    if context.is_empty() {
        return Err(Error::invalid("empty decision set"));
    }
    context.iter().try_for_each(|&x| class.check_action(x))
}

/// `argmax_{x ∈ context} max_{f ∈ members} f(x)`, ties to the lowest action
/// then the lowest function. Returns `(action, function)`.
pub fn optimistic_argmax(class: &HypothesisClass, members: &[usize], context: &[usize]) -> (usize, usize) {
    let mut best = (context[0], members[0]);
    let mut best_v = f64::NEG_INFINITY;
    let mut sorted = context.to_vec();
    sorted.sort_unstable();
    for &x in &sorted {
        for &f in members {
            let v = class.value(f, x);
            if v > best_v {
                best_v = v;
                best = (x, f);
            }
        }
    }
    best
}

