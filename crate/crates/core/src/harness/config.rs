//! JSON experiment descriptions.
//!
//! ```json
//! {
//!   "instance": { "preset": "random-class", "sigma": 0.2, "r": 100,
//!                 "n_functions": 8, "n_actions": 5, "class_seed": 3 },
//!   "agents": [ { "preset": "catoni-oful", "constant_scale": 0.05 },
//!               { "preset": "oful-ls", "constant_scale": 0.05 } ],
//!   "horizon": 2000,
//!   "seeds": [1, 2, 3],
//!   "burn_in": 100,
//!   "output": "out",
//!   "emit": "csv"
//! }
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    Agent, AgentConfig, CandidateSetOful, CatoniOful, OfulLs, ProblemInfo, RadiusRule, RefitCadence, Vacb,
};
use crate::environments::{
    bernoulli_noise, heavy_noise, lower_bound_epsilon, make_lower_bound_instance, with_noise, ContextSchedule,
    Instance, Variant,
};
use crate::error::{Error, Result};
use crate::hypothesis::{grid_parameters, HypothesisClass};
use crate::rng::{self, Domain};

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    #[default]
    Csv,
    Json,
}

/// Decision-set generator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Full,
    Fixed { actions: Vec<usize> },
    RoundRobin { k: usize },
    RandomSubsets { k: usize },
}

impl ScheduleSpec {
    pub fn build(&self) -> ContextSchedule {
        match self {
            ScheduleSpec::Full => ContextSchedule::Full,
            ScheduleSpec::Fixed { actions } => ContextSchedule::Fixed(actions.clone()),
            ScheduleSpec::RoundRobin { k } => ContextSchedule::RoundRobinSubsets(*k),
            ScheduleSpec::RandomSubsets { k } => ContextSchedule::SeededRandomSubsets(*k),
        }
    }
}

/// Zero-mean noise families for generated classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Three-point heavy-tailed noise with standard deviation `σ`.
    #[default]
    ThreePoint,
    /// `R(B − p)` with `R²p(1 − p) = σ²`.
    Bernoulli,
    None,
}

fn default_n_functions() -> usize {
    8
}
fn default_n_actions() -> usize {
    5
}
fn default_per_axis() -> usize {
    5
}
fn default_dimension() -> usize {
    3
}
fn default_half_width() -> f64 {
    0.5
}

/// A random class with values in `[0, 1]` around a designated true row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomClassSpec {
    pub sigma: f64,
    pub r: f64,
    #[serde(default = "default_n_functions")]
    pub n_functions: usize,
    #[serde(default = "default_n_actions")]
    pub n_actions: usize,
    #[serde(default)]
    pub class_seed: u64,
    #[serde(default)]
    pub truth: usize,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub schedule: ScheduleSpec,
}

/// Linear functions `θᵀφ(x)` for `θ` on a grid and random unit features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGridSpec {
    pub sigma: f64,
    pub r: f64,
    #[serde(default = "default_dimension")]
    pub d: usize,
    #[serde(default = "default_per_axis")]
    pub per_axis: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_n_actions")]
    pub n_actions: usize,
    #[serde(default)]
    pub class_seed: u64,
    #[serde(default)]
    pub truth: usize,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub schedule: ScheduleSpec,
}

/// Two-armed instance; `epsilon` defaults to the horizon-dependent preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSpec {
    pub sigma: f64,
    pub r: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum InstanceSpec {
    LbPlus(LowerBoundSpec),
    LbMinus(LowerBoundSpec),
    /// A random class under scaled Bernoulli noise.
    BernoulliScaled(RandomClassSpec),
    RandomClass(RandomClassSpec),
    LinearGrid(LinearGridSpec),
}

impl InstanceSpec {
    pub fn build(&self, horizon: usize) -> Result<Instance> {
        match self {
            InstanceSpec::LbPlus(s) | InstanceSpec::LbMinus(s) => {
                let variant = if matches!(self, InstanceSpec::LbPlus(_)) { Variant::Plus } else { Variant::Minus };
                let eps = s.epsilon.unwrap_or_else(|| lower_bound_epsilon(s.sigma, s.r, horizon));
                make_lower_bound_instance(s.sigma, eps, s.r, variant)
            }
            InstanceSpec::BernoulliScaled(s) => build_random(s, NoiseKind::Bernoulli),
            InstanceSpec::RandomClass(s) => build_random(s, s.noise),
            InstanceSpec::LinearGrid(s) => build_linear(s),
        }
    }

    /// Replaces the noise scale `σ`, for sweeps.
    pub fn set_sigma(&mut self, sigma: f64) {
        match self {
            InstanceSpec::LbPlus(s) | InstanceSpec::LbMinus(s) => s.sigma = sigma,
            InstanceSpec::BernoulliScaled(s) | InstanceSpec::RandomClass(s) => s.sigma = sigma,
            InstanceSpec::LinearGrid(s) => s.sigma = sigma,
        }
    }
}

fn noise_for(kind: NoiseKind, sigma: f64, r: f64) -> Result<crate::environments::RewardDistribution> {
    match kind {
        NoiseKind::ThreePoint => heavy_noise(sigma, r),
        NoiseKind::Bernoulli => bernoulli_noise(sigma, r),
        NoiseKind::None => crate::environments::RewardDistribution::deterministic(0.0),
    }
}

/// A random `n_functions × n_actions` class with entries uniform on `[0, 1]`.
pub fn random_class(n_functions: usize, n_actions: usize, seed: u64) -> Result<HypothesisClass> {
    let mut r = rng::stream(seed, Domain::Instance, 0);
    let rows = (0..n_functions).map(|_| (0..n_actions).map(|_| r.gen::<f64>()).collect()).collect();
    HypothesisClass::new(rows, 1.0)
}

fn build_random(s: &RandomClassSpec, noise: NoiseKind) -> Result<Instance> {
    let class = Arc::new(random_class(s.n_functions, s.n_actions, s.class_seed)?);
    with_noise(class, s.truth, noise_for(noise, s.sigma, s.r)?, s.r, s.schedule.build())
}

/// `n` random unit vectors in `R^d`.
pub fn random_features(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, Domain::Instance, 1);
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-3 && norm <= 1.0 {
                break v.into_iter().map(|a| a / norm).collect();
            }
        })
        .collect()
}

fn build_linear(s: &LinearGridSpec) -> Result<Instance> {
    let features = random_features(s.n_actions, s.d, s.class_seed);
    let params = grid_parameters(s.d, s.per_axis, s.half_width);
    let class = Arc::new(HypothesisClass::linear(&params, &features, None)?);
    with_noise(class, s.truth, noise_for(s.noise, s.sigma, s.r)?, s.r, s.schedule.build())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    CatoniOful,
    CatoniOfulCs,
    Vacb,
    OfulLs,
}

impl AgentKind {
    pub fn default_label(self) -> &'static str {
        match self {
            AgentKind::CatoniOful => "catoni-oful",
            AgentKind::CatoniOfulCs => "catoni-oful-cs",
            AgentKind::Vacb => "vacb",
            AgentKind::OfulLs => "oful-ls",
        }
    }
}

/// An agent preset plus optional overrides of [`AgentConfig::for_horizon`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub preset: AgentKind,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub epsilon_offset: Option<f64>,
    #[serde(default)]
    pub constant_scale: Option<f64>,
    #[serde(default)]
    pub catoni_tolerance: Option<f64>,
    #[serde(default)]
    pub refit_cadence: Option<RefitCadence>,
    #[serde(default)]
    pub radius_rule: Option<RadiusRule>,
}

impl AgentSpec {
    pub fn new(preset: AgentKind) -> Self {
        Self {
            preset,
            label: None,
            delta: None,
            lambda: None,
            alpha: None,
            epsilon_offset: None,
            constant_scale: None,
            catoni_tolerance: None,
            refit_cadence: None,
            radius_rule: None,
        }
    }

    pub fn with_scale(mut self, c: f64) -> Self {
        self.constant_scale = Some(c);
        self
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.preset.default_label())
    }

    pub fn config(&self, horizon: usize) -> AgentConfig {
        let base = AgentConfig::for_horizon(horizon);
        AgentConfig {
            delta: self.delta.unwrap_or(base.delta),
            lambda: self.lambda.unwrap_or(base.lambda),
            alpha: self.alpha.unwrap_or(base.alpha),
            epsilon_offset: self.epsilon_offset.unwrap_or(base.epsilon_offset),
            constant_scale: self.constant_scale.unwrap_or(base.constant_scale),
            catoni_tolerance: self.catoni_tolerance.unwrap_or(base.catoni_tolerance),
            refit_cadence: self.refit_cadence.unwrap_or(base.refit_cadence),
        }
    }

    pub fn build(&self, instance: &Instance, horizon: usize) -> Result<Box<dyn Agent>> {
        let info = problem_info(instance, horizon);
        let config = self.config(horizon);
        let class = instance.class().clone();
        Ok(match self.preset {
            AgentKind::CatoniOful => Box::new(CatoniOful::new(class, config, info)?),
            AgentKind::CatoniOfulCs => {
                Box::new(CandidateSetOful::new(class, config, info, self.radius_rule.unwrap_or_default())?)
            }
            AgentKind::Vacb => Box::new(Vacb::new(class, config, info)?),
            AgentKind::OfulLs => Box::new(OfulLs::new(class, config, info)?),
        })
    }
}

/// What an instance reveals to agents.
pub fn problem_info(instance: &Instance, horizon: usize) -> ProblemInfo {
    ProblemInfo {
        horizon,
        noise_range: instance.noise_range(),
        sigma_eta: instance.sigma_eta(),
        c_eta: instance.c_eta(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Horizon,
    Sigma,
}

/// A one-dimensional grid of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_trials() -> usize {
    2000
}
fn default_n() -> usize {
    200
}
fn default_grid_points() -> usize {
    5
}
fn default_delta() -> f64 {
    0.05
}
fn default_offset() -> f64 {
    1.0
}

/// Monte-Carlo check of the Catoni deviation bound on heavy-tailed noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSpec {
    pub sigma: f64,
    pub r: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// The offset `ε` in the bound.
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A complete experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub emit: Emit,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub concentration: Option<ConcentrationSpec>,
}

impl RunSpec {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let spec: RunSpec = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{}: {e}", origin.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::Config(format!(
                "burn_in {} must be below the horizon {}",
                self.burn_in, self.horizon
            )));
        }
        for a in &self.agents {
            a.config(self.horizon).validate().map_err(|e| Error::Config(format!("agent {}: {e}", a.label())))?;
        }
        Ok(())
    }

    /// Sets `constant_scale` on every agent.
    pub fn override_constant_scale(&mut self, c: f64) {
        for a in &mut self.agents {
            a.constant_scale = Some(c);
        }
    }
}
