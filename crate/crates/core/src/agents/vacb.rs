use std::sync::Arc;

use super::saddle::{self, LossContext, PairStats, WeightedHistory};
use super::{check_context, log_at_least_one, optimistic_argmax, Agent, AgentConfig, Decision, Diagnostics, Mode, ProblemInfo};
use crate::error::{Error, Result};
use crate::hypothesis::{eluder_coefficient_over, refit_version_space, HypothesisClass, PairAccumulator, VersionSpace};
use crate::robust_mean::CatoniQuery;

/// Everything one uncertainty level owns.
#[derive(Debug, Clone)]
pub struct LevelState {
    level: usize,
    lambda: f64,
    acc: PairAccumulator,
    history: WeightedHistory,
    rounds: Vec<usize>,
    uncertainties: Vec<f64>,
    space: VersionSpace,
    beta_hat: f64,
    var_hat: Option<f64>,
}

impl LevelState {
    fn new(level: usize, n_functions: usize) -> Self {
        Self {
            level,
            lambda: pow2(-2 * level as i32),
            acc: PairAccumulator::new(n_functions),
            history: WeightedHistory::default(),
            rounds: Vec::new(),
            uncertainties: Vec::new(),
            space: VersionSpace::full(n_functions, 0),
            beta_hat: pow2(1 - level as i32),
            var_hat: None,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `λ^l = 2^{−2l}`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Rounds (1-based) explored at this level.
    pub fn rounds(&self) -> &[usize] {
        &self.rounds
    }

    /// Actions, rewards and weights `w_i` of the explored rounds.
    pub fn history(&self) -> &WeightedHistory {
        &self.history
    }

    /// `D_i` at the moment each explored action was selected.
    pub fn uncertainties(&self) -> &[f64] {
        &self.uncertainties
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.space
    }

    pub fn accumulator(&self) -> &PairAccumulator {
        &self.acc
    }

    pub fn beta_hat(&self) -> f64 {
        self.beta_hat
    }

    pub fn var_hat(&self) -> Option<f64> {
        self.var_hat
    }
}

/// The variance estimate a level produced at one of its updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRecord {
    pub round: usize,
    pub level: usize,
    /// `|Ψ^l|` including this round.
    pub count: usize,
    pub var_hat: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    level: usize,
    uncertainty: f64,
}

/// Variance-agnostic peeling agent.
///
/// Rounds are routed to the first level `l ≥ l⋆` at which some surviving
/// action is still uncertain (`D^l(x) > 2^{−l}`); that action is explored with
/// weight `w = 2^l D^l(x)`. Levels where everything is certain eliminate
/// actions that are clearly worse and pass the rest down.
#[derive(Debug, Clone)]
pub struct Vacb {
    class: Arc<HypothesisClass>,
    config: AgentConfig,
    info: ProblemInfo,
    gamma: f64,
    max_level: usize,
    l_star: usize,
    iota_prime_raw: f64,
    levels: Vec<LevelState>,
    round: usize,
    pending: Option<Pending>,
    variance_log: Vec<VarianceRecord>,
    last: Diagnostics,
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

impl Vacb {
    pub fn new(class: Arc<HypothesisClass>, config: AgentConfig, info: ProblemInfo) -> Result<Self> {
        config.validate()?;
        info.validate()?;
        let t = info.horizon as f64;
        let gamma = 1.0 / (info.sigma_eta.max(config.alpha) * t.powf(1.5));
        let max_level = ((1.0 / gamma).log2().ceil().max(1.0)) as usize;
        let n = class.n_functions() as f64;
        let lf = class.range_bound();
        let s2c = info.sigma_eta.powi(2) + info.c_eta;
        let iota_prime_raw = log_at_least_one(
            info.noise_range * lf * (s2c + 1.0) * n * max_level as f64 * t / config.delta,
        )
        .sqrt();
        let threshold = (1076.0 * config.constant_scale * iota_prime_raw).log2().ceil();
        let l_star = (threshold.max(1.0) as usize).min(max_level);
        let levels = (l_star..=max_level).map(|l| LevelState::new(l, class.n_functions())).collect();
        Ok(Self {
            class,
            config,
            info,
            gamma,
            max_level,
            l_star,
            iota_prime_raw,
            levels,
            round: 0,
            pending: None,
            variance_log: Vec::new(),
            last: Diagnostics::default(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Deepest level `L`.
    pub fn max_level(&self) -> usize {
        self.max_level
    }

    /// Shallowest level `l⋆`.
    pub fn l_star(&self) -> usize {
        self.l_star
    }

    /// `ι′(δ)` after scaling.
    pub fn iota_prime(&self) -> f64 {
        self.config.constant_scale * self.iota_prime_raw
    }

    pub fn levels(&self) -> &[LevelState] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> Option<&LevelState> {
        l.checked_sub(self.l_star).and_then(|i| self.levels.get(i))
    }

    pub fn variance_log(&self) -> &[VarianceRecord] {
        &self.variance_log
    }

    fn state(&self, l: usize) -> &LevelState {
        &self.levels[l - self.l_star]
    }

    /// `D^l(x)` over the level's version space and history.
    pub fn uncertainty(&self, l: usize, x: usize) -> Result<f64> {
        let s = self.level(l).ok_or_else(|| Error::invalid(format!("level {l} out of range")))?;
        eluder_coefficient_over(&self.class, &s.acc, &s.space.members(), x, 1.0, s.lambda)
    }

    /// `b̂^l = c(14 ι′(2σ_η² + c_η) + 268 λ^l)`.
    pub fn variance_bonus(&self, l: usize) -> f64 {
        let s2c = 2.0 * self.info.sigma_eta.powi(2) + self.info.c_eta;
        self.config.constant_scale * (14.0 * self.iota_prime_raw * s2c + 268.0 * pow2(-2 * l as i32))
    }

    /// Plug-in estimate of `Σ_{i∈Ψ^l} σ_i²/w_i²` using the level's current
    /// estimator and radius.
    pub fn variance_estimate(&self, l: usize) -> Result<f64> {
        let s = self.level(l).ok_or_else(|| Error::invalid(format!("level {l} out of range")))?;
        if s.history.is_empty() {
            return Err(Error::invalid(format!("level {l} has no samples")));
        }
        let f = s.space.estimator();
        let h = &s.history;
        let samples: Vec<f64> = (0..h.len())
            .map(|i| ((h.rewards[i] - self.class.value(f, h.actions[i])) / h.weights[i]).powi(2))
            .collect();
        let lf = self.class.range_bound();
        let theta_var = 1.0
            / (4.0
                * (2.0 * self.info.sigma_eta.powi(2)
                    + self.info.c_eta
                    + lf * lf
                    + pow2(4 - 2 * l as i32) * s.beta_hat * s.beta_hat));
        let center = CatoniQuery::new(&samples, theta_var)?
            .with_tolerance(self.config.catoni_tolerance)?
            .solve()?;
        Ok((h.len() as f64 * center + self.variance_bonus(l)).max(0.0))
    }

    fn exploit(&self, l: usize, candidates: &[usize]) -> Decision {
        let (x, _) = optimistic_argmax(&self.class, &self.state(l).space.members(), candidates);
        Decision { action: x, mode: Mode::Exploit, level: Some(l), weight: None }
    }

    fn update_level(&mut self, l: usize, x: usize, y: f64, w: f64, uncertainty: f64) -> Result<()> {
        let idx = l - self.l_star;
        {
            let s = &mut self.levels[idx];
            s.acc.update(&self.class, x, w)?;
            s.history.push(x, y, w);
            s.rounds.push(self.round);
            s.uncertainties.push(uncertainty);
        }
        let var_hat = self.variance_estimate(l)?;
        let s = &self.levels[idx];
        let scale = pow2(-2 * l as i32);
        let beta_prev = s.beta_hat;
        let iota = self.iota_prime();
        let theta = |p: PairStats| {
            iota / (scale * beta_prev * beta_prev * (var_hat + p.distance) + scale * scale).sqrt()
        };
        let ctx = LossContext {
            class: &self.class,
            acc: &s.acc,
            history: &s.history,
            tolerance: self.config.catoni_tolerance,
        };
        let estimator = if self.config.refit_cadence.due(s.history.len()) {
            saddle::minmax(&ctx, &s.space.members(), s.space.estimator(), &theta)?
        } else {
            s.space.estimator()
        };
        let raw = self.iota_prime_raw;
        let beta_sq = self.config.constant_scale
            * (2880.0 * raw * raw * scale * var_hat + 60.0 * raw * scale + 2.0 * s.lambda);
        let space = refit_version_space(&s.acc, s.space.mask(), estimator, (beta_sq - s.lambda).max(0.0))?;
        let count = s.history.len();
        let s = &mut self.levels[idx];
        s.space = space;
        s.beta_hat = beta_sq.sqrt();
        s.var_hat = Some(var_hat);
        self.variance_log.push(VarianceRecord { round: self.round, level: l, count, var_hat });
        Ok(())
    }
}

impl Agent for Vacb {
    fn name(&self) -> &str {
        "vacb"
    }

    fn needs_variance(&self) -> bool {
        false
    }

    fn select(&mut self, context: &[usize]) -> Result<Decision> {
        check_context(&self.class, context)?;
        let mut candidates: Vec<usize> = context.to_vec();
        candidates.sort_unstable();
        candidates.dedup();
        let mut l = self.l_star;
        loop {
            if l > self.max_level {
                self.pending = None;
                return Ok(self.exploit(self.max_level, &candidates));
            }
            let d: Vec<f64> = candidates
                .iter()
                .map(|&x| self.uncertainty(l, x))
                .collect::<Result<_>>()?;
            let threshold = pow2(-(l as i32));
            if d.iter().all(|&v| v <= self.gamma) {
                self.pending = None;
                return Ok(self.exploit(l, &candidates));
            }
            if let Some(i) = d.iter().position(|&v| v > threshold) {
                let w = pow2(l as i32) * d[i];
                self.pending = Some(Pending { level: l, uncertainty: d[i] });
                return Ok(Decision { action: candidates[i], mode: Mode::Explore, level: Some(l), weight: Some(w) });
            }
            let s = self.state(l);
            let f = s.space.estimator();
            let best = candidates.iter().map(|&x| self.class.value(f, x)).fold(f64::NEG_INFINITY, f64::max);
            let cut = best - pow2(1 - l as i32) * s.beta_hat;
            candidates.retain(|&x| self.class.value(f, x) >= cut);
            l += 1;
        }
    }

    fn observe(&mut self, decision: &Decision, reward: f64, _noise_std: Option<f64>) -> Result<()> {
        self.round += 1;
        let level = decision.level.unwrap_or(self.max_level);
        if decision.mode == Mode::Explore {
            let pending = self
                .pending
                .take()
                .ok_or_else(|| Error::invalid("explore observation without a matching selection"))?;
            let w = decision.weight.ok_or_else(|| Error::invalid("explore decision lacks a weight"))?;
            self.update_level(pending.level, decision.action, reward, w, pending.uncertainty)?;
        }
        let s = self.state(level);
        self.last = Diagnostics {
            weight: decision.weight,
            level: Some(level),
            active_size: Some(s.space.size()),
            beta_hat: Some(s.beta_hat),
        };
        Ok(())
    }

    fn diagnostics(&self) -> Diagnostics {
        self.last
    }

    fn contains(&self, f: usize) -> bool {
        self.levels.iter().all(|s| s.space.contains(f))
    }
}
