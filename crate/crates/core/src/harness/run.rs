//! Seeded episodes and their aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::Agent;
use crate::environments::Instance;
use crate::error::{Error, Result};

/// One round of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub action: usize,
    pub reward: f64,
    pub instant_regret: f64,
    pub cum_regret: f64,
    pub weight: Option<f64>,
    pub level: Option<usize>,
    pub active_size: Option<usize>,
    pub beta_hat: Option<f64>,
}

/// A non-fatal agent error raised during an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundFailure {
    pub round: usize,
    pub message: String,
}

/// Everything recorded about one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub agent: String,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    pub failures: Vec<RoundFailure>,
    /// Whether the true function was in the agent's confidence set after
    /// each round.
    pub coverage: Vec<bool>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Whether the true function stayed covered for every round after `burn_in`.
    pub fn covered_after(&self, burn_in: usize) -> bool {
        self.coverage.iter().skip(burn_in).all(|&c| c)
    }
}

/// Plays `horizon` rounds of `agent` against `instance`.
///
/// Each round draws the decision set and reward from streams keyed by
/// `(seed, round)`. Known-variance agents receive `sqrt(Var[y|x])`.
/// Confidence failures are logged in the trace; other agent errors abort.
pub fn run_episode<A: Agent + ?Sized>(instance: &Instance, agent: &mut A, horizon: usize, seed: u64) -> Result<RegretTrace> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    let truth = instance.true_function();
    let mut rows = Vec::with_capacity(horizon);
    let mut failures = Vec::new();
    let mut coverage = Vec::with_capacity(horizon);
    let mut cum = 0.0;
    for round in 1..=horizon {
        let context = instance.context(seed, round);
        let decision = agent.select(&context)?;
        let x = decision.action;
        let reward = instance.reward(seed, round, x)?;
        let noise_std = if agent.needs_variance() { Some(instance.variance_oracle(x)?.sqrt()) } else { None };
        match agent.observe(&decision, reward, noise_std) {
            Ok(()) => {}
            Err(e @ Error::ConfidenceFailure { .. }) => failures.push(RoundFailure { round, message: e.to_string() }),
            Err(e) => return Err(e),
        }
        let regret = instance.instant_regret(&context, x)?;
        cum += regret;
        let diag = agent.diagnostics();
        rows.push(TraceRow {
            round,
            action: x,
            reward,
            instant_regret: regret,
            cum_regret: cum,
            weight: diag.weight,
            level: diag.level,
            active_size: diag.active_size,
            beta_hat: diag.beta_hat,
        });
        coverage.push(agent.contains(truth));
    }
    Ok(RegretTrace { agent: agent.name().to_string(), seed, rows, failures, coverage })
}

/// Runs one episode per seed in parallel; results come back in seed order.
pub fn run_seeds<F>(instance: &Instance, horizon: usize, seeds: &[u64], make_agent: F) -> Result<Vec<RegretTrace>>
where
    F: Fn() -> Result<Box<dyn Agent>> + Sync,
{
    seeds
        .par_iter()
        .map(|&seed| {
            let mut agent = make_agent()?;
            run_episode(instance, agent.as_mut(), horizon, seed)
        })
        .collect()
}

/// Per-round statistics of cumulative regret across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub round: usize,
    pub mean_cum_regret: f64,
    /// Sample standard deviation (divisor `n − 1`; 0 for a single trace).
    pub std_cum_regret: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub rows: Vec<SummaryRow>,
    pub n_traces: usize,
}

impl SummaryStats {
    pub fn final_row(&self) -> Option<&SummaryRow> {
        self.rows.last()
    }
}

/// Mean, sample standard deviation, min and max of cumulative regret per round.
pub fn aggregate(traces: &[RegretTrace]) -> Result<SummaryStats> {
    let first = traces.first().ok_or_else(|| Error::invalid("aggregate needs at least one trace"))?;
    let len = first.len();
    if let Some(t) = traces.iter().find(|t| t.len() != len) {
        return Err(Error::invalid(format!("trace lengths differ ({} vs {len})", t.len())));
    }
    let n = traces.len() as f64;
    let rows = (0..len)
        .map(|i| {
            let vals: Vec<f64> = traces.iter().map(|t| t.rows[i].cum_regret).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let std = if traces.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                round: first.rows[i].round,
                mean_cum_regret: mean,
                std_cum_regret: std,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(SummaryStats { rows, n_traces: traces.len() })
}
