//! Experiment orchestration: episodes, sweeps, the concentration study and
//! offline eluder reports, plus their file outputs.

pub mod concentration;
pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use concentration::{concentration_experiment, ConcentrationReport};
pub use config::{AgentKind, AgentSpec, ConcentrationSpec, Emit, InstanceSpec, RunSpec, SweepParameter, SweepSpec};
pub use output::{format_g12, parse_trace_csv, summary_to_csv, trace_to_csv, SUMMARY_HEADER, TRACE_HEADER};
pub use run::{aggregate, run_episode, run_seeds, RegretTrace, SummaryStats, TraceRow};

use crate::error::{Error, Result};
use crate::hypothesis::{eluder_trace, HypothesisClass};

/// Traces and their summary for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRun {
    pub label: String,
    pub traces: Vec<RegretTrace>,
    pub summary: SummaryStats,
}

impl AgentRun {
    /// Fraction of traces whose true function stayed covered after `burn_in`.
    pub fn coverage_rate(&self, burn_in: usize) -> f64 {
        let ok = self.traces.iter().filter(|t| t.covered_after(burn_in)).count();
        ok as f64 / self.traces.len() as f64
    }
}

/// Runs every agent of `spec` over every seed.
pub fn run_experiment(spec: &RunSpec) -> Result<Vec<AgentRun>> {
    spec.validate()?;
    if spec.agents.is_empty() {
        return Err(Error::Config("no agents configured".into()));
    }
    let instance = spec.instance.build(spec.horizon).map_err(|e| Error::Config(e.to_string()))?;
    spec.agents
        .iter()
        .map(|a| {
            let traces = run_seeds(&instance, spec.horizon, &spec.seeds, || a.build(&instance, spec.horizon))?;
            let summary = aggregate(&traces)?;
            Ok(AgentRun { label: a.label().to_string(), traces, summary })
        })
        .collect()
}

/// Writes per-seed traces and a summary per agent under `dir`. Returns the
/// paths written.
pub fn write_runs(runs: &[AgentRun], dir: &Path, emit: Emit) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for run in runs {
        match emit {
            Emit::Csv => {
                for t in &run.traces {
                    let p = dir.join(format!("{}_seed{}.csv", run.label, t.seed));
                    output::write_file(&p, &trace_to_csv(t))?;
                    written.push(p);
                }
                let p = dir.join(format!("{}_summary.csv", run.label));
                output::write_file(&p, &summary_to_csv(&run.summary)?)?;
                written.push(p);
            }
            Emit::Json => {
                let p = dir.join(format!("{}.json", run.label));
                output::write_file(&p, &output::to_json(run)?)?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

/// Final-regret statistics at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub agent: String,
    pub value: f64,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
    pub min: f64,
    pub max: f64,
}

pub const SWEEP_HEADER: &str = "parameter,value,agent,mean_final_regret,std_final_regret,min,max";

/// Re-runs `spec` at each value of its sweep parameter.
pub fn run_sweep(spec: &RunSpec) -> Result<Vec<SweepPoint>> {
    let sweep = spec.sweep.as_ref().ok_or_else(|| Error::Config("config has no `sweep` section".into()))?;
    let mut points = Vec::new();
    for &value in &sweep.values {
        let mut s = spec.clone();
        s.sweep = None;
        match sweep.parameter {
            SweepParameter::Horizon => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Config(format!("horizon sweep value {value} is not a positive integer")));
                }
                s.horizon = value as usize;
                s.burn_in = s.burn_in.min(s.horizon - 1);
            }
            SweepParameter::Sigma => s.instance.set_sigma(value),
        }
        for run in run_experiment(&s)? {
            let last = run.summary.final_row().expect("nonempty summary");
            points.push(SweepPoint {
                agent: run.label,
                value,
                mean_final_regret: last.mean_cum_regret,
                std_final_regret: last.std_cum_regret,
                min: last.min,
                max: last.max,
            });
        }
    }
    Ok(points)
}

pub fn sweep_to_csv(parameter: SweepParameter, points: &[SweepPoint]) -> String {
    let name = match parameter {
        SweepParameter::Horizon => "horizon",
        SweepParameter::Sigma => "sigma",
    };
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        out.push_str(&format!(
            "{name},{},{},{},{},{},{}\n",
            format_g12(p.value),
            p.agent,
            format_g12(p.mean_final_regret),
            format_g12(p.std_final_regret),
            format_g12(p.min),
            format_g12(p.max)
        ));
    }
    out
}

/// Realized eluder quantities of a recorded action/weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EluderReport {
    pub rounds: usize,
    pub lambda: f64,
    pub dimension: f64,
    /// `D_i` per round.
    pub coefficients: Vec<f64>,
}

/// Eluder dimension of the actions in `rows`, weighted by their recorded
/// weights (1 where blank).
pub fn eluder_report(class: &HypothesisClass, rows: &[TraceRow], lambda: f64) -> Result<EluderReport> {
    let actions: Vec<usize> = rows.iter().map(|r| r.action).collect();
    let weights: Vec<f64> = rows.iter().map(|r| r.weight.unwrap_or(1.0)).collect();
    let coefficients = eluder_trace(class, &actions, &weights, lambda)?;
    let dimension = coefficients.iter().map(|d| (d * d).min(1.0)).sum();
    Ok(EluderReport { rounds: rows.len(), lambda, dimension, coefficients })
}

pub const ELUDER_HEADER: &str = "round,action,weight,coefficient,cumulative_dimension";

pub fn eluder_to_csv(rows: &[TraceRow], report: &EluderReport) -> String {
    let mut out = format!("{ELUDER_HEADER}\n");
    let mut cum = 0.0;
    for (r, d) in rows.iter().zip(&report.coefficients) {
        cum += (d * d).min(1.0);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.round,
            r.action,
            format_g12(r.weight.unwrap_or(1.0)),
            format_g12(*d),
            format_g12(cum)
        ));
    }
    out
}
