//! Monte-Carlo validation of the Catoni deviation bound.

use serde::{Deserialize, Serialize};

use super::config::ConcentrationSpec;
use crate::environments::{heavy_noise, RewardDistribution};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::robust_mean::{catoni, deviation_bound, empirical_mean, uniform_log_factor, DeviationBoundInput};

/// Quantile levels reported for both estimators.
pub const QUANTILES: [f64; 4] = [0.5, 0.9, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub trials: usize,
    pub n: usize,
    pub delta: f64,
    /// `ι₀` for the range `[θ⋆/4, 4θ⋆]`.
    pub log_factor: f64,
    pub theta_star: f64,
    pub theta_grid: Vec<f64>,
    /// The deviation bound at each grid point.
    pub bounds: Vec<f64>,
    /// Fraction of trials in which some grid `θ` violated its bound.
    pub failure_fraction: f64,
    pub quantile_levels: Vec<f64>,
    /// Error quantiles of the Catoni mean at `θ⋆`.
    pub catoni_quantiles: Vec<f64>,
    pub mean_quantiles: Vec<f64>,
}

/// Nearest-rank quantile of an ascending slice.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Runs the experiment described by `spec` on centered heavy-tailed noise.
pub fn concentration_experiment(spec: &ConcentrationSpec) -> Result<ConcentrationReport> {
    let dist = heavy_noise(spec.sigma, spec.r)?;
    concentration_on(&dist, spec.r, spec)
}

/// Runs the experiment on an arbitrary distribution with almost-sure noise
/// bound `range`.
pub fn concentration_on(dist: &RewardDistribution, range: f64, spec: &ConcentrationSpec) -> Result<ConcentrationReport> {
    if spec.n == 0 || spec.trials == 0 || spec.grid_points == 0 {
        return Err(Error::invalid("n, trials and grid_points must be >= 1"));
    }
    let n = spec.n;
    let total_variance = n as f64 * dist.variance();
    let mu = dist.mean();

    // θ⋆ = 2ι₀/sqrt(V) where ι₀ itself depends on the range [θ⋆/4, 4θ⋆].
    let mut theta_star = 1.0;
    let mut log_factor = 1.0;
    for _ in 0..100 {
        log_factor = uniform_log_factor(range, theta_star / 4.0, 4.0 * theta_star, n, spec.offset, spec.delta)?;
        let next = if total_variance > 0.0 { 2.0 * log_factor / total_variance.sqrt() } else { 4.0 * theta_star };
        let done = ((next - theta_star) / theta_star).abs() < 1e-12;
        theta_star = next;
        if done || total_variance == 0.0 {
            break;
        }
    }
    if total_variance > 0.0 {
        log_factor = uniform_log_factor(range, theta_star / 4.0, 4.0 * theta_star, n, spec.offset, spec.delta)?;
    }

    let theta_grid: Vec<f64> = if spec.grid_points == 1 {
        vec![theta_star]
    } else {
        (0..spec.grid_points)
            .map(|k| theta_star / 4.0 * 16f64.powf(k as f64 / (spec.grid_points - 1) as f64))
            .collect()
    };
    let bounds = theta_grid
        .iter()
        .map(|&theta| {
            deviation_bound(&DeviationBoundInput {
                variance_budget: total_variance,
                mean_spread: 0.0,
                theta,
                sample_count: n,
                log_factor,
                offset: spec.offset,
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut failures = 0usize;
    let mut catoni_err = Vec::with_capacity(spec.trials);
    let mut mean_err = Vec::with_capacity(spec.trials);
    let mut samples = vec![0.0; n];
    for trial in 0..spec.trials {
        let mut r = rng::stream(spec.seed, Domain::Concentration, trial as u64);
        for s in samples.iter_mut() {
            *s = dist.sample(&mut r);
        }
        let mut failed = false;
        for (&theta, &bound) in theta_grid.iter().zip(&bounds) {
            if (catoni(&samples, theta)? - mu).abs() > bound {
                failed = true;
            }
        }
        failures += usize::from(failed);
        catoni_err.push((catoni(&samples, theta_star)? - mu).abs());
        mean_err.push((empirical_mean(&samples)? - mu).abs());
    }
    catoni_err.sort_by(f64::total_cmp);
    mean_err.sort_by(f64::total_cmp);
    Ok(ConcentrationReport {
        trials: spec.trials,
        n,
        delta: spec.delta,
        log_factor,
        theta_star,
        theta_grid,
        bounds,
        failure_fraction: failures as f64 / spec.trials as f64,
        quantile_levels: QUANTILES.to_vec(),
        catoni_quantiles: QUANTILES.iter().map(|&q| nearest_rank(&catoni_err, q)).collect(),
        mean_quantiles: QUANTILES.iter().map(|&q| nearest_rank(&mean_err, q)).collect(),
    })
}
