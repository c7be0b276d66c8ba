//! Catoni's robust mean estimator and the deviation/sensitivity bounds that
//! accompany it.
//!
//! The estimate is the unique zero of the strictly decreasing map
//! `x ↦ Σ ψ(θ (Z_i − x))`, where `ψ` is the logarithmic influence function
//! [`psi`]. Each sample's pull on the root is bounded by `log`-growth, so a
//! single huge observation moves the estimate by `O(log(θ R) / (θ n))` rather
//! than `R / n` as for the arithmetic mean.
//!
//! Everything here is a pure function of its inputs.

use crate::error::{Error, Result};

/// Influence function: `log(1 + x + x²/2)` for `x ≥ 0`, odd extension below 0.
#[inline]
pub fn psi(x: f64) -> f64 {
    if x >= 0.0 {
        (x + 0.5 * x * x).ln_1p()
    } else {
        -(-x + 0.5 * x * x).ln_1p()
    }
}

/// Derivative of [`psi`]; strictly positive and bounded by 1.
#[inline]
pub fn psi_derivative(x: f64) -> f64 {
    let a = x.abs();
    (1.0 + a) / (1.0 + a + 0.5 * a * a)
}

/// A validated request for a Catoni mean.
#[derive(Debug, Clone, Copy)]
pub struct CatoniQuery<'a> {
    samples: &'a [f64],
    theta: f64,
    tolerance: f64,
    max_iterations: usize,
}

impl<'a> CatoniQuery<'a> {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;
    pub const DEFAULT_MAX_ITERATIONS: usize = 200;

    pub fn new(samples: &'a [f64], theta: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("catoni mean needs at least one sample"));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::invalid(format!("theta must be finite and > 0, got {theta}")));
        }
        if let Some(bad) = samples.iter().find(|z| !z.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {bad}")));
        }
        Ok(Self {
            samples,
            theta,
            tolerance: Self::DEFAULT_TOLERANCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
        })
    }

    /// Absolute tolerance on the root location.
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::invalid(format!("tolerance must be > 0, got {tolerance}")));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        self.max_iterations = max_iterations;
        Ok(self)
    }

    /// Rejects the query if any sample exceeds `range` in magnitude.
    pub fn with_range_bound(self, range: f64) -> Result<Self> {
        if !(range > 0.0) {
            return Err(Error::invalid(format!("range bound must be > 0, got {range}")));
        }
        if let Some(z) = self.samples.iter().find(|z| z.abs() > range) {
            return Err(Error::invalid(format!("sample {z} exceeds range bound {range}")));
        }
        Ok(self)
    }

    pub fn samples(&self) -> &'a [f64] {
        self.samples
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `g(x) = Σ ψ(θ(Z_i − x))`.
    pub fn influence_sum(&self, x: f64) -> f64 {
        self.samples.iter().map(|z| psi(self.theta * (z - x))).sum()
    }

    /// Solves for the root of [`Self::influence_sum`].
    pub fn solve(&self) -> Result<f64> {
        solve_root(self.samples, self.theta, self.tolerance, self.max_iterations)
    }
}

/// Catoni mean of a validated query. See [`CatoniQuery::solve`].
pub fn catoni_mean(query: &CatoniQuery<'_>) -> Result<f64> {
    query.solve()
}

/// Convenience wrapper with the default tolerance and iteration budget.
pub fn catoni(samples: &[f64], theta: f64) -> Result<f64> {
    CatoniQuery::new(samples, theta)?.solve()
}

/// Safeguarded Newton iteration on `h(x) = −Σ ψ(θ(Z_i − x))`, which is
/// strictly increasing. The bracket `[min Z, max Z]` always contains the root,
/// and a bisection step is taken whenever Newton would leave the bracket or
/// stall, so the bracket at least halves every other iteration.
fn solve_root(samples: &[f64], theta: f64, tolerance: f64, max_iterations: usize) -> Result<f64> {
    let (mut lo, mut hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &z| (a.min(z), b.max(z)));
    if samples.len() == 1 || lo == hi {
        return Ok(lo);
    }
    let (min, max) = (lo, hi);

    let eval = |x: f64| -> (f64, f64) {
        let mut h = 0.0;
        let mut dh = 0.0;
        for &z in samples {
            let u = theta * (z - x);
            h -= psi(u);
            dh += psi_derivative(u);
        }
        (h, theta * dh)
    };

    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut x = mean.clamp(lo, hi);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    let (mut h, mut dh) = eval(x);

    for _ in 0..max_iterations {
        if h == 0.0 {
            return Ok(x);
        }
        let newton_leaves = ((x - hi) * dh - h) * ((x - lo) * dh - h) > 0.0;
        let newton_slow = (2.0 * h).abs() > (dx_old * dh).abs();
        if newton_leaves || newton_slow {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
            if x == lo {
                return Ok(x);
            }
        } else {
            dx_old = dx;
            dx = h / dh;
            let prev = x;
            x -= dx;
            if x == prev {
                return Ok(x.clamp(min, max));
            }
        }
        if dx.abs() < tolerance {
            return Ok(x.clamp(min, max));
        }
        (h, dh) = eval(x);
        if h < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        width: hi - lo,
        tolerance,
    })
}

/// Inputs to the uniform-in-θ deviation bound for the Catoni mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationBoundInput {
    /// Upper bound `V` on the summed conditional variances.
    pub variance_budget: f64,
    /// `Σ_i (μ_i − μ̄)²`; zero for identically distributed samples.
    pub mean_spread: f64,
    pub theta: f64,
    /// Number of samples `t`.
    pub sample_count: usize,
    /// The logarithmic factor `ι₀` (see [`uniform_log_factor`]).
    pub log_factor: f64,
    /// Discretization offset `ε`.
    pub offset: f64,
}

impl DeviationBoundInput {
    fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        nonneg("variance_budget", self.variance_budget)?;
        nonneg("mean_spread", self.mean_spread)?;
        nonneg("offset", self.offset)?;
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::invalid(format!("theta must be > 0, got {}", self.theta)));
        }
        if !(self.log_factor.is_finite() && self.log_factor > 0.0) {
            return Err(Error::invalid(format!("log_factor must be > 0, got {}", self.log_factor)));
        }
        if self.sample_count == 0 {
            return Err(Error::invalid("sample_count must be >= 1"));
        }
        Ok(())
    }
}

/// `θ(V + spread)/t + 4ι₀²/(θt) + ε/t`.
pub fn deviation_bound(input: &DeviationBoundInput) -> Result<f64> {
    input.validate()?;
    let t = input.sample_count as f64;
    let theta = input.theta;
    Ok(theta * (input.variance_budget + input.mean_spread) / t
        + 4.0 * input.log_factor * input.log_factor / (theta * t)
        + input.offset / t)
}

/// `ι₀ = sqrt(4 log(48 R (1 + 2AR) t² log(A/a) / (min(1, a) ε² δ)))`, the
/// log factor that makes [`deviation_bound`] hold simultaneously for every
/// `θ ∈ [a, A]` with probability `1 − 2δ`.
pub fn uniform_log_factor(
    range: f64,
    theta_min: f64,
    theta_max: f64,
    sample_count: usize,
    offset: f64,
    delta: f64,
) -> Result<f64> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::invalid(format!("range must be > 0, got {range}")));
    }
    if !(theta_min > 0.0 && theta_max > theta_min && theta_max.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < theta_min < theta_max, got [{theta_min}, {theta_max}]"
        )));
    }
    if !(offset > 0.0 && offset.is_finite()) {
        return Err(Error::invalid(format!("offset must be > 0, got {offset}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be >= 1"));
    }
    let t = sample_count as f64;
    let grid = 48.0 * range * (1.0 + 2.0 * theta_max * range) * t * t * (theta_max / theta_min).ln()
        / (theta_min.min(1.0) * offset * offset * delta);
    let inner = grid.ln().max(f64::MIN_POSITIVE);
    Ok((4.0 * inner).sqrt())
}

/// The θ minimizing [`deviation_bound`] for a fixed `ι₀`: `2ι₀ / sqrt(V + spread)`.
pub fn optimal_theta(variance_total: f64, log_factor: f64) -> f64 {
    2.0 * log_factor / variance_total.sqrt()
}

/// Perturbation size `Δ = (1/t) Σ θ|Z_i − Z̃_i| + 3R|θ − θ̃|` between two
/// Catoni problems of equal length.
pub fn sensitivity_delta(
    samples: &[f64],
    perturbed: &[f64],
    theta: f64,
    theta_perturbed: f64,
    range: f64,
) -> Result<f64> {
    if samples.len() != perturbed.len() || samples.is_empty() {
        return Err(Error::invalid(format!(
            "sample sets must be nonempty and of equal length ({} vs {})",
            samples.len(),
            perturbed.len()
        )));
    }
    let t = samples.len() as f64;
    let drift: f64 = samples.iter().zip(perturbed).map(|(a, b)| (a - b).abs()).sum();
    Ok(theta * drift / t + 3.0 * range * (theta - theta_perturbed).abs())
}

/// Bound on `|Catoni_θ(Z) − Catoni_θ̃(Z̃)|` given the perturbation size `delta`
/// from [`sensitivity_delta`]: `(1 + 2θR)/θ · Δ + sqrt(2Δ/θ²)`.
///
/// Only valid when `Δ ≤ min(1, θ²R²)/18`; otherwise returns
/// [`Error::LemmaInapplicable`].
pub fn sensitivity_bound(delta: f64, theta: f64, range: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite() && range > 0.0 && range.is_finite()) {
        return Err(Error::invalid(format!(
            "theta and range must be > 0, got theta={theta} range={range}"
        )));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta must be finite and >= 0, got {delta}")));
    }
    let limit = (theta * theta * range * range).min(1.0) / 18.0;
    if delta > limit {
        return Err(Error::LemmaInapplicable { delta, limit });
    }
    Ok((1.0 + 2.0 * theta * range) / theta * delta + (2.0 * delta / (theta * theta)).sqrt())
}

/// Arithmetic mean, the non-robust comparator.
pub fn empirical_mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical mean of an empty sample"));
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}
