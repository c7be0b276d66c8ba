//! Finite hypothesis classes and the weighted-distance machinery built on them.
//!
//! A [`HypothesisClass`] is a dense `N × M` value table: row `f` holds
//! `f(x)` for each of the `M` actions. The [`PairAccumulator`] keeps the
//! weighted Gram matrix `G[a][b] = Σ_i f_a(x_i) f_b(x_i) / w_i²`, from which
//! any weighted in-sample distance `V(f_a, f_b) = G_aa − 2G_ab + G_bb` is read
//! in constant time.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A finite set of reward functions over a finite action universe.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisClass {
    values: Vec<f64>,
    n_functions: usize,
    n_actions: usize,
    range_bound: f64,
    action_labels: Vec<String>,
}

impl HypothesisClass {
    /// Builds a class from rows of per-action values. Every entry must satisfy
    /// `|f(x)| ≤ range_bound`.
    pub fn new(rows: Vec<Vec<f64>>, range_bound: f64) -> Result<Self> {
        let n_functions = rows.len();
        if n_functions == 0 {
            return Err(Error::invalid("hypothesis class needs at least one function"));
        }
        let n_actions = rows[0].len();
        if n_actions == 0 {
            return Err(Error::invalid("hypothesis class needs at least one action"));
        }
        if !(range_bound.is_finite() && range_bound > 0.0) {
            return Err(Error::invalid(format!("range bound must be > 0, got {range_bound}")));
        }
        let mut values = Vec::with_capacity(n_functions * n_actions);
        for (f, row) in rows.into_iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::invalid(format!(
                    "function {f} has {} values, expected {n_actions}",
                    row.len()
                )));
            }
            for (x, v) in row.iter().enumerate() {
                if !v.is_finite() || v.abs() > range_bound {
                    return Err(Error::invalid(format!(
                        "f{f}(x{x}) = {v} violates range bound {range_bound}"
                    )));
                }
            }
            values.extend(row);
        }
        let action_labels = (0..n_actions).map(|x| format!("x{x}")).collect();
        Ok(Self { values, n_functions, n_actions, range_bound, action_labels })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_actions {
            return Err(Error::invalid(format!(
                "{} labels for {} actions",
                labels.len(),
                self.n_actions
            )));
        }
        self.action_labels = labels;
        Ok(self)
    }

    /// Linear class `f_θ(x) = θᵀφ(x)` for each parameter vector in `params`.
    /// When `range_bound` is `None` the tightest bound (at least 1e-12) is used.
    pub fn linear(params: &[Vec<f64>], features: &[Vec<f64>], range_bound: Option<f64>) -> Result<Self> {
        let d = features.first().map_or(0, Vec::len);
        if features.iter().any(|p| p.len() != d) || params.iter().any(|t| t.len() != d) {
            return Err(Error::invalid("inconsistent feature/parameter dimensions"));
        }
        let rows: Vec<Vec<f64>> = params
            .iter()
            .map(|theta| features.iter().map(|phi| dot(theta, phi)).collect())
            .collect();
        let tight = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        Self::new(rows, range_bound.unwrap_or(tight))
    }

    #[inline]
    pub fn value(&self, f: usize, x: usize) -> f64 {
        self.values[f * self.n_actions + x]
    }

    pub fn row(&self, f: usize) -> &[f64] {
        &self.values[f * self.n_actions..(f + 1) * self.n_actions]
    }

    pub fn n_functions(&self) -> usize {
        self.n_functions
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// The bound `L_f` on `|f(x)|`.
    pub fn range_bound(&self) -> f64 {
        self.range_bound
    }

    pub fn action_labels(&self) -> &[String] {
        &self.action_labels
    }

    pub fn check_action(&self, x: usize) -> Result<()> {
        if x < self.n_actions {
            Ok(())
        } else {
            Err(Error::UnknownAction { action: x, universe: self.n_actions })
        }
    }

    /// Index of the first function whose row equals `row` exactly.
    pub fn find(&self, row: &[f64]) -> Option<usize> {
        (0..self.n_functions).find(|&f| self.row(f) == row)
    }

    /// Parses the plain-text format: a header line `N M L_f` followed by `N`
    /// whitespace-separated rows of `M` reals. Blank lines and `#` comments
    /// are ignored.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse { path: origin.to_path_buf(), message };
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| parse_err("missing header line".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(format!("header must be `N M L_f`, got `{header}`")));
        }
        let n: usize = parts[0].parse().map_err(|_| parse_err(format!("bad N `{}`", parts[0])))?;
        let m: usize = parts[1].parse().map_err(|_| parse_err(format!("bad M `{}`", parts[1])))?;
        let lf: f64 = parts[2].parse().map_err(|_| parse_err(format!("bad L_f `{}`", parts[2])))?;
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|_| parse_err(format!("row {i}: bad number `{tok}`"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != m {
                return Err(parse_err(format!("row {i} has {} values, expected {m}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(parse_err(format!("expected {n} rows, found {}", rows.len())));
        }
        Self::new(rows, lf).map_err(|e| parse_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Serializes to the format read by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n_functions, self.n_actions, self.range_bound);
        for f in 0..self.n_functions {
            let row: Vec<String> = self.row(f).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// All points of the grid `{−h, …, h}^d` with `per_axis` evenly spaced
/// values per coordinate, in lexicographic order.
pub fn grid_parameters(d: usize, per_axis: usize, half_width: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if per_axis == 1 {
        vec![0.0]
    } else {
        (0..per_axis)
            .map(|k| -half_width + 2.0 * half_width * k as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let mut out = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted Gram matrix over the whole class, updated one observation at a
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAccumulator {
    n: usize,
    gram: Vec<f64>,
    count: usize,
}

impl PairAccumulator {
    pub fn new(n_functions: usize) -> Self {
        Self { n: n_functions, gram: vec![0.0; n_functions * n_functions], count: 0 }
    }

    pub fn for_class(class: &HypothesisClass) -> Self {
        Self::new(class.n_functions())
    }

    /// Adds `f_a(x) f_b(x) / weight²` to every entry.
    pub fn update(&mut self, class: &HypothesisClass, x: usize, weight: f64) -> Result<()> {
        class.check_action(x)?;
        if class.n_functions() != self.n {
            return Err(Error::invalid("accumulator and class disagree on class size"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid(format!("weight must be finite and > 0, got {weight}")));
        }
        let inv = 1.0 / (weight * weight);
        for a in 0..self.n {
            let va = class.value(a, x) * inv;
            for b in a..self.n {
                let add = va * class.value(b, x);
                self.gram[a * self.n + b] += add;
                if a != b {
                    self.gram[b * self.n + a] += add;
                }
            }
        }
        self.count += 1;
        Ok(())
    }

    #[inline]
    pub fn gram(&self, a: usize, b: usize) -> f64 {
        self.gram[a * self.n + b]
    }

    /// `V(f_a, f_b)`; see [`pair_distance`].
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        (self.gram(a, a) - 2.0 * self.gram(a, b) + self.gram(b, b)).max(0.0)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn n_functions(&self) -> usize {
        self.n
    }
}

/// Weighted squared in-sample distance `Σ_i (f_a(x_i) − f_b(x_i))² / w_i²`,
/// floored at 0.
pub fn pair_distance(acc: &PairAccumulator, a: usize, b: usize) -> f64 {
    acc.distance(a, b)
}

/// Eluder coefficient at `x` over the functions flagged in `active`:
/// the largest `|f₁(x) − f₂(x)| / σ̄` divided by `sqrt(V(f₁,f₂) + λ)`.
pub fn eluder_coefficient(
    class: &HypothesisClass,
    acc: &PairAccumulator,
    active: &[bool],
    x: usize,
    sigma_bar: f64,
    lambda: f64,
) -> Result<f64> {
    if active.len() != class.n_functions() {
        return Err(Error::invalid("active mask length differs from class size"));
    }
    let members: Vec<usize> = (0..active.len()).filter(|&f| active[f]).collect();
    eluder_coefficient_over(class, acc, &members, x, sigma_bar, lambda)
}

/// As [`eluder_coefficient`], with the active set given as an index list.
pub fn eluder_coefficient_over(
    class: &HypothesisClass,
    acc: &PairAccumulator,
    members: &[usize],
    x: usize,
    sigma_bar: f64,
    lambda: f64,
) -> Result<f64> {
    class.check_action(x)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    if !(sigma_bar.is_finite() && sigma_bar > 0.0) {
        return Err(Error::invalid(format!("sigma_bar must be > 0, got {sigma_bar}")));
    }
    let mut best = 0.0f64;
    for (i, &a) in members.iter().enumerate() {
        let va = class.value(a, x);
        for &b in &members[i + 1..] {
            let gap = (va - class.value(b, x)).abs();
            if gap == 0.0 {
                continue;
            }
            let d = gap / sigma_bar / (acc.distance(a, b) + lambda).sqrt();
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Per-step eluder coefficients `D(x_i, σ̄_i; x_[i−1], σ̄_[i−1])` over the
/// full class for a given action/weight sequence.
pub fn eluder_trace(
    class: &HypothesisClass,
    actions: &[usize],
    sigma_bars: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    if actions.len() != sigma_bars.len() {
        return Err(Error::invalid(format!(
            "{} actions but {} weights",
            actions.len(),
            sigma_bars.len()
        )));
    }
    let all: Vec<usize> = (0..class.n_functions()).collect();
    let mut acc = PairAccumulator::for_class(class);
    let mut out = Vec::with_capacity(actions.len());
    for (&x, &s) in actions.iter().zip(sigma_bars) {
        out.push(eluder_coefficient_over(class, &acc, &all, x, s, lambda)?);
        acc.update(class, x, s)?;
    }
    Ok(out)
}

/// Realized eluder dimension `Σ_i min(1, D_i²)` of a given sequence. Every
/// weight must be at least `alpha`.
pub fn eluder_dimension(
    class: &HypothesisClass,
    actions: &[usize],
    sigma_bars: &[f64],
    lambda: f64,
    alpha: f64,
) -> Result<f64> {
    if let Some(s) = sigma_bars.iter().find(|&&s| !(s >= alpha)) {
        return Err(Error::invalid(format!("weight {s} is below the floor {alpha}")));
    }
    Ok(eluder_trace(class, actions, sigma_bars, lambda)?
        .into_iter()
        .map(|d| (d * d).min(1.0))
        .sum())
}

/// `‖φ(x)/σ̄‖²` in the inverse of `Σ = λI + Σ_i φ_iφ_iᵀ/σ̄_i²`.
pub fn linear_eluder_upper(
    features: &[Vec<f64>],
    sigma_bars: &[f64],
    x_feature: &[f64],
    sigma_bar: f64,
    lambda: f64,
) -> Result<f64> {
    let d = x_feature.len();
    if features.len() != sigma_bars.len() || features.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("inconsistent feature dimensions or weight count"));
    }
    if !(lambda > 0.0 && sigma_bar > 0.0) {
        return Err(Error::invalid("lambda and sigma_bar must be > 0"));
    }
    let mut cov = DMatrix::<f64>::identity(d, d) * lambda;
    for (phi, &s) in features.iter().zip(sigma_bars) {
        let v = DVector::from_column_slice(phi);
        cov += (&v * v.transpose()) / (s * s);
    }
    let u = DVector::from_column_slice(x_feature) / sigma_bar;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::invalid("regularized covariance is not positive definite"))?;
    Ok(u.dot(&chol.solve(&u)))
}

/// The functions still considered plausible, with the current estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSpace {
    active: Vec<bool>,
    estimator: usize,
    radius_sq: f64,
}

impl VersionSpace {
    /// Every function active, infinite radius.
    pub fn full(n_functions: usize, estimator: usize) -> Self {
        Self { active: vec![true; n_functions], estimator, radius_sq: f64::INFINITY }
    }

    pub fn from_mask(active: Vec<bool>, estimator: usize, radius_sq: f64) -> Result<Self> {
        if !active.get(estimator).copied().unwrap_or(false) {
            return Err(Error::invalid(format!("estimator {estimator} is not active")));
        }
        if !(radius_sq >= 0.0) {
            return Err(Error::invalid(format!("radius_sq must be >= 0, got {radius_sq}")));
        }
        Ok(Self { active, estimator, radius_sq })
    }

    pub fn mask(&self) -> &[bool] {
        &self.active
    }

    pub fn contains(&self, f: usize) -> bool {
        self.active.get(f).copied().unwrap_or(false)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&f| self.active[f]).collect()
    }

    pub fn size(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn estimator(&self) -> usize {
        self.estimator
    }

    pub fn radius_sq(&self) -> f64 {
        self.radius_sq
    }

    /// Re-checks the radius condition against `acc`.
    pub fn is_consistent(&self, acc: &PairAccumulator) -> bool {
        self.contains(self.estimator)
            && self.members().iter().all(|&f| acc.distance(f, self.estimator) <= self.radius_sq)
    }
}

/// Keeps the members of `active` within `radius_sq` of `estimator`.
pub fn refit_version_space(
    acc: &PairAccumulator,
    active: &[bool],
    estimator: usize,
    radius_sq: f64,
) -> Result<VersionSpace> {
    if !active.get(estimator).copied().unwrap_or(false) {
        return Err(Error::invalid(format!("estimator {estimator} is not active")));
    }
    if active.len() != acc.n_functions() {
        return Err(Error::invalid("active mask length differs from accumulator size"));
    }
    let mask = active
        .iter()
        .enumerate()
        .map(|(f, &on)| on && (f == estimator || acc.distance(f, estimator) <= radius_sq))
        .collect();
    VersionSpace::from_mask(mask, estimator, radius_sq)
}
