//! Robust excess losses and the min-max estimator built from them.
//!
//! For a candidate `f` and a competitor `g`, the excess loss is
//! `V(f,g) + 2n·Catoni_θ({Z_i})` with `Z_i = (f(x_i) − g(x_i))(g(x_i) − y_i)/w_i²`,
//! a robust stand-in for the weighted squared-loss difference of `f` over `g`.

use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, PairAccumulator};
use crate::robust_mean::CatoniQuery;

/// Observations with their weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedHistory {
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedHistory {
    pub fn push(&mut self, action: usize, reward: f64, weight: f64) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.weights.push(weight);
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Everything an excess-loss evaluation reads.
#[derive(Debug, Clone, Copy)]
pub struct LossContext<'a> {
    pub class: &'a HypothesisClass,
    pub acc: &'a PairAccumulator,
    pub history: &'a WeightedHistory,
    pub tolerance: f64,
}

/// Inputs to the θ rule for one `(f, g)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    /// `V(f, g)`.
    pub distance: f64,
    /// `Σ_i (f(x_i) − g(x_i))⁴ / w_i⁴`.
    pub quartic: f64,
}

/// Evaluates the robust excess loss of `f` over `g`; `buf` is scratch space.
pub fn excess_loss<T>(ctx: &LossContext<'_>, f: usize, g: usize, theta: &T, buf: &mut Vec<f64>) -> Result<f64>
where
    T: Fn(PairStats) -> f64,
{
    let h = ctx.history;
    if f == g || h.is_empty() {
        return Ok(0.0);
    }
    let rf = ctx.class.row(f);
    let rg = ctx.class.row(g);
    buf.clear();
    let mut quartic = 0.0;
    for i in 0..h.len() {
        let x = h.actions[i];
        let inv = 1.0 / (h.weights[i] * h.weights[i]);
        let diff = rf[x] - rg[x];
        let d2 = diff * diff * inv;
        quartic += d2 * d2;
        buf.push(diff * (rg[x] - h.rewards[i]) * inv);
    }
    let distance = ctx.acc.distance(f, g);
    let th = theta(PairStats { distance, quartic });
    if !(th.is_finite() && th > 0.0) {
        return Err(Error::invalid(format!("robustness parameter evaluated to {th}")));
    }
    let center = CatoniQuery::new(buf, th)?.with_tolerance(ctx.tolerance)?.solve()?;
    Ok(distance + 2.0 * h.len() as f64 * center)
}

/// `argmin_{f ∈ members} max_{g ∈ members} loss(f, g)`, lowest index on ties.
///
/// `incumbent` (which must be a member) is scored first so that later
/// candidates can stop as soon as their running max exceeds the best value.
pub fn minmax<T>(ctx: &LossContext<'_>, members: &[usize], incumbent: usize, theta: &T) -> Result<usize>
where
    T: Fn(PairStats) -> f64,
{
    if members.is_empty() {
        return Err(Error::invalid("min-max over an empty set"));
    }
    if members.len() == 1 || ctx.history.is_empty() {
        return Ok(members[0]);
    }
    let mut buf = Vec::with_capacity(ctx.history.len());
    let incumbent = if members.contains(&incumbent) { incumbent } else { members[0] };
    let mut best_idx = incumbent;
    let mut best_val = worst_case(ctx, members, incumbent, theta, &mut buf, None)?.unwrap_or(f64::INFINITY);
    for &f in members {
        if f == incumbent {
            continue;
        }
        // A lower index wins a tie, a higher one must strictly improve.
        let bound = (best_val, f < best_idx);
        if let Some(v) = worst_case(ctx, members, f, theta, &mut buf, Some(bound))? {
            if v < best_val || (v == best_val && f < best_idx) {
                best_val = v;
                best_idx = f;
            }
        }
    }
    Ok(best_idx)
}

/// `max_g loss(f, g)`, or `None` once it provably cannot beat `bound`.
fn worst_case<T>(
    ctx: &LossContext<'_>,
    members: &[usize],
    f: usize,
    theta: &T,
    buf: &mut Vec<f64>,
    bound: Option<(f64, bool)>,
) -> Result<Option<f64>>
where
    T: Fn(PairStats) -> f64,
{
    let mut worst = 0.0f64;
    for &g in members {
        if g == f {
            continue;
        }
        worst = worst.max(excess_loss(ctx, f, g, theta, buf)?);
        if let Some((b, wins_tie)) = bound {
            if worst > b || (worst == b && !wins_tie) {
                return Ok(None);
            }
        }
    }
    Ok(Some(worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (HypothesisClass, PairAccumulator, WeightedHistory) {
        let class = HypothesisClass::new(
            vec![vec![0.0, 0.2], vec![0.5, 0.5], vec![1.0, 0.9]],
            1.0,
        )
        .unwrap();
        let mut acc = PairAccumulator::for_class(&class);
        let mut h = WeightedHistory::default();
        for (x, y, w) in [(0, 0.45, 1.0), (1, 0.6, 0.5), (0, 0.55, 2.0), (1, 0.4, 1.0)] {
            acc.update(&class, x, w).unwrap();
            h.push(x, y, w);
        }
        (class, acc, h)
    }

    #[test]
    fn self_loss_is_zero() {
        let (class, acc, h) = setup();
        let ctx = LossContext { class: &class, acc: &acc, history: &h, tolerance: 1e-10 };
        let theta = |_: PairStats| 1.0;
        let mut buf = Vec::new();
        for f in 0..3 {
            assert_eq!(excess_loss(&ctx, f, f, &theta, &mut buf).unwrap(), 0.0);
        }
        let empty = WeightedHistory::default();
        let acc0 = PairAccumulator::for_class(&class);
        let ctx0 = LossContext { class: &class, acc: &acc0, history: &empty, tolerance: 1e-10 };
        assert_eq!(excess_loss(&ctx0, 0, 2, &theta, &mut buf).unwrap(), 0.0);
    }

    #[test]
    fn minmax_picks_the_data_fit() {
        let (class, acc, h) = setup();
        let ctx = LossContext { class: &class, acc: &acc, history: &h, tolerance: 1e-10 };
        let theta = |s: PairStats| 2.0 / (s.distance + 1e-6).sqrt();
        for inc in 0..3 {
            assert_eq!(minmax(&ctx, &[0, 1, 2], inc, &theta).unwrap(), 1);
        }
        assert_eq!(minmax(&ctx, &[2], 2, &theta).unwrap(), 2);
    }
}
