#![allow(dead_code)]

use catoni_bandits::environments::RewardDistribution;
use catoni_bandits::rng::{self, Domain};

/// Standardized errors of the Monte-Carlo mean, variance and `Var[η²]`
/// against a distribution's closed forms. Each estimator uses the known
/// population centre, so its standard error follows from the support alone.
#[derive(Debug, Clone, Copy)]
pub struct MomentZ {
    pub mean: f64,
    pub variance: f64,
    pub variance_of_square: f64,
}

impl MomentZ {
    pub fn max_abs(&self) -> f64 {
        self.mean.abs().max(self.variance.abs()).max(self.variance_of_square.abs())
    }
}

fn expect(support: &[(f64, f64)], g: impl Fn(f64) -> f64) -> f64 {
    support.iter().map(|&(v, p)| p * g(v)).sum()
}

fn z(estimate: f64, target: f64, second_moment: f64, n: usize) -> f64 {
    let se = ((second_moment - target * target).max(0.0) / n as f64).sqrt();
    if se == 0.0 {
        if (estimate - target).abs() <= 1e-12 * (1.0 + target.abs()) { 0.0 } else { f64::INFINITY }
    } else {
        (estimate - target) / se
    }
}

pub fn moment_z(dist: &RewardDistribution, draws: usize, seed: u64) -> MomentZ {
    let support = dist.support();
    let mu = dist.mean();
    let var = dist.variance();
    let vsq = dist.variance_of_square();
    let mut r = rng::stream(seed, Domain::Instance, 0);
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let y = dist.sample(&mut r);
        let e2 = (y - mu) * (y - mu);
        s1 += y;
        s2 += e2;
        s3 += (e2 - var) * (e2 - var);
    }
    let n = draws as f64;
    MomentZ {
        mean: z(s1 / n, mu, expect(&support, |v| v * v), draws),
        variance: z(s2 / n, var, expect(&support, |v| (v - mu).powi(4)), draws),
        variance_of_square: z(s3 / n, vsq, expect(&support, |v| ((v - mu).powi(2) - var).powi(4)), draws),
    }
}
