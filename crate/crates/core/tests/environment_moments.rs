mod common;

use std::sync::Arc;

use catoni_bandits::environments::{
    bernoulli_noise, heavy_noise, lower_bound_arm, lower_bound_arm_variance, make_lower_bound_instance, with_noise,
    ContextSchedule, Instance, RewardDistribution, Variant,
};
use catoni_bandits::hypothesis::HypothesisClass;
use catoni_bandits::Error;
use common::moment_z;

const DRAWS: usize = 1_000_000;

#[test]
fn closed_form_moments_match_monte_carlo() {
    let dists = [
        ("three-point", RewardDistribution::three_point([0.0, 1.0, 5.0], [0.5, 0.45, 0.05]).unwrap()),
        ("bernoulli", RewardDistribution::bernoulli_scaled(0.01, 100.0).unwrap()),
        ("heavy", heavy_noise(0.2, 100.0).unwrap()),
        ("bernoulli noise", bernoulli_noise(0.3, 50.0).unwrap().shifted(0.4)),
        ("lb plus", lower_bound_arm(0.3, 0.1, 10.0).unwrap()),
        ("lb minus", lower_bound_arm(0.3, -0.1, 10.0).unwrap()),
    ];
    for (i, (name, d)) in dists.iter().enumerate() {
        let z = moment_z(d, DRAWS, 11 + i as u64);
        assert!(z.max_abs() < 4.0, "{name}: {z:?}");
    }
}

#[test]
fn deterministic_and_degenerate_bernoulli_are_constant() {
    let d = RewardDistribution::deterministic(0.25).unwrap();
    let b = RewardDistribution::bernoulli_scaled(0.0, 100.0).unwrap();
    let mut r = catoni_bandits::rng::stream(1, catoni_bandits::rng::Domain::Reward, 0);
    for _ in 0..1000 {
        assert_eq!(d.sample(&mut r), 0.25);
        assert_eq!(b.sample(&mut r), 0.0);
    }
    assert_eq!(b.variance(), 0.0);
}

#[test]
fn noise_generators_hit_their_variance() {
    for (s, r) in [(0.05, 100.0), (0.4, 100.0), (0.2, 3.0)] {
        let h = heavy_noise(s, r).unwrap();
        assert!(h.mean().abs() < 1e-15);
        assert!((h.variance() - s * s).abs() < 1e-12 * s * s.max(1.0));
        assert!(h.noise_extent() <= 1.2 * s * r);
        let b = bernoulli_noise(s, r).unwrap();
        assert!((b.variance() - s * s).abs() < 1e-12);
        assert!(b.noise_extent() <= r);
    }
}

#[test]
fn bernoulli_variance_identity() {
    for (p, r) in [(0.1, 1.0), (0.003, 100.0), (0.5, 2.0)] {
        let d = RewardDistribution::bernoulli_scaled(p, r).unwrap();
        assert!((d.variance() - r * r * p * (1.0 - p)).abs() < 1e-12 * r * r);
    }
}

#[test]
fn lower_bound_plus_variance_matches_the_closed_form() {
    let (s, e, r) = (0.4, 0.15, 7.0);
    let inst = make_lower_bound_instance(s, e, r, Variant::Plus).unwrap();
    let g = 1.0 + 1.0 / r;
    let want = (s + e) * (4.0 * s - g * g * s - g * g * e);
    assert!((inst.variance_oracle(1).unwrap() - want).abs() < 1e-14);
    assert!((lower_bound_arm_variance(s, e, r, Variant::Plus) - want).abs() < 1e-14);
    assert!(want <= 6.0 * s * s);
    assert_eq!(inst.variance_oracle(0).unwrap(), 0.0);
}

#[test]
fn lower_bound_parameter_range_is_enforced() {
    assert!(make_lower_bound_instance(0.6, 0.1, 10.0, Variant::Plus).is_err());
    assert!(make_lower_bound_instance(0.3, 0.2, 10.0, Variant::Plus).is_err());
    assert!(make_lower_bound_instance(0.3, 0.1, 1.5, Variant::Minus).is_err());
    assert!(make_lower_bound_instance(0.3, 0.15, 10.0, Variant::Minus).is_ok());
}

#[test]
fn realizability_and_noise_range_are_checked() {
    let class = Arc::new(HypothesisClass::new(vec![vec![0.2, 0.5], vec![0.1, 0.9]], 1.0).unwrap());
    let off = vec![RewardDistribution::deterministic(0.2).unwrap(), RewardDistribution::deterministic(0.6).unwrap()];
    assert!(Instance::new(class.clone(), 0, off, 1.0, ContextSchedule::Full).is_err());
    let wide = heavy_noise(0.1, 100.0).unwrap();
    assert!(with_noise(class.clone(), 0, wide, 1.0, ContextSchedule::Full).is_err());
    let inst = with_noise(class.clone(), 1, wide, 20.0, ContextSchedule::Full).unwrap();
    assert!((inst.sigma_eta() - 0.1).abs() < 1e-12);
    let want_c = wide.variance_of_square() / wide.variance();
    assert!((inst.c_eta() - want_c).abs() < 1e-9 * want_c);
    assert!(inst.clone().with_c_eta(want_c / 2.0).is_err());
    assert!(inst.with_c_eta(want_c * 2.0).is_ok());
}

#[test]
fn unknown_actions_are_reported() {
    let inst = make_lower_bound_instance(0.3, 0.1, 10.0, Variant::Plus).unwrap();
    assert!(matches!(inst.reward(0, 1, 5), Err(Error::UnknownAction { action: 5, universe: 2 })));
    assert!(inst.variance_oracle(2).is_err());
}

#[test]
fn rewards_are_reproducible_per_round() {
    let class = Arc::new(HypothesisClass::new(vec![vec![0.0, 0.5, 1.0]], 1.0).unwrap());
    let inst = with_noise(class, 0, heavy_noise(0.3, 10.0).unwrap(), 10.0, ContextSchedule::SeededRandomSubsets(2))
        .unwrap();
    let a: Vec<f64> = (1..200).map(|t| inst.reward(9, t, t % 3).unwrap()).collect();
    let b: Vec<f64> = (1..200).rev().map(|t| inst.reward(9, t, t % 3).unwrap()).collect::<Vec<_>>().into_iter().rev().collect();
    assert_eq!(a, b);
    let c1: Vec<Vec<usize>> = (1..50).map(|t| inst.context(4, t)).collect();
    let c2: Vec<Vec<usize>> = (1..50).map(|t| inst.context(4, t)).collect();
    assert_eq!(c1, c2);
    assert!(c1.iter().all(|c| c.len() == 2 && c[0] < c[1]));
    assert_ne!((1..50).map(|t| inst.context(5, t)).collect::<Vec<_>>(), c1);
}

#[test]
fn schedules_produce_valid_subsets() {
    let class = Arc::new(HypothesisClass::new(vec![vec![0.0; 5]], 1.0).unwrap());
    let noise = RewardDistribution::deterministic(0.0).unwrap();
    let rr = with_noise(class.clone(), 0, noise, 1.0, ContextSchedule::RoundRobinSubsets(2)).unwrap();
    assert_eq!(rr.context(0, 1), vec![0, 1]);
    assert_eq!(rr.context(0, 2), vec![2, 3]);
    assert_eq!(rr.context(0, 3), vec![0, 4]);
    let fixed = with_noise(class.clone(), 0, noise, 1.0, ContextSchedule::Fixed(vec![3, 1])).unwrap();
    assert_eq!(fixed.context(0, 7), vec![3, 1]);
    assert!(with_noise(class.clone(), 0, noise, 1.0, ContextSchedule::Fixed(vec![9])).is_err());
    assert!(with_noise(class, 0, noise, 1.0, ContextSchedule::SeededRandomSubsets(6)).is_err());
}

#[test]
fn instant_regret_is_nonnegative_and_zero_at_the_argmax() {
    let (s, e, r) = (0.3, 0.1, 10.0);
    let minus = make_lower_bound_instance(s, e, r, Variant::Minus).unwrap();
    assert_eq!(minus.instant_regret(&[0, 1], 0).unwrap(), 0.0);
    assert!((minus.instant_regret(&[0, 1], 1).unwrap() - e * (1.0 + 1.0 / r)).abs() < 1e-14);
}
