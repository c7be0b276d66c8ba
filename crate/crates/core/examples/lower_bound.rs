//! The two-armed lower-bound instances and their variances.
//!
//! Run with `cargo run --example lower_bound`.

use catoni_bandits::environments::{lower_bound_arm_variance, lower_bound_epsilon, make_lower_bound_instance, Variant};

fn main() -> catoni_bandits::Result<()> {
    let (sigma, r, horizon) = (0.3, 10.0, 2000);
    let eps = lower_bound_epsilon(sigma, r, horizon);
    println!("σ = {sigma}, R = {r}, T = {horizon} → ε = {eps:.5}");
    for variant in [Variant::Plus, Variant::Minus] {
        let inst = make_lower_bound_instance(sigma, eps, r, variant)?;
        let arm = inst.distribution(1)?;
        println!("{variant:?}: risky arm support {:?}", arm.support());
        println!(
            "  mean {:.5} vs safe arm {:.5}, variance {:.5} ({:.3}σ²)",
            arm.mean(),
            inst.mean_reward(0)?,
            arm.variance(),
            arm.variance() / (sigma * sigma)
        );
    }
    println!("{:>6} {:>10} {:>10}", "ε/σ", "V⁺/σ²", "V⁻/σ²");
    for k in 0..=5 {
        let e = sigma * k as f64 / 10.0;
        println!(
            "{:>6.2} {:>10.4} {:>10.4}",
            e / sigma,
            lower_bound_arm_variance(sigma, e, r, Variant::Plus) / (sigma * sigma),
            lower_bound_arm_variance(sigma, e, r, Variant::Minus) / (sigma * sigma)
        );
    }
    Ok(())
}
