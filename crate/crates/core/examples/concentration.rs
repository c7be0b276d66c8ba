//! Monte-Carlo check of the uniform-in-θ deviation bound.
//!
//! Run with `cargo run --release --example concentration`.

use catoni_bandits::harness::{concentration_experiment, ConcentrationSpec};

fn main() -> catoni_bandits::Result<()> {
    let spec = ConcentrationSpec {
        sigma: 0.5,
        r: 100.0,
        n: 200,
        trials: 2000,
        delta: 0.05,
        offset: 1.0,
        grid_points: 9,
        seed: 0,
    };
    let rep = concentration_experiment(&spec)?;
    println!("θ⋆ = {:.4}, ι₀ = {:.3}", rep.theta_star, rep.log_factor);
    for (theta, bound) in rep.theta_grid.iter().zip(&rep.bounds) {
        println!("  θ = {theta:.4}  bound = {bound:.4}");
    }
    println!("failure fraction {:.4} (δ = {})", rep.failure_fraction, rep.delta);
    println!("{:>8} {:>10} {:>10}", "quantile", "catoni", "mean");
    for i in 0..rep.quantile_levels.len() {
        println!(
            "{:>8} {:>10.5} {:>10.5}",
            rep.quantile_levels[i], rep.catoni_quantiles[i], rep.mean_quantiles[i]
        );
    }
    Ok(())
}
