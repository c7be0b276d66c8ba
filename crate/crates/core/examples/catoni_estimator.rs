//! Catoni mean versus the sample mean on heavy-tailed data.
//!
//! Run with `cargo run --example catoni_estimator`.

use catoni_bandits::environments::heavy_noise;
use catoni_bandits::rng::{self, Domain};
use catoni_bandits::robust_mean::{catoni, empirical_mean, optimal_theta, CatoniQuery};

fn main() -> catoni_bandits::Result<()> {
    let (sigma, r, n) = (0.5, 100.0, 200);
    let noise = heavy_noise(sigma, r)?;
    let theta = optimal_theta(n as f64 * sigma * sigma, (2.0f64 / 0.05).ln().sqrt());
    println!("θ = {theta:.4}");
    println!("{:>6} {:>12} {:>12}  (trials where a tail atom was drawn)", "trial", "catoni", "mean");
    let mut worst = (0.0f64, 0.0f64);
    for trial in 0..1000 {
        let mut g = rng::stream(7, Domain::Concentration, trial);
        let z: Vec<f64> = (0..n).map(|_| noise.sample(&mut g)).collect();
        let c = catoni(&z, theta)?;
        let m = empirical_mean(&z)?;
        worst = (worst.0.max(c.abs()), worst.1.max(m.abs()));
        if z.iter().any(|v| v.abs() > 10.0 * sigma) {
            println!("{trial:>6} {c:>12.5} {m:>12.5}");
        }
    }
    println!("largest |error| over 1000 trials: catoni {:.5}, mean {:.5}", worst.0, worst.1);

    // The solver exposes the influence sum whose root it finds.
    let z = [0.1, -0.4, 0.3, 25.0];
    let q = CatoniQuery::new(&z, 0.5)?;
    let x = q.solve()?;
    println!("catoni{z:?} = {x:.6}, residual {:.2e}", q.influence_sum(x));
    Ok(())
}
