//! All four agents on one instance, averaged over seeds. Optionally takes a
//! JSON run configuration as its only argument.
//!
//! Run with `cargo run --release --example regret_comparison [config.json]`.

use std::path::Path;

use catoni_bandits::harness::{run_experiment, RunSpec};

const DEFAULT: &str = r#"{
  "instance": { "preset": "bernoulli-scaled", "sigma": 0.1, "r": 100 },
  "agents": [
    { "preset": "catoni-oful", "constant_scale": 0.7 },
    { "preset": "catoni-oful-cs", "constant_scale": 0.1 },
    { "preset": "vacb", "constant_scale": 0.0001 },
    { "preset": "oful-ls", "constant_scale": 0.7 }
  ],
  "horizon": 2000,
  "seeds": [1, 2, 3, 4, 5, 6, 7, 8],
  "burn_in": 200
}"#;

fn main() -> catoni_bandits::Result<()> {
    let spec = match std::env::args().nth(1) {
        Some(path) => RunSpec::load(Path::new(&path))?,
        None => RunSpec::from_json(DEFAULT, Path::new("built-in"))?,
    };
    let runs = run_experiment(&spec)?;
    let checkpoints: Vec<usize> = (1..=4).map(|k| spec.horizon * k / 4).collect();
    print!("{:<16}", "agent");
    for t in &checkpoints {
        print!(" {:>14}", format!("t={t}"));
    }
    println!(" {:>9}", "coverage");
    for run in &runs {
        print!("{:<16}", run.label);
        for &t in &checkpoints {
            let row = &run.summary.rows[t - 1];
            print!(" {:>14}", format!("{:.1}±{:.1}", row.mean_cum_regret, row.std_cum_regret));
        }
        println!(" {:>9.2}", run.coverage_rate(spec.burn_in));
    }
    Ok(())
}
