//! The variance-agnostic peeling agent: level bookkeeping and variance
//! estimates against the true weighted variance.
//!
//! Run with `cargo run --release --example vacb`.

use catoni_bandits::agents::{Agent, AgentConfig, Mode, Vacb};
use catoni_bandits::harness::config::problem_info;
use catoni_bandits::harness::InstanceSpec;
use catoni_bandits::Error;

fn main() -> catoni_bandits::Result<()> {
    let horizon = 1000;
    let spec: InstanceSpec = serde_json::from_str(r#"{ "preset": "random-class", "sigma": 0.2, "r": 100 }"#)
        .map_err(|e| Error::Config(e.to_string()))?;
    let inst = spec.build(horizon)?;
    let config = AgentConfig { constant_scale: 1e-4, ..AgentConfig::for_horizon(horizon) };
    let mut agent = Vacb::new(inst.class().clone(), config, problem_info(&inst, horizon))?;
    println!("γ = {:.3e}, levels {}..={}", agent.gamma(), agent.l_star(), agent.max_level());
    let mut modes = [0usize; 3];
    for t in 1..=horizon {
        let ctx = inst.context(5, t);
        let d = agent.select(&ctx)?;
        modes[match d.mode {
            Mode::Explore => 0,
            Mode::Exploit => 1,
            Mode::Optimistic => 2,
        }] += 1;
        agent.observe(&d, inst.reward(5, t, d.action)?, None)?;
    }
    println!("explore {} / exploit {}", modes[0], modes[1]);
    println!("{:>5} {:>6} {:>8} {:>12} {:>12}", "level", "|Ψ|", "|F^l|", "Var̂", "Σσ²/w²");
    for level in agent.levels() {
        let h = level.history();
        let truth: f64 = (0..h.len())
            .map(|i| inst.variance_oracle(h.actions[i]).map(|v| v / (h.weights[i] * h.weights[i])))
            .sum::<catoni_bandits::Result<f64>>()?;
        println!(
            "{:>5} {:>6} {:>8} {:>12} {:>12}",
            level.level(),
            h.len(),
            level.version_space().size(),
            level.var_hat().map_or("-".into(), |v| format!("{v:.4}")),
            if h.is_empty() { "-".into() } else { format!("{truth:.4}") }
        );
    }
    Ok(())
}
