//! Catoni-OFUL on a random class with heavy-tailed noise, round by round.
//!
//! Run with `cargo run --release --example catoni_oful`.

use catoni_bandits::agents::{Agent, AgentConfig, CatoniOful};
use catoni_bandits::harness::config::problem_info;
use catoni_bandits::harness::InstanceSpec;

fn main() -> catoni_bandits::Result<()> {
    let horizon = 1000;
    let inst: InstanceSpec = serde_json::from_str(r#"{ "preset": "random-class", "sigma": 0.2, "r": 100 }"#)
        .map_err(|e| catoni_bandits::Error::Config(e.to_string()))?;
    let inst = inst.build(horizon)?;
    let config = AgentConfig { constant_scale: 0.7, ..AgentConfig::for_horizon(horizon) };
    let mut agent = CatoniOful::new(inst.class().clone(), config, problem_info(&inst, horizon))?;
    println!("ι = {:.3}, β̂ = {:.3}", agent.iota(), agent.beta_hat());
    let mut regret = 0.0;
    for t in 1..=horizon {
        let ctx = inst.context(1, t);
        let d = agent.select(&ctx)?;
        let y = inst.reward(1, t, d.action)?;
        regret += inst.instant_regret(&ctx, d.action)?;
        agent.observe(&d, y, Some(inst.variance_oracle(d.action)?.sqrt()))?;
        if t.is_power_of_two() || t == horizon {
            let diag = agent.diagnostics();
            println!(
                "t = {t:>4}  regret {regret:>8.3}  |F_t| = {}  estimator f{}  weight {:.3}",
                diag.active_size.unwrap(),
                agent.version_space().estimator(),
                diag.weight.unwrap()
            );
        }
    }
    println!("true function f{} still in the set: {}", inst.true_function(), agent.contains(inst.true_function()));
    Ok(())
}
