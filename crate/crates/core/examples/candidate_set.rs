//! The candidate-set variant: the estimator is any hypothesis that no rival
//! beats by more than β̂²/4, and the set is rebuilt each round.
//!
//! Run with `cargo run --release --example candidate_set`.

use catoni_bandits::agents::{Agent, AgentConfig, CandidateSetOful, RadiusRule};
use catoni_bandits::harness::config::problem_info;
use catoni_bandits::harness::InstanceSpec;
use catoni_bandits::Error;

fn main() -> catoni_bandits::Result<()> {
    let horizon = 600;
    let spec: InstanceSpec = serde_json::from_str(r#"{ "preset": "random-class", "sigma": 0.2, "r": 100 }"#)
        .map_err(|e| Error::Config(e.to_string()))?;
    let inst = spec.build(horizon)?;
    let config = AgentConfig { constant_scale: 0.1, ..AgentConfig::for_horizon(horizon) };
    let mut agent = CandidateSetOful::new(inst.class().clone(), config, problem_info(&inst, horizon), RadiusRule::Logarithmic)?;
    let mut regret = 0.0;
    for t in 1..=horizon {
        let ctx = inst.context(3, t);
        let d = agent.select(&ctx)?;
        regret += inst.instant_regret(&ctx, d.action)?;
        let y = inst.reward(3, t, d.action)?;
        match agent.observe(&d, y, Some(inst.variance_oracle(d.action)?.sqrt())) {
            Ok(()) => {}
            Err(Error::ConfidenceFailure { round }) => println!("round {round}: no candidate, estimator kept"),
            Err(e) => return Err(e),
        }
        if t % 100 == 0 {
            println!(
                "t = {t:>3}  regret {regret:>7.3}  candidates {:?}  |F_t| = {}",
                agent.candidate_set()?,
                agent.version_space().size()
            );
        }
    }
    println!("confidence failures: {}", agent.failures().len());
    Ok(())
}
