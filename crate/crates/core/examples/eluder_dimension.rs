//! Eluder coefficients of a finite class and the linear upper bound.
//!
//! Run with `cargo run --example eluder_dimension`.

use catoni_bandits::harness::config::random_features;
use catoni_bandits::hypothesis::{
    eluder_coefficient_over, eluder_dimension, eluder_trace, grid_parameters, linear_eluder_upper, HypothesisClass,
    PairAccumulator,
};

fn main() -> catoni_bandits::Result<()> {
    // Repeating one action: the coefficients are 1, 1/√2, 1/√3, ...
    let two = HypothesisClass::new(vec![vec![0.0, 0.3], vec![1.0, 0.3]], 1.0)?;
    let trace = eluder_trace(&two, &[0; 6], &[1.0; 6], 1.0)?;
    println!("repeated action: {:?}", trace.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("dimension over 6 rounds: {:.4}", eluder_dimension(&two, &[0; 6], &[1.0; 6], 1.0, 1.0)?);

    // A linear class on a unit-diameter grid against its ellipsoidal bound.
    let feats = random_features(4, 3, 2);
    let params = grid_parameters(3, 5, 0.5 / 3f64.sqrt());
    let class = HypothesisClass::linear(&params, &feats, None)?;
    let all: Vec<usize> = (0..class.n_functions()).collect();
    let mut acc = PairAccumulator::for_class(&class);
    let (mut phis, mut ws) = (Vec::new(), Vec::new());
    println!("{:>5} {:>10} {:>10}", "round", "D²", "upper");
    for t in 0..12 {
        let x = t % feats.len();
        let d = eluder_coefficient_over(&class, &acc, &all, x, 1.0, 1.0)?;
        let upper = linear_eluder_upper(&phis, &ws, &feats[x], 1.0, 1.0)?;
        println!("{t:>5} {:>10.5} {:>10.5}", d * d, upper);
        acc.update(&class, x, 1.0)?;
        phis.push(feats[x].clone());
        ws.push(1.0);
    }
    Ok(())
}
