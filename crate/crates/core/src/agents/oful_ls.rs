use std::sync::Arc;

use super::{check_context, log_at_least_one, optimistic_argmax, Agent, AgentConfig, Decision, Diagnostics, ProblemInfo};
use crate::error::Result;
use crate::hypothesis::{refit_version_space, HypothesisClass, PairAccumulator, VersionSpace};

/// Optimism over an unweighted least-squares version space whose radius
/// scales with the noise range `R`.
#[derive(Debug, Clone)]
pub struct OfulLs {
    class: Arc<HypothesisClass>,
    acc: PairAccumulator,
    squared_loss: Vec<f64>,
    space: VersionSpace,
    beta: f64,
    last: Diagnostics,
}

impl OfulLs {
    pub fn new(class: Arc<HypothesisClass>, config: AgentConfig, info: ProblemInfo) -> Result<Self> {
        config.validate()?;
        info.validate()?;
        let n = class.n_functions() as f64;
        let beta = config.constant_scale
            * info.noise_range
            * log_at_least_one(n * info.horizon as f64 / config.delta).sqrt();
        Ok(Self {
            acc: PairAccumulator::for_class(&class),
            squared_loss: vec![0.0; class.n_functions()],
            space: VersionSpace::full(class.n_functions(), 0),
            class,
            beta,
            last: Diagnostics::default(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.space
    }

    /// Least-squares fit over the current version space, lowest index on ties.
    pub fn fit(&self) -> usize {
        let mut best = self.space.estimator();
        for f in self.space.members() {
            let (a, b) = (self.squared_loss[f], self.squared_loss[best]);
            if a < b || (a == b && f < best) {
                best = f;
            }
        }
        best
    }
}

impl Agent for OfulLs {
    fn name(&self) -> &str {
        "oful-ls"
    }

    fn needs_variance(&self) -> bool {
        false
    }

    fn select(&mut self, context: &[usize]) -> Result<Decision> {
        check_context(&self.class, context)?;
        let (x, _) = optimistic_argmax(&self.class, &self.space.members(), context);
        Ok(Decision::optimistic(x))
    }

    fn observe(&mut self, decision: &Decision, reward: f64, _noise_std: Option<f64>) -> Result<()> {
        let x = decision.action;
        self.acc.update(&self.class, x, 1.0)?;
        for (f, loss) in self.squared_loss.iter_mut().enumerate() {
            *loss += (self.class.value(f, x) - reward).powi(2);
        }
        let estimator = self.fit();
        self.space = refit_version_space(&self.acc, self.space.mask(), estimator, self.beta * self.beta)?;
        self.last = Diagnostics {
            weight: Some(1.0),
            level: None,
            active_size: Some(self.space.size()),
            beta_hat: Some(self.beta),
        };
        Ok(())
    }

    fn diagnostics(&self) -> Diagnostics {
        self.last
    }

    fn contains(&self, f: usize) -> bool {
        self.space.contains(f)
    }
}
