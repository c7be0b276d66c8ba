//! Robust contextual bandits over finite hypothesis classes.
//!
//! * [`robust_mean`]: the Catoni mean estimator and its deviation bounds.
//! * [`hypothesis`]: finite classes, weighted distances, eluder quantities
//!   and version spaces.
//! * [`environments`]: heavy-tailed reward instances with exact oracles.
//! * [`agents`]: Catoni-OFUL, its candidate-set variant, the
//!   variance-agnostic peeling agent VACB, and a least-squares baseline.
//! * [`harness`]: seeded episodes, aggregation, experiments and CSV/JSON
//!   output.

pub mod agents;
pub mod environments;
pub mod error;
pub mod harness;
pub mod hypothesis;
pub mod rng;
pub mod robust_mean;

pub use error::{Error, Result};
