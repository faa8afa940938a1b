//! Combinatorial multi-armed bandits with probabilistically triggered arms.
//!
//! The crate pairs combinatorial Thompson sampling and UCB-style baselines
//! with four environment families (cascading clicks, probabilistic maximum
//! coverage, influence maximization and reliable routing), the exact or
//! approximate oracles each family needs, data ingestion, and a seeded
//! experiment harness that writes regret curves as CSV.

pub mod env;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod reference;

pub use error::{Error, Result};
pub use model::{BaseArmId, Feedback, MeanVector, RegretCurve, RegretMode, RegretRecord, SuperArm};
