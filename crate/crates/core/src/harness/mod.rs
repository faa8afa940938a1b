//! Experiment orchestration: configuration, seeded runs, regret
//! bookkeeping, aggregation and output files.

pub mod config;
pub mod generators;
pub mod report;
pub mod run;
pub mod selftest;

pub use config::{instance_fingerprint, EnvSpec, IngestedDocument, RunConfig};
pub use generators::{make_blb_instance, random_cascade, random_pmc, synthetic_graph};
pub use report::{aggregate, emit_report, format_mean_std, mean_and_std, read_summary, Aggregate, Summary};
pub use run::{
    compute_benchmark, prepare, run_experiment, run_seed, run_to_dir, seeded_stream, simulate, Benchmark,
    CurveCollector, FixedPlayer, LearnerPlayer, Player, RoundSink, RunResult,
};
