//! File formats, parallel evaluation, the experiment runner and the command
//! line on top of [`mqnlp_core`].

pub mod experiment;
pub mod io;
pub mod parallel;

pub use mqnlp_core as core;
pub use experiment::{compare_readers, run_experiment, Comparison, ExperimentConfig, Summary};
pub use parallel::Parallel;
