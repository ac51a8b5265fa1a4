//! Test support: synthetic data and naive reference implementations.
//!
//! [`brute`] is deliberately independent of the pipeline modules it checks.

pub mod brute;
pub mod planted;
pub mod synth;

pub use brute::{brute_classify, brute_partitions, brute_wilcoxon};
pub use synth::{generate, Manifest, ScoreTrajectory, SynthError, SynthSpec, Synthetic};
