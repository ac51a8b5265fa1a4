//! Temporal passing-network analysis of team possessions.
//!
//! Pipeline: [`ingest`] loads pass events and possessions, [`windowing`]
//! cuts each possession into rolling windows, [`graphlets`] labels each
//! window with one of ten canonical states, [`profiles`] accumulates state
//! and transition counts, [`entropy`] turns them into SE/TE/RTE, and
//! [`scorepart`] splits possessions by relative score. [`stats`] holds the
//! nonparametric tests and [`protocol`] chains everything into the full
//! analysis. [`oracle`] provides synthetic data and naive reference
//! implementations for testing.

pub mod entropy;
pub mod graphlets;
pub mod ingest;
pub mod oracle;
pub mod profiles;
pub mod protocol;
pub mod scorepart;
pub mod stats;
pub mod windowing;

pub use entropy::{entropies, stationary_maxima, theoretical_maxima, EntropyReport, Metric, Triple};
pub use graphlets::{classify, state_sequence, Feasibility, FeasibilityRule, GraphletState, N_STATES};
pub use ingest::{load_dataset, validate, Dataset, GameRecord, Millis, PassEvent, Possession};
pub use profiles::{profile_of, Profile, RowStatus, StochasticView};
pub use scorepart::{
    best_partition, enumerate_partitions, supervised_classes, Analysis, Boundaries, Partition, ScoreClass, SearchParams,
};
pub use stats::{chisq_independence, spearman, wilcoxon_signed_rank, Alternative, Method, TestResult};
pub use windowing::{window_count, windows_of, TimeWindow, WindowParams};
