//! Monte-Carlo experiments.
//!
//! Every realization draws from its own random substream and results are
//! merged in realization order, so outputs are bit-identical for a given
//! seed regardless of the number of worker threads.

pub mod audit;
pub mod benchmark;
pub mod config;
pub mod figures;
pub mod stats;
pub mod sweep;

pub use audit::{reliability_audit, AuditConfig, AuditReport, AuditRow};
pub use config::{ExperimentConfig, SchemeKind};
pub use figures::{reproduce_figure, FigureId};
pub use stats::{mean_with_ci, MeanCi};
pub use sweep::{run_benchmark, run_csifree, run_sweep, SweepResult, SweepRow};
