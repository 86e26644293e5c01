//! Batched training runs: configs, the training loop, metrics, checkpoints,
//! multi-seed sweeps and the shipped presets.

pub mod checkpoint;
pub mod config;
pub mod metrics;
pub mod presets;
pub mod sweep;
pub mod train;

pub use checkpoint::{Checkpoint, OptimizerState};
pub use config::{ExperimentConfig, OptimizerKind, OptimizerSpec};
pub use metrics::{MetricsRow, RunMetrics, RunningAverage};
pub use presets::{desk_scale, preset, DESK_INIT_SCALE, PRESET_NAMES};
pub use sweep::{mean_std, run_matrix, Summary, SummaryRow};
pub use train::{run_experiment, RunOutcome, Trainer};
