//! Configuration files, run directories, sweeps, reports and plots.

pub mod analyze;
pub mod checkpoint;
pub mod config;
pub mod plot;
pub mod runner;
pub mod sweep;
pub mod table;

pub use analyze::{analyze, AnalysisSummary, Check, CheckSummary};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, CheckpointHeader};
pub use config::{KernelConfig, RunConfig, SweepAnalysis, SweepConfig};
pub use plot::{emit_plots, Plot, Series};
pub use runner::{execute, load_run, LoadedRun, RunManifest};
pub use sweep::{execute_sweep, SweepOutcome, SweepTables};
pub use table::Table;
