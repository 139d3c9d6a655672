//! Experiment orchestration: configuration, sweeps, CSV output and the
//! formula spot checks.

pub mod config;
pub mod oracle;
pub mod output;
pub mod sweep;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, Metric};
pub use output::{emit_csv, load_csv, read_csv, write_csv, CsvError};
pub use sweep::{cells, run_sweep, Cell, Preset, ResultRow};
