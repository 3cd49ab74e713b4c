//! Host-side companion to `imagine-core`: level and config files, metrics
//! logging, trajectory dumps, the environment server and the `imagine` CLI.

pub mod config;
pub mod ewma;
pub mod level_file;
pub mod metrics;
pub mod runner;
pub mod server;
pub mod trajectory;

pub use config::{load_config, parse_config, ConfigError, PolicyChoice, RunConfig};
pub use metrics::{read_metrics, MetricsRecord, MetricsWriter};

/// Environment variable that overrides `--log-dir` and `log_dir`.
pub const LOG_DIR_ENV: &str = "IMAGINE_LOG_DIR";
/// Metrics file name inside the log directory.
pub const METRICS_FILE: &str = "metrics.jsonl";
/// Trajectory dump directory inside the log directory.
pub const TRAJECTORY_DIR: &str = "trajectories";
