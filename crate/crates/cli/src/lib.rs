//! Experiment driver for the LR-FHSS outage laboratory: configuration,
//! sweeps over the analytic and simulation engines, figure recipes and
//! comparison reports.

pub mod config;
pub mod figures;
pub mod output;
pub mod report;
pub mod run;
pub mod selftest;

pub use config::{emit_config, parse_config, parse_config_str, ConfigError, ExperimentConfig, Mode, Scheme};
pub use figures::{write_figure, FigureId};
pub use run::{run, RunOutcome};
