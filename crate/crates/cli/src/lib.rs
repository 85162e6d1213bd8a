//! Batch runs of the translated-point detector: TOML configuration in, JSON
//! report and CSV record table out.

pub mod config;
pub mod run;

pub use config::{load_config, ConfigError, RunConfig, SCHEMA_VERSION};
pub use run::{run, ExitStatus, Overrides, RunError, RunReport};
