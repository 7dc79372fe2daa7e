//! Library surface of the `ifi` experiment driver, exposed so integration
//! and acceptance suites can run commands in-process.

pub mod commands;
pub mod config;
pub mod record;

pub use commands::{
    cmd_decode, cmd_experiment, cmd_gen, cmd_report, cmd_sketch, run_experiment, CountingOracle,
    DecodeOptions, GenOptions, ReportOptions, SketchOptions,
};
pub use config::{parse_fraction, CliError, ExperimentConfig};
pub use record::{read_records, write_records, Summary, TrialRecord};
