//! Library side of the `binotone` command line: shared settings, report
//! types and one function per subcommand, so tests can drive them directly.

pub mod commands;
pub mod report;
pub mod settings;

pub use commands::{
    cmd_baseline, cmd_batch, cmd_evaluate, cmd_optimize, cmd_refs, evaluate_pair, exit_code,
    BatchSummary,
};
pub use report::{BatchRow, EvaluationReport, OutputFiles, RunReport, SCHEMA_VERSION};
pub use settings::Settings;
