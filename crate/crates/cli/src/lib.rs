//! Command implementations behind the `qtrit` binary.
//!
//! Every command returns a [`ReportEnvelope`]; the binary only parses flags and
//! writes the envelope (or its `rows` as CSV).

pub mod commands;
pub mod envelope;

pub use commands::{
    batch_rng, bounds_table, classical, gap_report, parse_j_values, parse_profile, quantum_run,
    quantum_verify, rows_to_csv, BoundsOptions, ClassicalCommand, CliError, CliResult, GapOptions,
    RunOptions, VerifyOptions, BATCH_TRIALS,
};
pub use envelope::ReportEnvelope;
