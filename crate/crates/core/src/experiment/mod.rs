//! Batch experiments: configuration, output files, self-checks and the
//! `dfsrep` command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod verify;

pub use cli::run;
pub use config::{ExperimentConfig, Grid, UnitsSpec};
pub use report::{json_bytes, scan_csv, sci, sha256_hex, OutputSet, RunManifest};
pub use verify::{
    check_names, run_verify, Check, Suite, SuiteSelection, VerifyOptions, VerifyReport,
};
