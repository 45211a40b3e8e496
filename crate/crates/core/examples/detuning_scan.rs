//! Robustness of the R_z gate against a stray hopping J₂/J₁, written as CSV
//! to standard output.
//!
//! Run with `cargo run --release --example detuning_scan > rz_j2.csv`.

use std::io::Write;

use dfs_repeater::experiment::{scan_csv, Grid};
use dfs_repeater::lattice::{detuning_scan, ScanBase, ScanGate, ScanKnob};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let grid: Grid = "0:0.02:11".parse()?;
    let base = ScanBase {
        u_over_j: 75.0,
        ..ScanBase::default()
    };
    let scan = detuning_scan(ScanGate::Rz, ScanKnob::J2OverJ1, &grid.values(), &base)?;
    std::io::stdout().write_all(&scan_csv(&scan)?)?;
    Ok(())
}
