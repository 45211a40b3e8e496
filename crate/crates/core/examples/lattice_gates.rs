//! Logical single-qubit gates from the full Bose-Hubbard dynamics: R_z(π)
//! and R_x(π) in the interacting regime and R_z(π) without interactions.
//!
//! Run with `cargo run --release --example lattice_gates`.

use std::f64::consts::PI;

use dfs_repeater::lattice::{run_rx_gate, run_rz_gate, RxConfig, RzConfig, DEFAULT_J};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let j = DEFAULT_J;
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "U/J", "1-f_Z(1_L)", "|phi-pi|", "1-f_X", "max leakage"
    );
    for u_over_j in [25.0, 50.0, 75.0, 100.0, 150.0] {
        let rz = run_rz_gate(&RzConfig::interacting(j, u_over_j, PI))?;
        let rx = run_rx_gate(&RxConfig::new(j, u_over_j, PI))?;
        println!(
            "{u_over_j:>6.0} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            1.0 - rz.f_z[1],
            rz.phase_error.unwrap_or(f64::NAN),
            1.0 - rx.f_x,
            rz.max_leakage.max(rx.max_leakage)
        );
    }
    let free = run_rz_gate(&RzConfig::free(j, 0.01))?;
    println!(
        "\nfree R_z(pi) with residual U/J = 0.01: gate infidelity {:.3e}, phase error {:.3e}",
        free.gate_infidelity,
        free.phase_error.unwrap_or(f64::NAN)
    );
    Ok(())
}
