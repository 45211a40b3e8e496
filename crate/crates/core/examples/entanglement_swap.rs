//! Entanglement swapping with a logical Bell measurement: the derived
//! correction table and the fidelity of swapped Werner pairs.
//!
//! Run with `cargo run --release --example entanglement_swap`.

use dfs_repeater::protocol::{correction_table, entanglement_swap, CircuitNoise, LogicalPair};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let table = correction_table()?;
    for (k, c) in table.0.iter().enumerate() {
        println!(
            "outcome ({}, {}): R_z({}π/2) R_x({}π/2)",
            k / 2,
            k % 2,
            c.z_quarters,
            c.x_quarters
        );
    }
    for f in [1.0, 0.95, 0.9, 0.8] {
        let w = LogicalPair::werner(f)?;
        let ideal = entanglement_swap(&w, &w, CircuitNoise::ideal())?
            .pair
            .fidelity();
        let noisy = entanglement_swap(&w, &w, CircuitNoise::from_gamma_t(0.01)?)?
            .pair
            .fidelity();
        println!("F = {f:.2}: swapped {ideal:.6} (ideal gates), {noisy:.6} (gt = 0.01)");
    }
    Ok(())
}
