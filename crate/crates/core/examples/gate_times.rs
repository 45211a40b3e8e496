//! Physical gate durations for sodium in a 514 nm lattice and the resulting
//! time budget of each repeater module.
//!
//! Run with `cargo run --release --example gate_times`.

use dfs_repeater::lattice::{gate_time, GateKind, LatticeUnits, Regime, DEFAULT_J};
use dfs_repeater::noise::{analytic_module_fidelity, ModuleKind};
use dfs_repeater::protocol::gate_time_budget;
use dfs_repeater::Result;

fn main() -> Result<()> {
    let units = LatticeUnits::sodium_514();
    let u_over_j = 75.0;
    println!("gates at J = {DEFAULT_J} E_R, U/J = {u_over_j}:");
    for k in GateKind::ALL {
        println!(
            "  {:<20} {:>9.4} ms",
            k.name(),
            gate_time(k, DEFAULT_J, u_over_j, Some(&units))? * 1e3
        );
    }
    for regime in [Regime::Interacting, Regime::Free] {
        println!("module budgets ({regime:?}):");
        for b in gate_time_budget(&units, DEFAULT_J, u_over_j, regime)? {
            println!(
                "  {:<15} {:>9.4} ms  ({} CPHASE)",
                b.module.name(),
                b.duration * 1e3,
                b.cphase_count
            );
        }
    }
    // Ancilla coherence time 73 ms, free-regime CPHASE.
    let gamma_t = gate_time(GateKind::CphaseFree, DEFAULT_J, u_over_j, Some(&units))? / 73e-3;
    let ep = analytic_module_fidelity(ModuleKind::EntPurification, gamma_t)?;
    println!(
        "purification fidelity bound at gamma t = {gamma_t:.5}: {:.5}",
        ep.value
    );
    Ok(())
}
