//! The ancilla-controlled phase gate: the register's atoms 3 and 4 swap
//! places only when the ancilla atom does not block the path.
//!
//! Run with `cargo run --release --example cphase_gate`.

use dfs_repeater::lattice::{run_cphase, CphaseConfig, LatticeUnits, DEFAULT_J};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let units = LatticeUnits::sodium_514();
    for (label, cfg) in [
        (
            "interacting, U/J = 75",
            CphaseConfig::interacting(DEFAULT_J, 75.0),
        ),
        (
            "interacting, U/J = 100",
            CphaseConfig::interacting(DEFAULT_J, 100.0),
        ),
        (
            "free, residual U/J = 0.01",
            CphaseConfig::free(DEFAULT_J, 0.01),
        ),
    ] {
        let r = run_cphase(&cfg)?;
        println!("{label}");
        println!(
            "  gate time        {:.4} ms",
            units.to_seconds(r.gate_time) * 1e3
        );
        println!("  1 - f_01         {:.3e}", 1.0 - r.f_01);
        println!("  1 - f_00         {:.3e}", 1.0 - r.f_00);
        println!("  blocked prob.    {:.6}", r.blocked_prob_min);
        println!("  max leakage      {:.3e}", r.leakage_max);
        println!(
            "  swap phase       {}",
            r.phi
                .map_or("absent".to_string(), |p| format!("{p:.3e} rad"))
        );
    }
    Ok(())
}
