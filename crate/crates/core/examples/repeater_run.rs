//! A nested purify-and-swap repeater with lattice gate times and ancilla
//! dephasing, in exact mode and with sampled trajectories.
//!
//! Run with `cargo run --release --example repeater_run`.

use dfs_repeater::lattice::{LatticeUnits, Regime, DEFAULT_J};
use dfs_repeater::protocol::{
    nested_repeater_run, AuxPolicy, ExecutionMode, ModuleTimes, PrimitiveTimes, ProtocolConfig,
};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let times =
        PrimitiveTimes::from_lattice(&LatticeUnits::sodium_514(), DEFAULT_J, 75.0, Regime::Free)?;
    let mut cfg = ProtocolConfig::ideal(0.8, 0.97);
    cfg.levels = 3;
    cfg.aux_policy = AuxPolicy::Recurrence;
    cfg.gate_times = ModuleTimes::from_primitives(&times);
    cfg.gamma = 1.0 / 73e-3;
    let exact = nested_repeater_run(&cfg)?;
    for l in &exact.levels {
        println!(
            "level {} ({} segments): {:.5} -> {:.5} in {} rounds, t = {:.1} ms, {:?}",
            l.level,
            l.span,
            l.input_fidelity,
            l.output_fidelity,
            l.rounds,
            l.time * 1e3,
            l.status
        );
    }
    println!("success probability {:.4e}", exact.success_probability);

    cfg.mode = ExecutionMode::Sampled { trajectories: 100 };
    if let Some(s) = nested_repeater_run(&cfg)?.sampled {
        println!(
            "sampled: mean time {:.1} ± {:.1} ms, mean fidelity {:.5}, acceptance {:.3}",
            s.mean_time * 1e3,
            s.std_time * 1e3,
            s.mean_fidelity,
            s.acceptance_rate
        );
    }
    Ok(())
}
