//! Worst-case operation fidelities of the protocol circuits under ancilla
//! dephasing, found by numerical minimization, next to the closed forms.
//!
//! Run with `cargo run --release --example dephasing_fidelities`.

use dfs_repeater::noise::{
    analytic_module_fidelity, operation_fidelity, ModuleKind, QuantumOperation, SamplerConfig,
};
use dfs_repeater::protocol::{cnot_channel, cphase_channel, dfs_transfer_channel, CircuitNoise};
use dfs_repeater::Result;

type Channel = fn(CircuitNoise) -> Result<QuantumOperation>;

fn main() -> Result<()> {
    let sampler = SamplerConfig {
        samples: 2_000,
        ..SamplerConfig::default()
    };
    let modules: [(&str, ModuleKind, Channel); 3] = [
        ("cphase", ModuleKind::Cphase, cphase_channel),
        ("cnot", ModuleKind::Cnot, cnot_channel),
        (
            "dfs transfer",
            ModuleKind::StateTransfer,
            dfs_transfer_channel,
        ),
    ];
    println!(
        "{:<13} {:>7} {:>12} {:>12} {:>10}",
        "circuit", "gt", "simulated", "closed form", "diff"
    );
    for (name, kind, channel) in modules {
        let ideal = channel(CircuitNoise::ideal())?;
        for gt in [0.001, 0.01, 0.1, 0.5, 1.0] {
            let noisy = channel(CircuitNoise::from_gamma_t(gt)?)?;
            let sim = operation_fidelity(&ideal, &noisy, &sampler)?.value;
            let ana = analytic_module_fidelity(kind, gt)?.value;
            println!(
                "{name:<13} {gt:>7} {sim:>12.8} {ana:>12.8} {:>10.2e}",
                sim - ana
            );
        }
    }
    Ok(())
}
