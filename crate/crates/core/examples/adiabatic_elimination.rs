//! Second-order effective Hamiltonian of three atoms on three sites: the
//! eliminated couplings against their closed forms, and the logical X
//! coupling `v ≈ −2√3 J²/U` for the symmetric choice J₂ = √2 J₁.
//!
//! Run with `cargo run --example adiabatic_elimination`.

use dfs_repeater::lattice::{
    effective_x_hamiltonian, symmetric_x_params, EffectiveCouplings, InverseOrder,
};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let j = 0.033;
    println!(
        "{:>6} {:>14} {:>14} {:>12} {:>12}",
        "U/J", "v (exact)", "-2√3J²/U", "rel. diff", "off-block"
    );
    for u_over_j in [10.0, 25.0, 50.0, 75.0, 100.0] {
        let u = u_over_j * j;
        let x = effective_x_hamiltonian(&symmetric_x_params(j, u), InverseOrder::Exact)?;
        let want = -2.0 * 3f64.sqrt() * j * j / u;
        println!(
            "{u_over_j:>6.0} {:>14.6e} {want:>14.6e} {:>12.3e} {:>12.3e}",
            x.v,
            (x.v - want).abs() / want.abs(),
            x.off_block
        );
    }
    let p = symmetric_x_params(j, 75.0 * j);
    let first = effective_x_hamiltonian(&p, InverseOrder::FirstOrder)?;
    println!("\nfirst-order couplings at U/J = 75: {:?}", first.couplings);
    println!(
        "closed form:                        {:?}",
        EffectiveCouplings::from_params(&p)?
    );
    Ok(())
}
