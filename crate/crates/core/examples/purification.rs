//! Entanglement purification of logical pairs: the one-round map for Werner
//! inputs, its threshold, and repeated rounds with pumping and recurrence.
//!
//! Run with `cargo run --release --example purification`.

use dfs_repeater::protocol::{
    iterate_purification, purification_threshold, werner_map, AuxCarrier, AuxPolicy, CircuitNoise,
};
use dfs_repeater::Result;

fn main() -> Result<()> {
    let ideal = CircuitNoise::ideal();
    println!("{:>6} {:>10} {:>10}", "F", "F'", "p_succ");
    for f in [0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
        let (fp, p) = werner_map(f, ideal, AuxCarrier::Atom)?;
        println!("{f:>6.2} {fp:>10.6} {p:>10.6}");
    }
    println!(
        "threshold (ideal gates): {:.8}",
        purification_threshold(ideal, AuxCarrier::Atom)?
    );
    println!(
        "threshold (gt = 0.05):   {:.8}",
        purification_threshold(CircuitNoise::from_gamma_t(0.05)?, AuxCarrier::Atom)?
    );
    for policy in [AuxPolicy::Pumping, AuxPolicy::Recurrence] {
        let f = iterate_purification(0.8, policy, 8)?;
        let text: Vec<String> = f.iter().map(|x| format!("{x:.5}")).collect();
        println!("{policy:?} from 0.8: {}", text.join(" -> "));
    }
    Ok(())
}
