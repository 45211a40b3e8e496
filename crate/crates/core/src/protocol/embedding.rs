//! Cross-check of the logical-level model against the four-atom register.
//!
//! The state-transfer circuit is rerun with the target as a 16-dimensional
//! physical register: logical rotations are `exp(−iθ/2 A_L)` of the
//! permutation-operator generators and the controlled `−Z_L` is the
//! ancilla-controlled exchange `V₃₄` of atoms 3 and 4. The result, restricted
//! to the logical basis, must agree with the two-level model.

use std::f64::consts::{FRAC_PI_2, PI};

use super::circuits::{circuit_state_transfer, CircuitNoise};
use super::register::basis_qubit;
use crate::dfs::{logical_basis, logical_rotation, permutation_op, Axis, PHYSICAL_DIM};
use crate::error::{Error, Result};
use crate::quantum::{qubit, re, CMatrix, DensityMatrix};

/// Agreement between the physical and logical transfer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingCheck {
    /// Largest entrywise difference of the logical 2×2 blocks.
    pub max_deviation: f64,
    /// Weight of the physical output outside the DFS.
    pub leakage: f64,
}

fn on_register(u: &CMatrix) -> CMatrix {
    CMatrix::identity(2, 2).kronecker(u)
}

fn on_ancilla(u: &CMatrix) -> CMatrix {
    u.kronecker(&CMatrix::identity(PHYSICAL_DIM, PHYSICAL_DIM))
}

/// Runs the transfer of `psi_anc` on ancilla ⊗ 16-dim register and compares.
pub fn transfer_embedding_check(
    psi_anc: &DensityMatrix,
    noise: CircuitNoise,
) -> Result<EmbeddingCheck> {
    if psi_anc.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi_anc.dim(),
        });
    }
    let (zero, one) = logical_basis();
    let z = zero.amplitudes();
    let mut rho = psi_anc.matrix().kronecker(&(z * z.adjoint()));
    let conj = |rho: &CMatrix, u: &CMatrix| u * rho * u.adjoint();

    rho = conj(
        &rho,
        &on_register(logical_rotation(Axis::X, FRAC_PI_2).matrix()),
    );
    // Ancilla dephasing: coherences between its |0> and |1> blocks.
    let d = PHYSICAL_DIM;
    for i in 0..2 * d {
        for j in 0..2 * d {
            if (i < d) != (j < d) {
                rho[(i, j)] *= re(noise.coherence());
            }
        }
    }
    let mut cp = CMatrix::identity(2 * d, 2 * d);
    cp.view_mut((d, d), (d, d))
        .copy_from(permutation_op(3, 4)?.matrix());
    rho = conj(&rho, &cp);
    rho = conj(
        &rho,
        &on_register(logical_rotation(Axis::X, -FRAC_PI_2).matrix()),
    );
    rho = conj(&rho, &on_ancilla(&qubit::rx(-FRAC_PI_2)));

    let rz = logical_rotation(Axis::Z, PI);
    let mut out = CMatrix::zeros(d, d);
    for m in 0..2 {
        let block = rho.view((m * d, m * d), (d, d)).into_owned();
        out += if m == 1 {
            conj(&block, rz.matrix())
        } else {
            block
        };
    }

    let basis = [zero.amplitudes().clone(), one.amplitudes().clone()];
    let logical = CMatrix::from_fn(2, 2, |k, l| basis[k].dotc(&(&out * &basis[l])));
    let inside = logical.trace().re;
    let want = circuit_state_transfer(psi_anc, &basis_qubit(0), noise)?.state;
    Ok(EmbeddingCheck {
        max_deviation: (logical - want.matrix()).camax(),
        leakage: (out.trace().re - inside).max(0.0),
    })
}
