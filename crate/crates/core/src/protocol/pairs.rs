//! Entangled logical pairs shared between two nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::pure_fidelity;
use crate::quantum::{re, CMatrix, CVector, DensityMatrix, ONE, ZERO};

/// Tolerance for recognizing Bell-diagonal states.
pub const BELL_DIAGONAL_TOL: f64 = 1e-10;

/// The four Bell states, in the order `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    /// State vector over `|00⟩, |01⟩, |10⟩, |11⟩` (first factor = side A).
    pub fn vector(self) -> CVector {
        let h = re(std::f64::consts::FRAC_1_SQRT_2);
        let v = match self {
            Bell::PhiPlus => [h, ZERO, ZERO, h],
            Bell::PhiMinus => [h, ZERO, ZERO, -h],
            Bell::PsiPlus => [ZERO, h, h, ZERO],
            Bell::PsiMinus => [ZERO, h, -h, ZERO],
        };
        CVector::from_row_slice(&v)
    }

    pub fn projector(self) -> CMatrix {
        let v = self.vector();
        &v * v.adjoint()
    }
}

/// Node holding one half of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Two logical qubits, side A (first factor) and side B.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalPair {
    rho: DensityMatrix,
}

impl LogicalPair {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: rho.dim(),
            });
        }
        Ok(LogicalPair { rho })
    }

    /// Validates an arbitrary 4×4 matrix as a density matrix.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        LogicalPair::new(DensityMatrix::new(m)?)
    }

    pub fn bell(b: Bell) -> Self {
        LogicalPair {
            rho: DensityMatrix::from_matrix_unchecked(b.projector()),
        }
    }

    pub fn phi_plus() -> Self {
        LogicalPair::bell(Bell::PhiPlus)
    }

    /// Werner state `F|Φ⁺⟩⟨Φ⁺| + (1−F)/3 (1 − |Φ⁺⟩⟨Φ⁺|)`.
    pub fn werner(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::validation("Werner fidelity must lie in [0, 1]"));
        }
        let q = (1.0 - f) / 3.0;
        LogicalPair::bell_diagonal([f, q, q, q])
    }

    /// `Σ_k c_k |B_k⟩⟨B_k|` with coefficients in [`Bell::ALL`] order.
    pub fn bell_diagonal(c: [f64; 4]) -> Result<Self> {
        if c.iter().any(|&x| x < 0.0) || (c.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::validation(
                "Bell-diagonal weights must be a probability vector",
            ));
        }
        let m = Bell::ALL
            .iter()
            .zip(c)
            .fold(CMatrix::zeros(4, 4), |acc, (b, w)| {
                acc + b.projector() * re(w)
            });
        Ok(LogicalPair {
            rho: DensityMatrix::from_matrix_unchecked(m),
        })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    /// `⟨Φ⁺|ρ|Φ⁺⟩`.
    pub fn fidelity(&self) -> f64 {
        pure_fidelity(&Bell::PhiPlus.vector(), self.rho.matrix())
    }

    /// Weights `⟨B_k|ρ|B_k⟩`.
    pub fn bell_weights(&self) -> [f64; 4] {
        Bell::ALL.map(|b| pure_fidelity(&b.vector(), self.rho.matrix()))
    }

    /// Largest off-diagonal element of `ρ` in the Bell basis.
    pub fn bell_off_diagonal(&self) -> f64 {
        let vs: Vec<CVector> = Bell::ALL.iter().map(|b| b.vector()).collect();
        let mut worst: f64 = 0.0;
        for (i, vi) in vs.iter().enumerate() {
            for (j, vj) in vs.iter().enumerate() {
                if i != j {
                    worst = worst.max(vi.dotc(&(self.rho.matrix() * vj)).norm());
                }
            }
        }
        worst
    }

    pub fn is_bell_diagonal(&self) -> bool {
        self.bell_off_diagonal() < BELL_DIAGONAL_TOL
    }
}

/// `|0⟩⟨0|` of a logical qubit, the required target of a state transfer.
pub fn logical_zero() -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]))
}
