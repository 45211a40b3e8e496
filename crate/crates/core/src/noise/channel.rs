//! Quantum operations as superoperators on column-stacked density matrices.
//!
//! With `vec(ρ)` stacking columns (nalgebra's storage order), the map
//! `ρ ↦ AρB` has matrix `Bᵀ ⊗ A`.

use crate::error::{Error, Result};
use crate::quantum::{hermitian_eigen, CMatrix, CVector, DensityMatrix, Operator, C64, ONE, ZERO};

/// Tolerance for trace preservation.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative Choi eigenvalue accepted for complete positivity.
pub const CHOI_FLOOR: f64 = -1e-10;

/// Linear map on density matrices, `dim_in × dim_in → dim_out × dim_out`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumOperation {
    dim_in: usize,
    dim_out: usize,
    superop: CMatrix,
}

fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn unvec(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    e[(i, j)] = ONE;
    e
}

impl QuantumOperation {
    /// Wraps a superoperator and checks trace preservation and complete
    /// positivity.
    pub fn new(superop: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let op = QuantumOperation::unchecked(superop, dim_in, dim_out)?;
        op.validate()?;
        Ok(op)
    }

    fn unchecked(superop: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::validation("operation dimensions must be positive"));
        }
        if superop.nrows() != dim_out * dim_out || superop.ncols() != dim_in * dim_in {
            return Err(Error::DimensionMismatch {
                expected: dim_out * dim_out,
                found: superop.nrows(),
            });
        }
        Ok(QuantumOperation {
            dim_in,
            dim_out,
            superop,
        })
    }

    /// Kraus representation `ρ ↦ Σ K ρ K†`.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::validation("need at least one Kraus operator"))?;
        let (dout, din) = (first.nrows(), first.ncols());
        let mut s = CMatrix::zeros(dout * dout, din * din);
        for k in kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::validation("Kraus operators must share their shape"));
            }
            s += k.conjugate().kronecker(k);
        }
        QuantumOperation::new(s, din, dout)
    }

    /// Unitary conjugation `ρ ↦ UρU†`.
    pub fn unitary(u: &Operator) -> Result<Self> {
        let m = u.matrix();
        let d = m.nrows();
        let err = (m.adjoint() * m - CMatrix::identity(d, d)).camax();
        if err > 1e-10 {
            return Err(Error::validation(format!(
                "operator is not unitary (error {err:e})"
            )));
        }
        Ok(QuantumOperation {
            dim_in: d,
            dim_out: d,
            superop: m.conjugate().kronecker(m),
        })
    }

    pub fn identity(d: usize) -> Self {
        QuantumOperation {
            dim_in: d,
            dim_out: d,
            superop: CMatrix::identity(d * d, d * d),
        }
    }

    /// Builds the operation from the action of a linear map on the matrix
    /// units `|i⟩⟨j|`, then validates it.
    pub fn from_fn(
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&CMatrix) -> Result<CMatrix>,
    ) -> Result<Self> {
        let mut s = CMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for j in 0..dim_in {
            for i in 0..dim_in {
                let out = f(&unit(dim_in, i, j))?;
                if out.nrows() != dim_out || out.ncols() != dim_out {
                    return Err(Error::DimensionMismatch {
                        expected: dim_out,
                        found: out.nrows(),
                    });
                }
                s.set_column(i + j * dim_in, &vec_of(&out));
            }
        }
        QuantumOperation::new(s, dim_in, dim_out)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    /// Applies the map to an arbitrary square matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim_in || m.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: m.nrows(),
            });
        }
        Ok(unvec(&(&self.superop * vec_of(m)), self.dim_out))
    }

    /// `ℰ(ρ)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        Ok(DensityMatrix::from_matrix_unchecked(
            (&out + out.adjoint()).unscale(2.0),
        ))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &QuantumOperation) -> Result<QuantumOperation> {
        if next.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                found: next.dim_in,
            });
        }
        Ok(QuantumOperation {
            dim_in: self.dim_in,
            dim_out: next.dim_out,
            superop: &next.superop * &self.superop,
        })
    }

    /// `self ⊗ other`, acting on the Kronecker-ordered product space.
    pub fn tensor(&self, other: &QuantumOperation) -> Result<QuantumOperation> {
        let (a, b) = (self.dim_in, other.dim_in);
        let (ao, bo) = (self.dim_out, other.dim_out);
        let din = a * b;
        let dout = ao * bo;
        let mut s = CMatrix::zeros(dout * dout, din * din);
        for j1 in 0..a {
            for i1 in 0..a {
                let left = self.apply_matrix(&unit(a, i1, j1))?;
                for j2 in 0..b {
                    for i2 in 0..b {
                        let right = other.apply_matrix(&unit(b, i2, j2))?;
                        let (i, j) = (i1 * b + i2, j1 * b + j2);
                        s.set_column(i + j * din, &vec_of(&left.kronecker(&right)));
                    }
                }
            }
        }
        QuantumOperation::unchecked(s, din, dout)
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ ℰ(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let (d, o) = (self.dim_in, self.dim_out);
        let mut c = CMatrix::zeros(d * o, d * o);
        for j in 0..d {
            for i in 0..d {
                let out = unvec(&self.superop.column(i + j * d).into_owned(), o);
                c.view_mut((i * o, j * o), (o, o)).copy_from(&out);
            }
        }
        c
    }

    /// Largest deviation of `Tr ℰ(|i⟩⟨j|)` from `δ_ij`.
    pub fn trace_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for j in 0..self.dim_in {
            for i in 0..self.dim_in {
                let col = self.superop.column(i + j * self.dim_in);
                let tr: C64 = (0..self.dim_out).map(|k| col[k + k * self.dim_out]).sum();
                let want = if i == j { ONE } else { ZERO };
                err = err.max((tr - want).norm());
            }
        }
        err
    }

    /// Smallest eigenvalue of the (Hermitized) Choi matrix.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        let c = self.choi();
        let h = (&c + c.adjoint()).unscale(2.0);
        hermitian_eigen(&h)
            .0
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks trace preservation and complete positivity.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace_error();
        if tr > TRACE_TOL {
            return Err(Error::validation(format!(
                "operation is not trace preserving (error {tr:e})"
            )));
        }
        let min = self.min_choi_eigenvalue();
        if min < CHOI_FLOOR {
            return Err(Error::validation(format!(
                "operation is not completely positive (Choi eigenvalue {min:e})"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{qubit, random_pure_state, re, tensor, I};

    #[test]
    fn unitary_channel_matches_conjugation() {
        let u = Operator::new(qubit::rx(0.7)).unwrap();
        let ch = QuantumOperation::unitary(&u).unwrap();
        let rho = random_pure_state(2, 3).unwrap().to_density().unwrap();
        let want = rho.conjugate(&u).unwrap();
        assert!((ch.apply(&rho).unwrap().matrix() - want.matrix()).camax() < 1e-14);
    }

    #[test]
    fn kraus_and_fn_constructions_agree() {
        let lambda: f64 = 0.3;
        let p = (1.0 + lambda) / 2.0;
        let k0 = CMatrix::identity(2, 2) * re(p.sqrt());
        let k1 = qubit::pauli_z() * re((1.0 - p).sqrt());
        let a = QuantumOperation::from_kraus(&[k0, k1]).unwrap();
        let b = QuantumOperation::from_fn(2, 2, |m| {
            let mut out = m.clone();
            out[(0, 1)] *= re(lambda);
            out[(1, 0)] *= re(lambda);
            Ok(out)
        })
        .unwrap();
        assert!((a.superoperator() - b.superoperator()).camax() < 1e-15);
    }

    #[test]
    fn non_cptp_maps_are_rejected() {
        // Transpose: trace preserving but not completely positive.
        assert!(QuantumOperation::from_fn(2, 2, |m| Ok(m.transpose())).is_err());
        // Doubling: not trace preserving.
        assert!(QuantumOperation::from_fn(2, 2, |m| Ok(m * re(2.0))).is_err());
    }

    #[test]
    fn tensor_of_unitaries_is_unitary_of_tensor() {
        let a = Operator::new(qubit::rx(0.4)).unwrap();
        let b = Operator::new(qubit::rz(1.1)).unwrap();
        let lhs = QuantumOperation::unitary(&a)
            .unwrap()
            .tensor(&QuantumOperation::unitary(&b).unwrap())
            .unwrap();
        let rhs = QuantumOperation::unitary(&tensor(&a, &b).unwrap()).unwrap();
        assert!((lhs.superoperator() - rhs.superoperator()).camax() < 1e-14);
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell_projector() {
        let c = QuantumOperation::identity(2).choi();
        let v = CVector::from_vec(vec![ONE, ZERO, ZERO, ONE]);
        assert!((c - &v * v.adjoint()).camax() < 1e-15);
        let _ = I;
    }

    #[test]
    fn composition_order() {
        let x = QuantumOperation::unitary(&Operator::new(qubit::pauli_x()).unwrap()).unwrap();
        let h = QuantumOperation::unitary(&Operator::new(qubit::hadamard()).unwrap()).unwrap();
        let rho = DensityMatrix::from_pure(&crate::quantum::StateVector::qubit_state("0").unwrap())
            .unwrap();
        // X then H on |0> gives |->.
        let out = x.then(&h).unwrap().apply(&rho).unwrap();
        assert!((out.matrix()[(0, 1)].re + 0.5).abs() < 1e-14);
    }
}
