//! Adiabatic elimination of doubly occupied sites.
//!
//! `H_eff = P H P − P H Q (Q H Q)⁺ Q H P` with `Q = 1 − P`. Two ways to form
//! the inverse of the `Q` block are provided:
//!
//! * [`InverseOrder::Exact`]: pseudo-inverse of `QHQ` on the range of `Q`
//!   (eigenvalues below `1e-10‖H‖` are treated as singular). This keeps all
//!   orders in `J/U`.
//! * [`InverseOrder::FirstOrder`]: `QHQ = D + O` split into its diagonal
//!   (interaction) part and off-diagonal (hopping) part, inverted as
//!   `D⁻¹ − D⁻¹ O D⁻¹`. This is the perturbative treatment that yields the
//!   closed-form couplings of [`EffectiveCouplings::from_params`].
//!
//! For three atoms on three sites the first-order correction vanishes by
//! parity (three hops cannot return to a singly occupied configuration), so
//! the two orders differ only at `O(J⁴/U³)`.

use nalgebra::Matrix2;
use serde::Serialize;

use super::fock::{FockBasis, Occupation};
use super::hamiltonian::{build_hamiltonian, HubbardParams};
use crate::dfs::DfsCodec;
use crate::error::{Error, Result};
use crate::quantum::{hermitian_eigen, max_abs_diff, CMatrix, Operator, C64, ZERO};

/// How the `Q` block is inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseOrder {
    Exact,
    FirstOrder,
}

/// Effective Hamiltonian with the exact pseudo-inverse of `QHQ`.
pub fn adiabatic_eliminate(h: &Operator, p: &Operator) -> Result<Operator> {
    adiabatic_eliminate_with(h, p, InverseOrder::Exact)
}

/// Effective Hamiltonian on the range of the projector `p`.
pub fn adiabatic_eliminate_with(
    h: &Operator,
    p: &Operator,
    order: InverseOrder,
) -> Result<Operator> {
    let n = h.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let herr = h.hermiticity_error();
    if herr >= 1e-12 * h.matrix().camax().max(1.0) {
        return Err(Error::NotHermitian(herr));
    }
    let pm = p.matrix();
    if max_abs_diff(&(pm * pm), pm) > 1e-10 || p.hermiticity_error() > 1e-12 {
        return Err(Error::validation("P must be an orthogonal projector"));
    }
    let hm = h.matrix();
    let scale = hm.norm().max(f64::MIN_POSITIVE);
    let qm = CMatrix::identity(n, n) - pm;
    let php = pm * hm * pm;
    let phq = pm * hm * &qm;
    let qhp = phq.adjoint();

    let q_inv = match order {
        InverseOrder::Exact => exact_q_inverse(hm, &qm, &phq, scale)?,
        InverseOrder::FirstOrder => first_order_q_inverse(hm, pm, scale)?,
    };
    let heff = php - &phq * q_inv * &qhp;
    let heff = (&heff + heff.adjoint()).unscale(2.0);
    Operator::hermitian(heff)
}

/// Orthonormal basis (as columns) of the range of a projector.
fn range_basis(proj: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(proj);
    let cols: Vec<_> = values
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.5)
        .map(|(k, _)| vectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(proj.nrows(), 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

fn exact_q_inverse(hm: &CMatrix, qm: &CMatrix, phq: &CMatrix, scale: f64) -> Result<CMatrix> {
    let n = hm.nrows();
    let bq = range_basis(qm);
    if bq.ncols() == 0 {
        return Ok(CMatrix::zeros(n, n));
    }
    let mq = bq.adjoint() * hm * &bq;
    let mq = (&mq + mq.adjoint()).unscale(2.0);
    let (values, vectors) = hermitian_eigen(&mq);
    let tol = 1e-10 * scale;
    let mut inv = CMatrix::zeros(bq.ncols(), bq.ncols());
    for (k, &lambda) in values.iter().enumerate() {
        let v = vectors.column(k);
        if lambda.abs() < tol {
            // A zero mode of QHQ that couples to P makes the limit diverge.
            let coupling = (phq * &bq * v).norm();
            if coupling > tol {
                return Err(Error::Singular(format!(
                    "QHQ has eigenvalue {lambda:e} on range(Q) coupled to P with strength {coupling:e}"
                )));
            }
            continue;
        }
        inv += (v * v.adjoint()).unscale(lambda);
    }
    Ok(&bq * inv * bq.adjoint())
}

fn first_order_q_inverse(hm: &CMatrix, pm: &CMatrix, scale: f64) -> Result<CMatrix> {
    let n = hm.nrows();
    // The split into interaction and hopping parts is defined in the given
    // basis, so P must select basis states.
    let off_diag = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j);
    if off_diag.clone().any(|(i, j)| pm[(i, j)].norm() > 1e-12) {
        return Err(Error::validation(
            "first-order elimination needs a basis-diagonal projector",
        ));
    }
    let q_idx: Vec<usize> = (0..n).filter(|&i| pm[(i, i)].re < 0.5).collect();
    let mut dinv = vec![0.0; n];
    for &i in &q_idx {
        let d = hm[(i, i)].re;
        if d.abs() < 1e-10 * scale {
            return Err(Error::Singular(format!(
                "diagonal energy {d:e} of eliminated state {i} vanishes"
            )));
        }
        dinv[i] = 1.0 / d;
    }
    let mut inv = CMatrix::zeros(n, n);
    for &i in &q_idx {
        inv[(i, i)] = C64::new(dinv[i], 0.0);
        for &j in &q_idx {
            if i != j {
                inv[(i, j)] = -hm[(i, j)] * dinv[i] * dinv[j];
            }
        }
    }
    Ok(inv)
}

/// Entries of the eliminated three-site Hamiltonian in the sector with two
/// `a` atoms and one `b` atom, in the basis `{|100⟩, |010⟩, |001⟩}`
/// (position of the `b` atom).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub g1: f64,
    pub g2: f64,
}

impl EffectiveCouplings {
    /// Closed-form second-order couplings for a three-site chain.
    pub fn from_params(p: &HubbardParams) -> Result<Self> {
        check_three_sites(p)?;
        let (j1a, j1b, j2a, j2b) = (p.j_a[0], p.j_b[0], p.j_a[1], p.j_b[1]);
        let (ua, uab) = (p.u_a, p.u_ab);
        Ok(EffectiveCouplings {
            f1: -(ua * (j1a * j1a + j1b * j1b) + 4.0 * uab * j2a * j2a) / (ua * uab),
            f2: -(j1a * j1a + j2a * j2a + j1b * j1b + j2b * j2b) / uab,
            f3: -(ua * (j2a * j2a + j2b * j2b) + 4.0 * uab * j1a * j1a) / (ua * uab),
            g1: -2.0 * j1a * j1b / uab,
            g2: -2.0 * j2a * j2b / uab,
        })
    }

    /// Reads the couplings off an eliminated Hamiltonian built on
    /// [`three_site_basis`].
    pub fn extract(heff: &Operator, basis: &FockBasis) -> Result<Self> {
        let idx = |k: usize| -> Result<usize> {
            let mut sites = vec![[1u8, 0u8]; 3];
            sites[k] = [0, 1];
            basis
                .index_of(&Occupation::new(sites))
                .ok_or_else(|| Error::validation("basis lacks the two-a/one-b sector"))
        };
        let (i1, i2, i3) = (idx(0)?, idx(1)?, idx(2)?);
        let m = heff.matrix();
        Ok(EffectiveCouplings {
            f1: m[(i1, i1)].re,
            f2: m[(i2, i2)].re,
            f3: m[(i3, i3)].re,
            g1: m[(i1, i2)].re,
            g2: m[(i2, i3)].re,
        })
    }

    /// Largest violation of `f1 = f2 + 2g1`, `g2 = 2g1`, `f3 = f2 + g1`.
    pub fn condition_residual(&self) -> f64 {
        [
            self.f1 - self.f2 - 2.0 * self.g1,
            self.g2 - 2.0 * self.g1,
            self.f3 - self.f2 - self.g1,
        ]
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
    }

    fn magnitude(&self) -> f64 {
        [self.f1, self.f2, self.f3, self.g1, self.g2]
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }
}

fn check_three_sites(p: &HubbardParams) -> Result<()> {
    p.validate()?;
    if p.sites() != 3 {
        return Err(Error::validation("three-site parameters expected"));
    }
    Ok(())
}

/// Three atoms on three sites, with mixed species (two of one kind, one of
/// the other). Fully polarized states do not occur in the register.
pub fn three_site_basis() -> Result<FockBasis> {
    let mut states = FockBasis::sector(3, 2, 1)?.states().to_vec();
    states.extend(FockBasis::sector(3, 1, 2)?.states().iter().cloned());
    FockBasis::from_states(3, states, "fock:M=3,n=3,mixed")
}

/// Maps the singly occupied block of an operator on a Fock basis whose
/// atoms sit one per site (atom `k` on site `k`) to the spin space of those
/// atoms, qubit 1 most significant. Missing spin configurations get zeros.
pub fn singly_occupied_block_to_spins(op: &Operator, basis: &FockBasis) -> Result<CMatrix> {
    let m = basis.sites();
    let dim = 1usize << m;
    let mut idx = vec![None; dim];
    for (spin, slot) in idx.iter_mut().enumerate() {
        let sites: Vec<[u8; 2]> = (0..m)
            .map(|k| {
                if (spin >> (m - 1 - k)) & 1 == 0 {
                    [1, 0]
                } else {
                    [0, 1]
                }
            })
            .collect();
        *slot = basis.index_of(&Occupation::new(sites));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| match (idx[r], idx[c]) {
        (Some(i), Some(j)) => op.matrix()[(i, j)],
        _ => ZERO,
    }))
}

/// Eliminated three-site Hamiltonian acting on the logical qubit.
#[derive(Clone, Debug, Serialize)]
pub struct XEffective {
    /// Diagonal term `u` (`⟨0_L|H|0_L⟩`).
    pub u: f64,
    /// Logical flip amplitude `v` (`⟨1_L|H|0_L⟩`).
    pub v: f64,
    /// Largest deviation of the logical block from `u·1 + v·X_L`.
    pub block_residual: f64,
    /// Norm of the part mapping DFS states out of the DFS.
    pub off_block: f64,
    /// Couplings read off the eliminated matrix.
    pub couplings: EffectiveCouplings,
    /// Violation of the symmetric coupling conditions.
    pub condition_residual: f64,
    /// Set when the parameters violate the conditions beyond tolerance.
    pub warning: Option<String>,
}

/// Adiabatically eliminates the three-site Hamiltonian of atoms 1–3 and
/// projects it on the logical qubit (atom 4 is a spectator).
pub fn effective_x_hamiltonian(params: &HubbardParams, order: InverseOrder) -> Result<XEffective> {
    check_three_sites(params)?;
    let basis = three_site_basis()?;
    let h = build_hamiltonian(params, &basis)?;
    let heff = adiabatic_eliminate_with(&h, &basis.singly_occupied_projector(), order)?;
    let couplings = EffectiveCouplings::extract(&heff, &basis)?;
    let spins3 = singly_occupied_block_to_spins(&heff, &basis)?;
    let full = spins3.kronecker(&CMatrix::identity(2, 2));
    let op = Operator::hermitian(full)?;
    let codec = DfsCodec::new();
    let block: Matrix2<C64> = codec.restrict(&op)?;
    let u = block[(0, 0)].re;
    let v = block[(1, 0)].re;
    let block_residual = [
        (block[(1, 1)] - u).norm(),
        (block[(0, 1)] - v).norm(),
        block[(1, 0)].im.abs(),
        block[(0, 0)].im.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let off_block = codec.off_block_norm(&op)?;
    let condition_residual = couplings.condition_residual();
    let tol = 1e-9 * couplings.magnitude().max(f64::MIN_POSITIVE);
    let warning = (condition_residual > tol).then(|| {
        format!("symmetric coupling conditions violated by {condition_residual:.3e}; H_eff is not u + v X_L")
    });
    Ok(XEffective {
        u,
        v,
        block_residual,
        off_block,
        couplings,
        condition_residual,
        warning,
    })
}

/// Three-site parameters `J₁ = J`, `J₂ = √2 J` (both species), all `U` equal.
pub fn symmetric_x_params(j: f64, u: f64) -> HubbardParams {
    HubbardParams::with_bonds(&[j, 2f64.sqrt() * j], u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::permutation_op;
    use crate::quantum::re;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn block_diagonal_hamiltonian_returns_php() {
        let h = Operator::hermitian(CMatrix::from_row_slice(
            3,
            3,
            &[
                re(1.0),
                re(0.3),
                ZERO,
                re(0.3),
                re(2.0),
                ZERO,
                ZERO,
                ZERO,
                re(9.0),
            ],
        ))
        .unwrap();
        let p = Operator::diagonal(&[1.0, 1.0, 0.0]);
        for order in [InverseOrder::Exact, InverseOrder::FirstOrder] {
            let heff = adiabatic_eliminate_with(&h, &p, order).unwrap();
            let php = p.matrix() * h.matrix() * p.matrix();
            assert!(max_abs_diff(heff.matrix(), &php) < 1e-15);
        }
    }

    #[test]
    fn three_site_sector_matches_closed_form_couplings() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let basis = three_site_basis().unwrap();
        for _ in 0..10 {
            let p = HubbardParams {
                j_a: vec![rng.gen_range(0.01..0.1), rng.gen_range(0.01..0.1)],
                j_b: vec![rng.gen_range(0.01..0.1), rng.gen_range(0.01..0.1)],
                u_a: rng.gen_range(1.0..5.0),
                u_b: rng.gen_range(1.0..5.0),
                u_ab: rng.gen_range(1.0..5.0),
            };
            let h = build_hamiltonian(&p, &basis).unwrap();
            let heff = adiabatic_eliminate_with(
                &h,
                &basis.singly_occupied_projector(),
                InverseOrder::FirstOrder,
            )
            .unwrap();
            let got = EffectiveCouplings::extract(&heff, &basis).unwrap();
            let want = EffectiveCouplings::from_params(&p).unwrap();
            for (a, b) in [
                (got.f1, want.f1),
                (got.f2, want.f2),
                (got.f3, want.f3),
                (got.g1, want.g1),
                (got.g2, want.g2),
            ] {
                assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn symmetric_parameters_give_logical_x_coupling() {
        let (j, u) = (0.01, 1.0);
        let x =
            effective_x_hamiltonian(&symmetric_x_params(j, u), InverseOrder::FirstOrder).unwrap();
        assert!(x.warning.is_none());
        assert!((x.u - x.couplings.f2).abs() < 1e-15);
        assert!((x.v - 3f64.sqrt() / 2.0 * x.couplings.g2).abs() < 1e-15);
        assert!((x.v + 2.0 * 3f64.sqrt() * j * j / u).abs() < 1e-15);
        assert!(x.block_residual < 1e-15 && x.off_block < 1e-15);

        let exact =
            effective_x_hamiltonian(&symmetric_x_params(j, u), InverseOrder::Exact).unwrap();
        let rel = (exact.v - x.v).abs() / x.v.abs();
        assert!(rel < 10.0 * (j / u).powi(2), "relative deviation {rel:e}");
    }

    #[test]
    fn zero_hopping_gives_zero_coupling() {
        let x =
            effective_x_hamiltonian(&symmetric_x_params(0.0, 1.0), InverseOrder::Exact).unwrap();
        assert_eq!((x.u, x.v), (0.0, 0.0));
    }

    #[test]
    fn detuned_parameters_carry_a_warning() {
        let mut p = symmetric_x_params(0.01, 1.0);
        p.u_ab = 1.1;
        let x = effective_x_hamiltonian(&p, InverseOrder::FirstOrder).unwrap();
        assert!(x.warning.is_some());
    }

    #[test]
    fn two_site_pair_gives_exchange_hamiltonian() {
        let (j, u) = (0.02, 1.5);
        let basis = FockBasis::with_total(2, 2).unwrap();
        let h = build_hamiltonian(&HubbardParams::uniform(2, j, u), &basis).unwrap();
        let heff = adiabatic_eliminate(&h, &basis.singly_occupied_projector()).unwrap();
        let spins = singly_occupied_block_to_spins(&heff, &basis).unwrap();
        // -(2J²/U)(V + 1) on two qubits.
        let v = permutation_op(1, 2).unwrap();
        let v2 = CMatrix::from_fn(4, 4, |r, c| v.matrix()[(r << 2, c << 2)]);
        let want = (v2 + CMatrix::identity(4, 4)).map(|a| a * (-2.0 * j * j / u));
        assert!(max_abs_diff(&spins, &want) < 1e-15);
    }

    #[test]
    fn singular_coupled_block_is_an_error() {
        // Q state with zero energy coupled to P.
        let h = Operator::hermitian(CMatrix::from_row_slice(
            2,
            2,
            &[ZERO, re(1.0), re(1.0), ZERO],
        ))
        .unwrap();
        let p = Operator::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            adiabatic_eliminate(&h, &p),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            adiabatic_eliminate_with(&h, &p, InverseOrder::FirstOrder),
            Err(Error::Singular(_))
        ));
    }
}
