//! Closed-form evolution of non-interacting register atoms.
//!
//! Without interactions the bosons move independently, so a Fock state
//! `Π a†_{s_k}|vac⟩` evolves into `Π (Σ_r G_{r s_k} a†_r)|vac⟩`, with `G` the
//! single-particle propagator of the hopping chain. For an open chain of two
//! or three sites `G` is elementary and serves as an independent check of the
//! numerical propagation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fock::{FockBasis, Occupation, Species};
use super::gates::ANCILLA_SITE;
use super::hamiltonian::HubbardParams;
use super::register::RegisterLayout;
use crate::dfs::DfsCodec;
use crate::error::{Error, Result};
use crate::quantum::{CMatrix, CVector, StateVector, C64, ZERO};

/// Free evolutions of the logical basis states available in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeEvolution {
    /// `|0_L⟩` with atoms 1, 2 hopping on their bond.
    RzZero,
    /// `|1_L⟩` with atoms 1, 2 hopping on their bond.
    RzOne,
    /// `|0_L⟩` with atoms 3, 4 hopping through the empty ancilla site.
    CphaseZero,
    /// `|1_L⟩` with atoms 3, 4 hopping through the empty ancilla site.
    CphaseOne,
}

impl FreeEvolution {
    pub fn logical(self) -> usize {
        match self {
            FreeEvolution::RzZero | FreeEvolution::CphaseZero => 0,
            FreeEvolution::RzOne | FreeEvolution::CphaseOne => 1,
        }
    }

    /// First site and length of the hopping window.
    fn window(self) -> (usize, usize) {
        match self {
            FreeEvolution::RzZero | FreeEvolution::RzOne => (0, 2),
            FreeEvolution::CphaseZero | FreeEvolution::CphaseOne => (ANCILLA_SITE - 1, 3),
        }
    }

    /// Hopping amplitudes of the standard layout for this evolution.
    pub fn params(self, j: f64) -> HubbardParams {
        match self.window() {
            (0, 2) => HubbardParams::with_bonds(&[j, 0.0, 0.0, 0.0], 0.0),
            _ => HubbardParams::with_bonds(&[0.0, 0.0, j, j], 0.0),
        }
    }

    /// Natural Fock basis reached by the free evolution.
    pub fn natural_basis(self, j: f64) -> Result<FockBasis> {
        RegisterLayout::standard().basis(&self.params(j))
    }
}

/// Single-particle propagator `exp(iJAt)` of an open chain of `sites ∈ {2, 3}`
/// (`A` = adjacency matrix), for the hopping term `−J Σ a†_i a_j + h.c.`.
pub fn chain_propagator(sites: usize, j: f64, t: f64) -> Result<CMatrix> {
    match sites {
        2 => {
            let (c, s) = ((j * t).cos(), (j * t).sin());
            Ok(CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(c, 0.0),
                    C64::new(0.0, s),
                    C64::new(0.0, s),
                    C64::new(c, 0.0),
                ],
            ))
        }
        3 => {
            let w = 2f64.sqrt() * j * t;
            let (c, s) = (w.cos(), w.sin());
            let edge = C64::new(0.0, s / 2f64.sqrt());
            let same = C64::new((1.0 + c) / 2.0, 0.0);
            let across = C64::new((c - 1.0) / 2.0, 0.0);
            Ok(CMatrix::from_row_slice(
                3,
                3,
                &[
                    same,
                    edge,
                    across,
                    edge,
                    C64::new(c, 0.0),
                    edge,
                    across,
                    edge,
                    same,
                ],
            ))
        }
        n => Err(Error::validation(format!(
            "closed form available for 2- or 3-site chains, not {n}"
        ))),
    }
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// State of the freely evolved logical basis state at time `t`, expressed in
/// `basis` (which must contain every reachable Fock state).
pub fn closed_form_free_evolution(
    which: FreeEvolution,
    j: f64,
    t: f64,
    basis: &FockBasis,
) -> Result<StateVector> {
    if !(j.is_finite() && t.is_finite()) {
        return Err(Error::validation("J and t must be finite"));
    }
    let layout = RegisterLayout::standard();
    if basis.sites() != layout.sites() {
        return Err(Error::validation(
            "basis must describe the five-site register",
        ));
    }
    let (start, len) = which.window();
    let g = chain_propagator(len, j, t)?;
    let codec = DfsCodec::new();
    let mut out: BTreeMap<Occupation, C64> = BTreeMap::new();
    for (index, &c) in codec
        .logical(which.logical())
        .amplitudes()
        .iter()
        .enumerate()
    {
        if c == ZERO {
            continue;
        }
        // Home configurations are singly occupied, so the input needs no
        // normalization; expand each creation operator inside the window.
        let occ = layout.occupation(index);
        let mut terms: Vec<(Occupation, C64)> = vec![(Occupation::empty(layout.sites()), c)];
        for site in 0..layout.sites() {
            for species in Species::BOTH
                .into_iter()
                .flat_map(|s| std::iter::repeat_n(s, occ.get(site, s) as usize))
            {
                let targets: Vec<(usize, C64)> = if (start..start + len).contains(&site) {
                    (0..len)
                        .map(|r| (start + r, g[(r, site - start)]))
                        .filter(|(_, a)| *a != ZERO)
                        .collect()
                } else {
                    vec![(site, C64::new(1.0, 0.0))]
                };
                terms = terms
                    .iter()
                    .flat_map(|(o, a)| {
                        targets
                            .iter()
                            .map(move |&(r, g)| (o.with_added(r, species), a * g))
                    })
                    .collect();
            }
        }
        for (o, a) in terms {
            *out.entry(o).or_insert(ZERO) += a;
        }
    }
    let mut amps = CVector::zeros(basis.len());
    for (o, a) in out {
        let norm: f64 = (0..o.sites())
            .map(|s| o.site(s).iter().map(|&n| factorial(n)).product::<f64>())
            .product();
        let value = a * norm.sqrt();
        match basis.index_of(&o) {
            Some(k) => amps[k] += value,
            None if value.norm() < 1e-15 => {}
            None => {
                return Err(Error::validation(format!(
                    "basis lacks reachable state {o:?}"
                )))
            }
        }
    }
    StateVector::new(amps, basis.tag().clone())
}
