//! Qubit encoding of the full Hamiltonian as three Pauli sums.
//!
//! The coupling uses the traceless site projector `|i><i| - 1/2 = -Z_i / 2`,
//! so each site couples to its oscillators through `Z_i` alone. The extra
//! `-chi/2 (a† + a)` per mode relative to the bare projector is a static
//! displacement shared by every site; the exact-diagonalization oracle uses
//! the same form, so circuit and reference describe one Hamiltonian.

use crate::error::{Error, Result};
use crate::model::{validate, ModelParams};
use crate::pauli::{number_operator, position_like_terms, Pauli, PauliString, PauliSum};

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedHamiltonian {
    pub electronic: PauliSum,
    pub phonon: PauliSum,
    pub coupling: PauliSum,
}

impl EncodedHamiltonian {
    pub fn total(&self) -> PauliSum {
        self.electronic.add(&self.phonon).add(&self.coupling)
    }
}

/// `sum_i eps_i (I - Z_i)/2 + sum_{i<j} V_ij (X_i X_j + Y_i Y_j)/2`.
pub fn electronic(params: &ModelParams) -> PauliSum {
    let layout = params.layout();
    let mut terms = Vec::new();
    for (i, &eps) in params.site_energies.iter().enumerate() {
        let q = layout.site_qubit(i);
        terms.push((eps / 2.0, PauliString::identity()));
        terms.push((-eps / 2.0, PauliString::single(q, Pauli::Z)));
    }
    for (i, j, v) in params.hopping_pairs() {
        let (a, b) = (layout.site_qubit(i), layout.site_qubit(j));
        terms.push((v / 2.0, PauliString::new([(a, Pauli::X), (b, Pauli::X)])));
        terms.push((v / 2.0, PauliString::new([(a, Pauli::Y), (b, Pauli::Y)])));
    }
    PauliSum::from_terms(terms)
}

/// `sum_il omega_il n_il`, zero-point energy dropped.
pub fn phonon(params: &ModelParams) -> Result<PauliSum> {
    let layout = params.layout();
    let mut sum = PauliSum::zero();
    for i in 0..params.n_sites {
        for l in 0..params.modes_per_site {
            let n = number_operator(params.qubits_per_mode, layout.mode_register(i, l))?;
            sum = sum.add(&n.scaled(params.frequencies[i][l]));
        }
    }
    Ok(sum)
}

/// Pauli terms `(coefficient, string)` of `-chi/2 Z_i (a† + a)` for one mode,
/// in the construction order of [`position_like_terms`].
pub fn coupling_terms(params: &ModelParams, site: usize, mode: usize) -> Result<Vec<(f64, PauliString)>> {
    let layout = params.layout();
    let chi = params.couplings[site][mode];
    let x = position_like_terms(params.qubits_per_mode, layout.mode_register(site, mode))?;
    let zq = layout.site_qubit(site);
    Ok(x.iter()
        .map(|t| (-0.5 * chi * t.coefficient, t.string.with(zq, Pauli::Z)))
        .collect())
}

pub fn coupling(params: &ModelParams) -> Result<PauliSum> {
    let mut terms = Vec::new();
    for i in 0..params.n_sites {
        for l in 0..params.modes_per_site {
            terms.extend(coupling_terms(params, i, l)?);
        }
    }
    Ok(PauliSum::from_terms(terms))
}

pub fn encode(params: &ModelParams) -> Result<EncodedHamiltonian> {
    validate(params).map_err(Error::Model)?;
    Ok(EncodedHamiltonian {
        electronic: electronic(params),
        phonon: phonon(params)?,
        coupling: coupling(params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::pauli_sum_matrix;

    #[test]
    fn dimer_electronic_part_is_pure_hopping() {
        let p = ModelParams::dimer(0.7, 0.3, 1);
        let el = electronic(&p);
        assert_eq!(el.len(), 2);
        let m = pauli_sum_matrix(&el, 2).unwrap();
        // |10> (index 1) couples to |01> (index 2) with amplitude V.
        assert!((m[(2, 1)].re - 0.7).abs() < 1e-15);
        assert!(m[(0, 0)].norm() < 1e-15 && m[(3, 3)].norm() < 1e-15);
    }

    #[test]
    fn site_energy_is_diagonal_on_the_excited_state() {
        let mut p = ModelParams::dimer(0.0, 0.0, 1);
        p.site_energies = vec![0.25, -1.5];
        let m = pauli_sum_matrix(&electronic(&p), 2).unwrap();
        assert!((m[(1, 1)].re - 0.25).abs() < 1e-15);
        assert!((m[(2, 2)].re + 1.5).abs() < 1e-15);
        assert!(m[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn coupling_acts_as_signed_displacement() {
        let p = ModelParams::uniform_chain(1, 0.0, 0.8, 1.0, 2);
        let m = pauli_sum_matrix(&coupling(&p).unwrap(), 3).unwrap();
        // Site qubit 0, register 1..3. Site excited: +chi/2 x; ground: -chi/2 x.
        let idx = |site: usize, level: usize| site | (level << 1);
        assert!((m[(idx(1, 1), idx(1, 0))].re - 0.4).abs() < 1e-14);
        assert!((m[(idx(0, 1), idx(0, 0))].re + 0.4).abs() < 1e-14);
        assert!((m[(idx(1, 3), idx(1, 2))].re - 0.4 * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = ModelParams::dimer(1.0, 0.3, 1);
        p.frequencies[0][0] = -1.0;
        assert!(matches!(encode(&p), Err(Error::Model(_))));
    }
}
