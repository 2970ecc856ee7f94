//! Exact-diagonalization reference in the single-excitation sector with
//! each oscillator truncated to its own Fock cutoff.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::encode;
use crate::model::{validate, ModelParams};
use crate::pauli::pauli_sum_matrix;
use crate::C64;

pub const DEFAULT_FOCK_CUTOFF: usize = 16;
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Basis `|k> (x) |n_0 ... n_{M-1}>`: excitation on site `k`, mode `m`
/// (site `i`, local mode `l`, `m = i * l_count + l`) holding `n_m < D` quanta.
/// Index is `k * D^M + sum_m n_m D^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdBasis {
    pub n_sites: usize,
    pub n_modes: usize,
    pub fock_cutoff: usize,
}

impl EdBasis {
    pub fn new(params: &ModelParams, fock_cutoff: usize) -> Result<Self> {
        Self::with_cap(params, fock_cutoff, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(params: &ModelParams, fock_cutoff: usize, cap: usize) -> Result<Self> {
        let basis = EdBasis {
            n_sites: params.n_sites,
            n_modes: params.n_modes(),
            fock_cutoff: fock_cutoff.max(1),
        };
        let dim = basis
            .fock_dimension()
            .and_then(|f| f.checked_mul(basis.n_sites))
            .unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::DimensionExceeded {
                requested: dim,
                limit: cap,
            });
        }
        Ok(basis)
    }

    fn fock_dimension(&self) -> Option<usize> {
        self.fock_cutoff.checked_pow(self.n_modes as u32)
    }

    pub fn fock_states(&self) -> usize {
        self.fock_dimension().expect("checked at construction")
    }

    pub fn dimension(&self) -> usize {
        self.n_sites * self.fock_states()
    }

    pub fn index(&self, site: usize, levels: &[usize]) -> usize {
        let fock = levels.iter().rev().fold(0, |acc, &n| acc * self.fock_cutoff + n);
        site * self.fock_states() + fock
    }

    /// Inverse of [`EdBasis::index`].
    pub fn decode(&self, index: usize) -> (usize, Vec<usize>) {
        let f = self.fock_states();
        let (site, mut fock) = (index / f, index % f);
        let levels = (0..self.n_modes)
            .map(|_| {
                let n = fock % self.fock_cutoff;
                fock /= self.fock_cutoff;
                n
            })
            .collect();
        (site, levels)
    }
}

/// Real symmetric Hamiltonian matrix, using the same traceless-projector
/// coupling `chi_il (delta_ik - 1/2)(a† + a)` as the qubit encoding.
pub fn hamiltonian_matrix(params: &ModelParams, basis: &EdBasis) -> Result<DMatrix<f64>> {
    validate(params).map_err(Error::Model)?;
    let dim = basis.dimension();
    let f = basis.fock_states();
    let d = basis.fock_cutoff;
    let l_count = params.modes_per_site;
    let mut h = DMatrix::<f64>::zeros(dim, dim);

    for fock in 0..f {
        let (_, levels) = basis.decode(fock);
        let phonon: f64 = levels
            .iter()
            .enumerate()
            .map(|(m, &n)| params.frequencies[m / l_count][m % l_count] * n as f64)
            .sum();
        for k in 0..basis.n_sites {
            let row = k * f + fock;
            h[(row, row)] += params.site_energies[k] + phonon;
            for (j, &v) in params.hopping[k].iter().enumerate() {
                if j != k && v != 0.0 {
                    h[(j * f + fock, row)] += v;
                }
            }
            // Raise mode m by one quantum; the transpose is added alongside.
            let mut stride = 1;
            for (m, &n) in levels.iter().enumerate() {
                let (i, l) = (m / l_count, m % l_count);
                let chi = params.couplings[i][l];
                if chi != 0.0 && n + 1 < d {
                    let weight = if i == k { 0.5 } else { -0.5 };
                    let amp = chi * weight * ((n + 1) as f64).sqrt();
                    let up = row + stride;
                    h[(up, row)] += amp;
                    h[(row, up)] += amp;
                }
                stride *= d;
            }
        }
    }
    Ok(h)
}

/// Eigendecomposition-based propagator from one initial basis state.
pub struct EdPropagator {
    basis: EdBasis,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
    /// Overlaps of the initial state with each eigenvector.
    weights: DVector<f64>,
}

impl EdPropagator {
    /// Starts from the excitation on `excited_site` with every oscillator in
    /// its ground state.
    pub fn new(params: &ModelParams, basis: EdBasis, excited_site: usize) -> Result<Self> {
        params.check_site(excited_site)?;
        let h = hamiltonian_matrix(params, &basis)?;
        let eig = SymmetricEigen::new(h);
        let start = basis.index(excited_site, &vec![0; basis.n_modes]);
        let weights = eig.eigenvectors.row(start).transpose();
        Ok(EdPropagator {
            basis,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
            weights,
        })
    }

    pub fn basis(&self) -> &EdBasis {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn state(&self, t: f64) -> Vec<C64> {
        let dim = self.basis.dimension();
        let coeffs: Vec<C64> = self
            .energies
            .iter()
            .zip(self.weights.iter())
            .map(|(&e, &w)| C64::from_polar(w, -e * t))
            .collect();
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        for (n, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() < 1e-300 {
                continue;
            }
            for (amp, &v) in psi.iter_mut().zip(self.vectors.column(n).iter()) {
                *amp += c * v;
            }
        }
        psi
    }

    pub fn populations(&self, t: f64) -> Vec<f64> {
        let f = self.basis.fock_states();
        let psi = self.state(t);
        (0..self.basis.n_sites)
            .map(|k| psi[k * f..(k + 1) * f].iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Distribution over the levels of mode `m` at time `t`.
    pub fn occupation(&self, t: f64, mode: usize) -> Vec<f64> {
        let d = self.basis.fock_cutoff;
        let stride = d.pow(mode as u32);
        let mut occ = vec![0.0; d];
        for (idx, a) in self.state(t).iter().enumerate() {
            occ[(idx / stride) % d] += a.norm_sqr();
        }
        occ
    }

    pub fn energy(&self) -> f64 {
        self.energies
            .iter()
            .zip(self.weights.iter())
            .map(|(e, w)| e * w * w)
            .sum()
    }
}

/// `P_k(t)` for every requested time.
pub fn evolve_populations(
    params: &ModelParams,
    basis: &EdBasis,
    excited_site: usize,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let prop = EdPropagator::new(params, *basis, excited_site)?;
    Ok(times.iter().map(|&t| prop.populations(t)).collect())
}

/// Dense matrix of the encoded qubit Hamiltonian, identity terms included.
pub fn full_qubit_hamiltonian(params: &ModelParams) -> Result<DMatrix<C64>> {
    let h = encode(params)?;
    pauli_sum_matrix(&h.total(), params.n_qubits())
}

/// Qubit-register basis index of `|k> (x) |levels>` (single excitation).
pub fn qubit_index(params: &ModelParams, site: usize, levels: &[usize]) -> usize {
    let layout = params.layout();
    let mut b = 1usize << layout.site_qubit(site);
    for (m, &n) in levels.iter().enumerate() {
        let reg = layout.mode_register(m / params.modes_per_site, m % params.modes_per_site);
        b |= n << reg.start;
    }
    b
}
