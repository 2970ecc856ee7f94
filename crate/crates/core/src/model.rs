//! Physical parameters and the qubit register layout.
//!
//! Energies are in units of `hbar * omega` and times in units of `1 / omega`.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, ModelError, Result};

/// Parameters of the site / local-oscillator model.
///
/// `hopping[i][j]` couples sites `i` and `j`; `frequencies[i][l]` and
/// `couplings[i][l]` describe the `l`-th oscillator attached to site `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n_sites: usize,
    pub site_energies: Vec<f64>,
    pub hopping: Vec<Vec<f64>>,
    pub modes_per_site: usize,
    pub frequencies: Vec<Vec<f64>>,
    pub couplings: Vec<Vec<f64>>,
    pub qubits_per_mode: usize,
}

impl ModelParams {
    /// Uniform chain: nearest-neighbour hopping `v`, one oscillator of
    /// frequency `omega` and coupling `chi` on every site, zero site energies.
    pub fn uniform_chain(n_sites: usize, v: f64, chi: f64, omega: f64, qubits_per_mode: usize) -> Self {
        let mut hopping = vec![vec![0.0; n_sites]; n_sites];
        for i in 1..n_sites {
            hopping[i - 1][i] = v;
            hopping[i][i - 1] = v;
        }
        ModelParams {
            n_sites,
            site_energies: vec![0.0; n_sites],
            hopping,
            modes_per_site: 1,
            frequencies: vec![vec![omega]; n_sites],
            couplings: vec![vec![chi]; n_sites],
            qubits_per_mode,
        }
    }

    /// Two sites, the configuration used by most of the convergence studies.
    pub fn dimer(v: f64, chi: f64, qubits_per_mode: usize) -> Self {
        Self::uniform_chain(2, v, chi, 1.0, qubits_per_mode)
    }

    pub fn with_qubits_per_mode(&self, qubits_per_mode: usize) -> Self {
        ModelParams {
            qubits_per_mode,
            ..self.clone()
        }
    }

    /// Number of levels per oscillator, `2^n_x`.
    pub fn levels(&self) -> usize {
        1usize << self.qubits_per_mode
    }

    pub fn n_modes(&self) -> usize {
        self.n_sites * self.modes_per_site
    }

    pub fn n_qubits(&self) -> usize {
        self.layout().n_qubits()
    }

    pub fn layout(&self) -> QubitLayout {
        QubitLayout {
            n_sites: self.n_sites,
            modes_per_site: self.modes_per_site,
            qubits_per_mode: self.qubits_per_mode,
        }
    }

    /// Nonzero hopping pairs `(i, j, V_ij)` with `i < j`, in row-major order.
    pub fn hopping_pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut pairs = Vec::new();
        for i in 0..self.n_sites {
            for j in (i + 1)..self.n_sites {
                let v = self.hopping[i][j];
                if v != 0.0 {
                    pairs.push((i, j, v));
                }
            }
        }
        pairs
    }

    /// Largest hopping magnitude; the natural time unit is `1 / (2 V_max)`.
    pub fn max_hopping(&self) -> f64 {
        self.hopping.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            return Err(ModelError::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            }
            .into());
        }
        Ok(())
    }
}

/// Maps sites and oscillator registers onto global qubit indices.
///
/// Site qubits come first (`0..N`); register `(i, l)` then occupies
/// `n_x` consecutive qubits starting at `N + (i * l_count + l) * n_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitLayout {
    pub n_sites: usize,
    pub modes_per_site: usize,
    pub qubits_per_mode: usize,
}

impl QubitLayout {
    pub fn site_qubit(&self, site: usize) -> usize {
        debug_assert!(site < self.n_sites);
        site
    }

    pub fn mode_register(&self, site: usize, mode: usize) -> Range<usize> {
        debug_assert!(site < self.n_sites && mode < self.modes_per_site);
        let start = self.n_sites + (site * self.modes_per_site + mode) * self.qubits_per_mode;
        start..start + self.qubits_per_mode
    }

    pub fn n_qubits(&self) -> usize {
        self.n_sites + self.n_sites * self.modes_per_site * self.qubits_per_mode
    }
}

/// Checks every invariant and reports all violations at once.
pub fn validate(params: &ModelParams) -> std::result::Result<(), Vec<ModelError>> {
    let mut errors = Vec::new();
    let n = params.n_sites;
    let l = params.modes_per_site;
    if n == 0 {
        errors.push(ModelError::NoSites);
    }
    if l == 0 {
        errors.push(ModelError::NoModes);
    }
    if params.qubits_per_mode == 0 {
        errors.push(ModelError::ZeroQubitsPerMode);
    }
    if params.site_energies.len() != n {
        errors.push(ModelError::Shape {
            field: "site_energies",
            found: params.site_energies.len().to_string(),
            expected: n.to_string(),
        });
    } else if params.site_energies.iter().any(|e| !e.is_finite()) {
        errors.push(ModelError::NonFinite { field: "site_energies" });
    }

    if !is_shape(&params.hopping, n, n) {
        errors.push(ModelError::Shape {
            field: "hopping",
            found: shape_of(&params.hopping),
            expected: format!("{n}x{n}"),
        });
    } else if params.hopping.iter().flatten().any(|v| !v.is_finite()) {
        errors.push(ModelError::NonFinite { field: "hopping" });
    } else {
        for i in 0..n {
            if params.hopping[i][i] != 0.0 {
                errors.push(ModelError::NonzeroDiagonal { site: i });
            }
            for j in (i + 1)..n {
                let (forward, backward) = (params.hopping[i][j], params.hopping[j][i]);
                if forward != backward {
                    errors.push(ModelError::AsymmetricHopping {
                        i,
                        j,
                        forward,
                        backward,
                    });
                }
            }
        }
    }

    if !is_shape(&params.frequencies, n, l) {
        errors.push(ModelError::Shape {
            field: "frequencies",
            found: shape_of(&params.frequencies),
            expected: format!("{n}x{l}"),
        });
    } else {
        for (site, row) in params.frequencies.iter().enumerate() {
            for (mode, &value) in row.iter().enumerate() {
                if !value.is_finite() || value <= 0.0 {
                    errors.push(ModelError::NonPositiveFrequency { site, mode, value });
                }
            }
        }
    }

    if !is_shape(&params.couplings, n, l) {
        errors.push(ModelError::Shape {
            field: "couplings",
            found: shape_of(&params.couplings),
            expected: format!("{n}x{l}"),
        });
    } else if params.couplings.iter().flatten().any(|v| !v.is_finite()) {
        errors.push(ModelError::NonFinite { field: "couplings" });
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn is_shape(m: &[Vec<f64>], rows: usize, cols: usize) -> bool {
    m.len() == rows && m.iter().all(|r| r.len() == cols)
}

fn shape_of(m: &[Vec<f64>]) -> String {
    let cols: Vec<String> = m.iter().map(|r| r.len().to_string()).collect();
    format!("{} rows with lengths [{}]", m.len(), cols.join(", "))
}

/// Random chain with hopping, couplings and frequencies drawn i.i.d. from
/// `[lo, hi]`. A degenerate interval `lo == hi` yields constant parameters.
///
/// Draw order is fixed (hoppings along the chain, then per-site couplings,
/// then per-site frequencies) so a seed identifies one instance.
pub fn random_chain(n_sites: usize, qubits_per_mode: usize, seed: u64, lo: f64, hi: f64) -> Result<ModelParams> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(ModelError::InvalidInterval { lo, hi }.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || lo + (hi - lo) * rng.random::<f64>();

    let mut hopping = vec![vec![0.0; n_sites]; n_sites];
    for i in 1..n_sites {
        let v = draw();
        hopping[i - 1][i] = v;
        hopping[i][i - 1] = v;
    }
    let couplings = (0..n_sites).map(|_| vec![draw()]).collect();
    let frequencies = (0..n_sites).map(|_| vec![draw()]).collect();
    let params = ModelParams {
        n_sites,
        site_energies: vec![0.0; n_sites],
        hopping,
        modes_per_site: 1,
        frequencies,
        couplings,
        qubits_per_mode,
    };
    validate(&params).map_err(Error::Model)?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_is_valid() {
        let p = ModelParams {
            n_sites: 2,
            site_energies: vec![0.0, 0.0],
            hopping: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            modes_per_site: 1,
            frequencies: vec![vec![1.0], vec![1.0]],
            couplings: vec![vec![0.3], vec![0.3]],
            qubits_per_mode: 1,
        };
        assert_eq!(validate(&p), Ok(()));
    }

    #[test]
    fn asymmetric_hopping_is_reported() {
        let mut p = ModelParams::dimer(1.0, 0.3, 1);
        p.hopping[0][1] = 0.5;
        let errs = validate(&p).unwrap_err();
        assert!(matches!(errs[0], ModelError::AsymmetricHopping { i: 0, j: 1, .. }));
        assert!(errs[0].to_string().contains("asymmetric hopping"));
    }

    #[test]
    fn zero_frequency_is_reported() {
        let mut p = ModelParams::dimer(1.0, 0.3, 1);
        p.frequencies[1][0] = 0.0;
        let errs = validate(&p).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].to_string().contains("non-positive frequency"));
    }

    #[test]
    fn all_violations_are_collected() {
        let mut p = ModelParams::dimer(1.0, 0.3, 0);
        p.hopping[1][0] = 2.0;
        p.frequencies[0][0] = -1.0;
        let errs = validate(&p).unwrap_err();
        assert_eq!(errs.len(), 3);
        assert!(errs.contains(&ModelError::ZeroQubitsPerMode));
    }

    #[test]
    fn layout_covers_register_space() {
        let layout = QubitLayout {
            n_sites: 3,
            modes_per_site: 2,
            qubits_per_mode: 2,
        };
        let mut seen = vec![false; layout.n_qubits()];
        for i in 0..3 {
            seen[layout.site_qubit(i)] = true;
            for l in 0..2 {
                for q in layout.mode_register(i, l) {
                    assert!(!seen[q], "qubit {q} assigned twice");
                    seen[q] = true;
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(layout.n_qubits(), 3 + 3 * 2 * 2);
    }

    #[test]
    fn random_chain_is_deterministic_and_in_range() {
        let a = random_chain(7, 3, 11, 0.8, 1.2).unwrap();
        let b = random_chain(7, 3, 11, 0.8, 1.2).unwrap();
        assert_eq!(a, b);
        let nonzero: Vec<f64> = a.hopping.iter().flatten().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nonzero.len(), 2 * 6);
        for v in nonzero
            .iter()
            .chain(a.couplings.iter().flatten())
            .chain(a.frequencies.iter().flatten())
        {
            assert!((0.8..=1.2).contains(v));
        }
        for i in 0..7 {
            for j in 0..7 {
                if a.hopping[i][j] != 0.0 {
                    assert_eq!((i as i64 - j as i64).abs(), 1);
                }
            }
        }
        assert_ne!(a, random_chain(7, 3, 12, 0.8, 1.2).unwrap());
    }

    #[test]
    fn degenerate_interval_gives_constants() {
        let p = random_chain(2, 1, 99, 1.0, 1.0).unwrap();
        assert_eq!(p.couplings, vec![vec![1.0], vec![1.0]]);
        assert_eq!(p.hopping[0][1], 1.0);
        assert_eq!(p.frequencies, vec![vec![1.0], vec![1.0]]);
    }

    #[test]
    fn inverted_interval_is_rejected() {
        assert!(random_chain(3, 1, 0, 1.2, 0.8).is_err());
    }

    #[test]
    fn site_range_check() {
        let p = ModelParams::dimer(1.0, 0.3, 1);
        assert!(p.check_site(1).is_ok());
        assert!(p.check_site(2).is_err());
    }
}
