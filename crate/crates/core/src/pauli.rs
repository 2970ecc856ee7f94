//! Pauli-string algebra and the qubit encodings of site and oscillator operators.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Terms whose coefficient magnitude falls below this are dropped on merge.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Dense matrices are only built up to this many qubits.
pub const DENSE_QUBIT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * other = phase * result`, with `None` standing for the identity.
    fn mul(self, other: Pauli) -> (C64, Option<Pauli>) {
        use Pauli::*;
        let i = C64::new(0.0, 1.0);
        match (self, other) {
            (a, b) if a == b => (C64::new(1.0, 0.0), None),
            (X, Y) => (i, Some(Z)),
            (Y, X) => (-i, Some(Z)),
            (Y, Z) => (i, Some(X)),
            (Z, Y) => (-i, Some(X)),
            (Z, X) => (i, Some(Y)),
            (X, Z) => (-i, Some(Y)),
            _ => unreachable!(),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, identity on every qubit not listed.
///
/// Factors are kept sorted by qubit index with at most one factor per qubit,
/// so derived equality and ordering are structural.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    factors: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Self {
        PauliString {
            factors: vec![(qubit, pauli)],
        }
    }

    /// Builds a string from arbitrary factors; panics on a repeated qubit.
    pub fn new(factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut factors: Vec<_> = factors.into_iter().collect();
        factors.sort_by_key(|&(q, _)| q);
        for w in factors.windows(2) {
            assert!(w[0].0 != w[1].0, "qubit {} appears twice in a Pauli string", w[0].0);
        }
        PauliString { factors }
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        self.factors
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .ok()
            .map(|k| self.factors[k].1)
    }

    /// Smallest register width that contains every factor.
    pub fn min_qubits(&self) -> usize {
        self.factors.last().map_or(0, |&(q, _)| q + 1)
    }

    /// Same string with one extra factor on a qubit it does not yet touch.
    pub fn with(&self, qubit: usize, pauli: Pauli) -> Self {
        assert!(self.get(qubit).is_none(), "qubit {qubit} already carries a factor");
        let mut factors = self.factors.clone();
        factors.push((qubit, pauli));
        Self::new(factors)
    }

    /// `self * other = phase * product`.
    pub fn mul(&self, other: &PauliString) -> (C64, PauliString) {
        let mut phase = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut a, mut b) = (self.factors.iter().peekable(), other.factors.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(qa, pa)), Some(&&(qb, pb))) => {
                    if qa < qb {
                        out.push((qa, pa));
                        a.next();
                    } else if qb < qa {
                        out.push((qb, pb));
                        b.next();
                    } else {
                        let (ph, p) = pa.mul(pb);
                        phase *= ph;
                        if let Some(p) = p {
                            out.push((qa, p));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some(&&f), None) => {
                    out.push(f);
                    a.next();
                }
                (None, Some(&&f)) => {
                    out.push(f);
                    b.next();
                }
                (None, None) => break,
            }
        }
        (phase, PauliString { factors: out })
    }

    /// Bit mask of qubits flipped by the string (X or Y factors).
    pub fn flip_mask(&self) -> usize {
        self.factors
            .iter()
            .filter(|(_, p)| *p != Pauli::Z)
            .fold(0, |m, &(q, _)| m | (1 << q))
    }

    /// `(flip, phase)` with `P|b> = phase |b ^ flip>` for basis index `b`.
    pub fn apply_to_basis(&self, b: usize) -> (usize, C64) {
        let mut phase = C64::new(1.0, 0.0);
        for &(q, p) in &self.factors {
            let bit = (b >> q) & 1;
            let sign = if bit == 1 { -1.0 } else { 1.0 };
            match p {
                Pauli::X => {}
                Pauli::Y => phase *= C64::new(0.0, sign),
                Pauli::Z => phase *= sign,
            }
        }
        (b ^ self.flip_mask(), phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (k, (q, p)) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.symbol(), q)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// Real-weighted sum of Pauli strings in canonical form: sorted by string,
/// one term per string, no coefficient below [`MERGE_TOLERANCE`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PauliSum {
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (f64, PauliString)>) -> Self {
        let mut map: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, s) in terms {
            *map.entry(s).or_insert(0.0) += c;
        }
        PauliSum {
            terms: map
                .into_iter()
                .filter(|(_, c)| c.abs() > MERGE_TOLERANCE)
                .map(|(string, coefficient)| PauliTerm { coefficient, string })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter()
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.string.is_identity())
            .map_or(0.0, |t| t.coefficient)
    }

    /// Drops the identity component, which only contributes a global phase.
    pub fn without_identity(&self) -> Self {
        PauliSum {
            terms: self.terms.iter().filter(|t| !t.string.is_identity()).cloned().collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| (t.coefficient * factor, t.string.clone())))
    }

    pub fn add(&self, other: &PauliSum) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|t| (t.coefficient, t.string.clone())),
        )
    }

    pub fn min_qubits(&self) -> usize {
        self.terms.iter().map(|t| t.string.min_qubits()).max().unwrap_or(0)
    }
}

/// Complex-weighted Pauli sum, used while assembling operators from
/// outer products before they are checked to be Hermitian.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplexPauliSum {
    terms: BTreeMap<PauliString, C64>,
}

impl ComplexPauliSum {
    pub fn identity() -> Self {
        Self::from_terms([(C64::new(1.0, 0.0), PauliString::identity())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (C64, PauliString)>) -> Self {
        let mut map = BTreeMap::new();
        for (c, s) in terms {
            *map.entry(s).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let mut sum = ComplexPauliSum { terms: map };
        sum.prune();
        sum
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > MERGE_TOLERANCE);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, string: &PauliString) -> C64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    pub fn add_assign(&mut self, other: &ComplexPauliSum, factor: C64) {
        for (s, c) in &other.terms {
            *self.terms.entry(s.clone()).or_insert(C64::new(0.0, 0.0)) += c * factor;
        }
        self.prune();
    }

    pub fn mul(&self, other: &ComplexPauliSum) -> ComplexPauliSum {
        let mut map: BTreeMap<PauliString, C64> = BTreeMap::new();
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (phase, s) = sa.mul(sb);
                *map.entry(s).or_insert(C64::new(0.0, 0.0)) += ca * cb * phase;
            }
        }
        let mut sum = ComplexPauliSum { terms: map };
        sum.prune();
        sum
    }

    /// Converts to a real sum, failing if any imaginary part survives.
    pub fn into_real(self) -> Result<PauliSum> {
        let worst = self.terms.values().fold(0.0f64, |m, c| m.max(c.im.abs()));
        if worst > MERGE_TOLERANCE {
            return Err(Error::NotHermitian(worst));
        }
        Ok(PauliSum::from_terms(self.terms.into_iter().map(|(s, c)| (c.re, s))))
    }
}

/// Pauli form of the single-qubit outer product `|row><col|` on `qubit`.
pub fn projector_to_pauli(row: u8, col: u8, qubit: usize) -> ComplexPauliSum {
    let half = C64::new(0.5, 0.0);
    let i_half = C64::new(0.0, 0.5);
    let id = PauliString::identity();
    let z = PauliString::single(qubit, Pauli::Z);
    let x = PauliString::single(qubit, Pauli::X);
    let y = PauliString::single(qubit, Pauli::Y);
    let terms = match (row & 1, col & 1) {
        (0, 0) => vec![(half, id), (half, z)],
        (1, 1) => vec![(half, id), (-half, z)],
        (0, 1) => vec![(half, x), (i_half, y)],
        _ => vec![(half, x), (-i_half, y)],
    };
    ComplexPauliSum::from_terms(terms)
}

/// `|row><col|` between oscillator levels in binary encoding on `register`.
pub fn level_outer_product(row: usize, col: usize, register: Range<usize>) -> ComplexPauliSum {
    register.enumerate().fold(ComplexPauliSum::identity(), |acc, (k, q)| {
        acc.mul(&projector_to_pauli(((row >> k) & 1) as u8, ((col >> k) & 1) as u8, q))
    })
}

fn check_register(register: &Range<usize>) -> Result<usize> {
    if register.is_empty() {
        return Err(Error::EmptyRegister);
    }
    Ok(register.len())
}

/// `a† + a` of the oscillator truncated to `2^n_x` levels.
pub fn position_like_operator(n_x: usize, register: Range<usize>) -> Result<PauliSum> {
    let width = check_register(&register)?;
    assert_eq!(width, n_x, "register length must equal n_x");
    let levels = 1usize << n_x;
    let mut sum = ComplexPauliSum::default();
    for n in 0..levels - 1 {
        let amp = C64::new(((n + 1) as f64).sqrt(), 0.0);
        sum.add_assign(&level_outer_product(n + 1, n, register.clone()), amp);
        sum.add_assign(&level_outer_product(n, n + 1, register.clone()), amp);
    }
    sum.into_real()
}

/// Terms of [`position_like_operator`] in construction order: transitions
/// `n -> n+1` are visited from the ground state up, and each string is
/// listed where it first appears. Within one transition strings are ordered
/// with the lowest register qubit most significant, `I < X < Y < Z`.
///
/// Trotter circuits exponentiate these terms one by one; walking the ladder
/// keeps strings of neighbouring transitions adjacent, which measurably
/// reduces the splitting error compared with plain lexicographic order.
pub fn position_like_terms(n_x: usize, register: Range<usize>) -> Result<Vec<PauliTerm>> {
    let sum = position_like_operator(n_x, register.clone())?;
    let key = |s: &PauliString| -> Vec<u8> {
        register
            .clone()
            .map(|q| match s.get(q) {
                None => 0,
                Some(Pauli::X) => 1,
                Some(Pauli::Y) => 2,
                Some(Pauli::Z) => 3,
            })
            .collect()
    };
    let mut ordered: Vec<PauliTerm> = Vec::with_capacity(sum.len());
    for n in 0..(1usize << n_x) - 1 {
        let mut pair = level_outer_product(n + 1, n, register.clone());
        pair.add_assign(&level_outer_product(n, n + 1, register.clone()), C64::new(1.0, 0.0));
        let mut strings: Vec<&PauliString> = pair.iter().map(|(s, _)| s).collect();
        strings.sort_by_key(|s| key(s));
        for s in strings {
            if ordered.iter().any(|t| &t.string == s) {
                continue;
            }
            if let Some(t) = sum.iter().find(|t| &t.string == s) {
                ordered.push(t.clone());
            }
        }
    }
    debug_assert_eq!(ordered.len(), sum.len());
    Ok(ordered)
}

/// `diag(0, 1, ..., 2^n_x - 1)` as `sum_k 2^k (I - Z_k) / 2`, identity kept.
pub fn number_operator(n_x: usize, register: Range<usize>) -> Result<PauliSum> {
    let width = check_register(&register)?;
    assert_eq!(width, n_x, "register length must equal n_x");
    let offset = ((1usize << n_x) - 1) as f64 / 2.0;
    let mut terms = vec![(offset, PauliString::identity())];
    for (k, q) in register.enumerate() {
        terms.push((-((1usize << k) as f64) / 2.0, PauliString::single(q, Pauli::Z)));
    }
    Ok(PauliSum::from_terms(terms))
}

fn dense_from_terms<'a>(terms: impl Iterator<Item = (C64, &'a PauliString)>, n_qubits: usize) -> Result<DMatrix<C64>> {
    if n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            what: "dense Pauli matrix",
            requested: n_qubits,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (c, s) in terms {
        if s.min_qubits() > n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: s.min_qubits() - 1,
                n_qubits,
            });
        }
        for b in 0..dim {
            let (row, phase) = s.apply_to_basis(b);
            m[(row, b)] += c * phase;
        }
    }
    Ok(m)
}

/// Dense `2^n x 2^n` matrix of a real Pauli sum.
pub fn pauli_sum_matrix(sum: &PauliSum, n_qubits: usize) -> Result<DMatrix<C64>> {
    dense_from_terms(sum.iter().map(|t| (C64::new(t.coefficient, 0.0), &t.string)), n_qubits)
}

pub fn complex_pauli_sum_matrix(sum: &ComplexPauliSum, n_qubits: usize) -> Result<DMatrix<C64>> {
    dense_from_terms(sum.iter().map(|(s, c)| (*c, s)), n_qubits)
}
