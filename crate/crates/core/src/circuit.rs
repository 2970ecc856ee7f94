//! Gate-level circuits over the basis set {RX, RY, RZ, H, X, CNOT}.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, DENSE_QUBIT_LIMIT};
use crate::simulator::apply_gate;
use crate::C64;

/// A basis gate. Rotations follow `R_a(t) = exp(-i t a / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    H { qubit: usize },
    X { qubit: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// First qubit, and the second one for two-qubit gates.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => (qubit, None),
            Gate::H { qubit } | Gate::X { qubit } => (qubit, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx { qubit, angle } => Gate::Rx { qubit, angle: -angle },
            Gate::Ry { qubit, angle } => Gate::Ry { qubit, angle: -angle },
            Gate::Rz { qubit, angle } => Gate::Rz { qubit, angle: -angle },
            g => g,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::H { .. } => "H",
            Gate::X { .. } => "X",
            Gate::Cnot { .. } => "CNOT",
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
        }
        if b == Some(a) {
            return Err(Error::RepeatedQubit(a));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.qubits();
        write!(f, "{} {}", self.kind(), a)?;
        if let Some(b) = b {
            write!(f, " {b}")?;
        }
        if let Some(angle) = self.angle() {
            // `{}` on f64 prints the shortest string that parses back exactly.
            write!(f, " {angle}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub cnot: usize,
    pub single_qubit: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.cnot + self.single_qubit
    }
}

impl std::ops::Add for GateCounts {
    type Output = GateCounts;
    fn add(self, rhs: GateCounts) -> GateCounts {
        GateCounts {
            cnot: self.cnot + rhs.cnot,
            single_qubit: self.single_qubit + rhs.single_qubit,
        }
    }
}

/// Ordered gate list on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits);
        for g in gates {
            c.try_push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn try_push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends a gate, panicking on an out-of-range or repeated qubit.
    /// Meant for builders whose indices are correct by construction.
    pub fn push(&mut self, gate: Gate) -> &mut Self {
        if let Err(e) = gate.check(self.n_qubits) {
            panic!("invalid gate {gate}: {e}");
        }
        self.gates.push(gate);
        self
    }

    pub fn rx(&mut self, qubit: usize, angle: f64) -> &mut Self {
        self.push(Gate::Rx { qubit, angle })
    }

    pub fn ry(&mut self, qubit: usize, angle: f64) -> &mut Self {
        self.push(Gate::Ry { qubit, angle })
    }

    pub fn rz(&mut self, qubit: usize, angle: f64) -> &mut Self {
        self.push(Gate::Rz { qubit, angle })
    }

    pub fn h(&mut self, qubit: usize) -> &mut Self {
        self.push(Gate::H { qubit })
    }

    pub fn x(&mut self, qubit: usize) -> &mut Self {
        self.push(Gate::X { qubit })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Gate::Cnot { control, target })
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::WidthMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn gate_counts(&self) -> GateCounts {
        let cnot = self.gates.iter().filter(|g| g.is_two_qubit()).count();
        GateCounts {
            cnot,
            single_qubit: self.gates.len() - cnot,
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    /// Parses the line format written by `Display`. Blank lines and lines
    /// starting with `#` are skipped.
    fn from_str(text: &str) -> Result<Circuit> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `qubits N` header".into()))?;
        let n_qubits = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["qubits", n] => n
                .parse::<usize>()
                .map_err(|e| parse_err(hline, format!("bad qubit count `{n}`: {e}")))?,
            _ => return Err(parse_err(hline, format!("expected `qubits N`, found `{header}`"))),
        };

        let mut circuit = Circuit::new(n_qubits);
        for (line, body) in lines {
            let fields: Vec<&str> = body.split_whitespace().collect();
            let qubit = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| parse_err(line, format!("bad qubit index `{s}`: {e}")))
            };
            let angle = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(line, format!("bad angle `{s}`: {e}")))
            };
            let gate = match fields[..] {
                ["RX", q, a] => Gate::Rx {
                    qubit: qubit(q)?,
                    angle: angle(a)?,
                },
                ["RY", q, a] => Gate::Ry {
                    qubit: qubit(q)?,
                    angle: angle(a)?,
                },
                ["RZ", q, a] => Gate::Rz {
                    qubit: qubit(q)?,
                    angle: angle(a)?,
                },
                ["H", q] => Gate::H { qubit: qubit(q)? },
                ["X", q] => Gate::X { qubit: qubit(q)? },
                ["CNOT", c, t] => Gate::Cnot {
                    control: qubit(c)?,
                    target: qubit(t)?,
                },
                _ => return Err(parse_err(line, format!("unrecognised gate line `{body}`"))),
            };
            circuit.try_push(gate).map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(circuit)
    }
}

/// Largest entrywise deviation between two matrices once the global phase
/// that best aligns them has been divided out.
pub fn phase_insensitive_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let inner: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    (a * phase - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Dense unitary of the whole circuit (gates applied left to right).
pub fn circuit_unitary(c: &Circuit) -> Result<DMatrix<C64>> {
    if c.n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            what: "dense circuit unitary",
            requested: c.n_qubits,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << c.n_qubits;
    let mut data = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        let mut column = vec![C64::new(0.0, 0.0); dim];
        column[k] = C64::new(1.0, 0.0);
        for g in &c.gates {
            apply_gate(&mut column, g);
        }
        data.extend(column);
    }
    Ok(DMatrix::from_vec(dim, dim, data))
}

/// `exp(-i theta P)` by the CNOT staircase: rotate every factor into the Z
/// basis, accumulate parity onto the highest qubit, rotate, then undo.
pub fn pauli_exponential(n_qubits: usize, string: &PauliString, theta: f64) -> Result<Circuit> {
    if string.is_identity() {
        return Err(Error::IdentityExponential);
    }
    if string.min_qubits() > n_qubits {
        return Err(Error::QubitOutOfRange {
            qubit: string.min_qubits() - 1,
            n_qubits,
        });
    }
    let factors = string.factors();
    let mut c = Circuit::new(n_qubits);
    for &(q, p) in factors {
        match p {
            Pauli::X => {
                c.h(q);
            }
            Pauli::Y => {
                c.rx(q, FRAC_PI_2);
            }
            Pauli::Z => {}
        }
    }
    for w in factors.windows(2) {
        c.cnot(w[0].0, w[1].0);
    }
    c.rz(factors[factors.len() - 1].0, 2.0 * theta);
    for w in factors.windows(2).rev() {
        c.cnot(w[0].0, w[1].0);
    }
    for &(q, p) in factors {
        match p {
            Pauli::X => {
                c.h(q);
            }
            Pauli::Y => {
                c.rx(q, -FRAC_PI_2);
            }
            Pauli::Z => {}
        }
    }
    Ok(c)
}

/// `exp(-i (theta/2) (X_i X_j + Y_i Y_j))` with two CNOTs.
///
/// Conjugating by `CNOT(i,j) RX_i(pi/2)` sends `X_i X_j` to `X_i` and
/// `Y_i Y_j` to `Y_j`; those commute, so one local rotation each suffices.
pub fn xy_block(n_qubits: usize, i: usize, j: usize, theta: f64) -> Result<Circuit> {
    if i == j {
        return Err(Error::RepeatedQubit(i));
    }
    let mut c = Circuit::new(n_qubits);
    for q in [i, j] {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
        }
    }
    c.rx(i, FRAC_PI_2)
        .cnot(i, j)
        .rx(i, theta)
        .ry(j, theta)
        .cnot(i, j)
        .rx(i, -FRAC_PI_2);
    Ok(c)
}
