//! Incremental approximate recompilation of a circuit's output state.
//!
//! An inverse ansatz `A` is grown layer by layer so that `A U|0...0>` is as
//! close as possible to `|0...0>`; the compressed circuit is `A†`. Each
//! layer is a CNOT dressed with `RZ RY RZ` on both of its qubits, and a
//! trailing `RZ RY` on every qubit closes the ansatz. Angles are tuned one
//! at a time by a three-point sinusoid fit.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::simulator::{apply_gate, run, StateVector};
use crate::C64;

/// `|<0...0| V† U |0...0>|^2`.
pub fn overlap(u: &Circuit, v: &Circuit) -> Result<f64> {
    if u.n_qubits() != v.n_qubits() {
        return Err(Error::WidthMismatch {
            left: u.n_qubits(),
            right: v.n_qubits(),
        });
    }
    let mut state = run(u)?;
    state.apply(&v.inverse())?;
    Ok(state.amplitudes()[0].norm_sqr())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecompileConfig {
    pub overlap_threshold: f64,
    pub max_layers: usize,
    /// Undirected qubit pairs allowed to host a CNOT; `None` allows all.
    pub coupling_map: Option<Vec<(usize, usize)>>,
    pub seed: u64,
    pub max_evaluations: usize,
}

impl Default for RecompileConfig {
    fn default() -> Self {
        RecompileConfig {
            overlap_threshold: 0.99,
            max_layers: 40,
            coupling_map: None,
            seed: 0,
            max_evaluations: 2_000_000,
        }
    }
}

impl RecompileConfig {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRecompileConfig(m));
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return bad(format!("overlap threshold {} outside (0, 1]", self.overlap_threshold));
        }
        if let Some(map) = &self.coupling_map {
            for &(a, b) in map {
                if a >= n_qubits || b >= n_qubits {
                    return bad(format!("coupling pair ({a}, {b}) outside {n_qubits} qubits"));
                }
                if a == b {
                    return bad(format!("coupling pair ({a}, {b}) repeats a qubit"));
                }
            }
        }
        Ok(())
    }

    fn allowed_pairs(&self, n_qubits: usize) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = match &self.coupling_map {
            Some(map) => map.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect(),
            None => (0..n_qubits)
                .flat_map(|a| ((a + 1)..n_qubits).map(move |b| (a, b)))
                .collect(),
        };
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecompileReport {
    pub circuit: Circuit,
    pub achieved_overlap: f64,
    /// Cost evaluations spent (`n_e`).
    pub evaluations: usize,
    pub cnot_count: usize,
    pub single_qubit_count: usize,
    pub layers: usize,
    /// Whether the threshold was met.
    pub converged: bool,
}

/// Result of one closed-form angle update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleUpdate {
    pub angle: f64,
    /// Set when the cost does not depend on the angle; `angle` is unchanged.
    pub stationary: bool,
}

/// Exact minimizer of a cost of the form `a + r cos(theta - phi)`, fitted
/// from its values at `theta` and `theta +- pi/2`. Calls `cost_at` three times.
pub fn optimize_angle(theta: f64, mut cost_at: impl FnMut(f64) -> f64) -> AngleUpdate {
    let f0 = cost_at(theta);
    let fp = cost_at(theta + FRAC_PI_2);
    let fm = cost_at(theta - FRAC_PI_2);
    let mean = 0.5 * (fp + fm);
    let (c, s) = (f0 - mean, 0.5 * (fm - fp));
    if c.hypot(s) < 1e-12 {
        return AngleUpdate {
            angle: theta,
            stationary: true,
        };
    }
    // Maximum of the cosine sits at theta - atan2(s, c); the minimum is opposite.
    AngleUpdate {
        angle: wrap(theta - s.atan2(c) + PI),
        stationary: false,
    }
}

/// Wraps into `(-pi, pi]`.
fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Element {
    Rot { axis: Axis, qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Element {
    fn gate(&self) -> Gate {
        match *self {
            Element::Rot {
                axis: Axis::Y,
                qubit,
                angle,
            } => Gate::Ry { qubit, angle },
            Element::Rot {
                axis: Axis::Z,
                qubit,
                angle,
            } => Gate::Rz { qubit, angle },
            Element::Cnot { control, target } => Gate::Cnot { control, target },
        }
    }

    fn with_angle(&self, angle: f64) -> Gate {
        match *self {
            Element::Rot {
                axis: Axis::Y, qubit, ..
            } => Gate::Ry { qubit, angle },
            Element::Rot {
                axis: Axis::Z, qubit, ..
            } => Gate::Rz { qubit, angle },
            Element::Cnot { .. } => self.gate(),
        }
    }
}

fn dressed_layer(a: usize, b: usize, angles: [f64; 6]) -> Vec<Element> {
    let rot = |axis, qubit, angle| Element::Rot { axis, qubit, angle };
    vec![
        rot(Axis::Z, a, angles[0]),
        rot(Axis::Y, a, angles[1]),
        rot(Axis::Z, a, angles[2]),
        rot(Axis::Z, b, angles[3]),
        rot(Axis::Y, b, angles[4]),
        rot(Axis::Z, b, angles[5]),
        Element::Cnot { control: a, target: b },
    ]
}

fn closing_layer(n_qubits: usize) -> Vec<Element> {
    (0..n_qubits)
        .flat_map(|q| {
            [
                Element::Rot {
                    axis: Axis::Z,
                    qubit: q,
                    angle: 0.0,
                },
                Element::Rot {
                    axis: Axis::Y,
                    qubit: q,
                    angle: 0.0,
                },
            ]
        })
        .collect()
}

const SWEEP_TOLERANCE: f64 = 1e-6;
const MAX_SWEEPS: usize = 200;
const MIN_LAYER_GAIN: f64 = 1e-5;
const MAX_PAIR_MOVES: usize = 24;
const STALL_PATIENCE: usize = 4;

/// Working state of one run: target state, ansatz layers and budget.
struct Search {
    target: StateVector,
    layers: Vec<Vec<Element>>,
    closing: Vec<Element>,
    evaluations: usize,
    max_evaluations: usize,
}

impl Search {
    fn elements(&self) -> impl Iterator<Item = &Element> {
        self.layers.iter().flatten().chain(self.closing.iter())
    }

    fn cost(&mut self) -> f64 {
        self.evaluations += 1;
        let mut state = self.target.amplitudes().to_vec();
        for e in self.elements() {
            apply_gate(&mut state, &e.gate());
        }
        1.0 - state[0].norm_sqr()
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.max_evaluations
    }

    /// One left-to-right pass of single-angle updates. Returns the cost
    /// after the pass.
    fn sweep(&mut self) -> f64 {
        let gates: Vec<Element> = self.elements().copied().collect();
        let dim = self.target.amplitudes().len();

        // backward[g] = (G_{g+1} ... G_K)† |0>, built from the end.
        let mut backward = vec![Vec::new(); gates.len()];
        let mut beta = vec![C64::new(0.0, 0.0); dim];
        beta[0] = C64::new(1.0, 0.0);
        for (g, e) in gates.iter().enumerate().rev() {
            backward[g] = beta.clone();
            apply_gate(&mut beta, &e.gate().inverse());
        }

        let mut phi = self.target.amplitudes().to_vec();
        let mut updated = gates.clone();
        let mut scratch = vec![C64::new(0.0, 0.0); dim];
        let mut last_cost = None;
        for (g, e) in gates.iter().enumerate() {
            if let Element::Rot { angle, .. } = *e {
                if !self.exhausted() {
                    let beta = &backward[g];
                    let mut evals = 0;
                    let mut cost_at = |theta: f64| {
                        evals += 1;
                        scratch.copy_from_slice(&phi);
                        apply_gate(&mut scratch, &e.with_angle(theta));
                        let amp: C64 = beta.iter().zip(&scratch).map(|(b, s)| b.conj() * s).sum();
                        1.0 - amp.norm_sqr()
                    };
                    let step = optimize_angle(angle, &mut cost_at);
                    let new_angle = step.angle;
                    last_cost = Some(cost_at(new_angle));
                    self.evaluations += evals;
                    if let Element::Rot { angle, .. } = &mut updated[g] {
                        *angle = new_angle;
                    }
                }
            }
            apply_gate(&mut phi, &updated[g].gate());
        }

        let mut it = updated.into_iter();
        for layer in &mut self.layers {
            for slot in layer.iter_mut() {
                *slot = it.next().expect("same length");
            }
        }
        for slot in &mut self.closing {
            *slot = it.next().expect("same length");
        }
        last_cost.map_or_else(|| self.cost(), |c| c.max(0.0))
    }

    /// Sweeps until the improvement stalls; returns the final cost.
    fn optimize(&mut self, mut cost: f64) -> f64 {
        for _ in 0..MAX_SWEEPS {
            if self.exhausted() {
                break;
            }
            let next = self.sweep();
            let gain = cost - next;
            cost = next;
            if gain < SWEEP_TOLERANCE {
                break;
            }
        }
        cost
    }

    /// Points every qubit's reduced Bloch vector back to `|0>` by resetting
    /// the closing rotations. Starting there avoids the saddle at zero angles,
    /// where a Y rotation is stationary for a vector in the y-z plane.
    fn align_closing(&mut self) {
        let mut state = self.target.amplitudes().to_vec();
        for e in self.layers.iter().flatten() {
            apply_gate(&mut state, &e.gate());
        }
        for slot in self.closing.chunks_exact_mut(2) {
            let Element::Rot { qubit, .. } = slot[0] else {
                unreachable!()
            };
            let rho = reduced_density(&state, &[qubit]);
            // rho = (I + x X + y Y + z Z) / 2
            let (x, y, z) = (2.0 * rho[2].re, 2.0 * rho[2].im, (rho[0] - rho[3]).re);
            let azimuth = if x.hypot(y) > 1e-12 { y.atan2(x) } else { 0.0 };
            let polar = x.hypot(y).atan2(z);
            slot[0] = Element::Rot {
                axis: Axis::Z,
                qubit,
                angle: -azimuth,
            };
            slot[1] = Element::Rot {
                axis: Axis::Y,
                qubit,
                angle: -polar,
            };
        }
    }

    /// Pairs ranked by how strongly they are entangled with the rest.
    fn ranked_pairs(&self, pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let mut state = self.target.amplitudes().to_vec();
        for e in self.elements() {
            apply_gate(&mut state, &e.gate());
        }
        let mut scored: Vec<((usize, usize), f64)> = pairs
            .iter()
            .map(|&(a, b)| {
                let sa = linear_entropy(&reduced_density(&state, &[a]));
                let sb = linear_entropy(&reduced_density(&state, &[b]));
                let sab = linear_entropy(&reduced_density(&state, &[a, b]));
                // Impurities of each qubit plus their linear mutual information.
                ((a, b), sa + sb + (sa + sb - sab))
            })
            .collect();
        scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        scored.into_iter().map(|(p, _)| p).collect()
    }
}

/// Reduced density matrix of `qubits` (row-major, `2^k x 2^k`).
fn reduced_density(state: &[C64], qubits: &[usize]) -> Vec<C64> {
    let k = qubits.len();
    let d = 1usize << k;
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let local = |b: usize| {
        qubits
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &q)| acc | (((b >> q) & 1) << j))
    };
    let mut rho = vec![C64::new(0.0, 0.0); d * d];
    for (b, amp) in state.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let rest = b & !mask;
        let r = local(b);
        for c in 0..d {
            // Basis index with the same environment bits and local value c.
            let other = qubits
                .iter()
                .enumerate()
                .fold(rest, |acc, (j, &q)| acc | (((c >> j) & 1) << q));
            rho[r * d + c] += amp * state[other].conj();
        }
    }
    rho
}

fn linear_entropy(rho: &[C64]) -> f64 {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    1.0 - rho.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Grows the inverse ansatz until the overlap threshold, the layer budget or
/// the evaluation budget is reached, then prunes and re-measures.
pub fn recompile(u: &Circuit, config: &RecompileConfig) -> Result<RecompileReport> {
    let n = u.n_qubits();
    config.validate(n)?;
    let target = run(u)?;
    let mut search = Search {
        target,
        layers: Vec::new(),
        closing: closing_layer(n),
        evaluations: 0,
        max_evaluations: config.max_evaluations.max(1),
    };
    let threshold_cost = 1.0 - config.overlap_threshold;
    let layer_cap = config.max_layers.min(u.gate_counts().cnot);
    let pairs = config.allowed_pairs(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut cost = search.cost();
    if cost > threshold_cost {
        search.align_closing();
        let aligned = search.cost();
        cost = search.optimize(aligned);
    }

    let mut best = (cost, search.layers.clone(), search.closing.clone());
    let mut stalls = 0;
    while cost > threshold_cost && search.layers.len() < layer_cap && !search.exhausted() && !pairs.is_empty() {
        let ranked = search.ranked_pairs(&pairs);
        let mut candidates: Vec<Vec<Vec<Element>>> = Vec::new();
        // Identity-dressed layers first, then random dressings to escape
        // stationary points, then two-layer moves for gains that need routing.
        candidates.extend(ranked.iter().map(|&(a, b)| vec![dressed_layer(a, b, [0.0; 6])]));
        for &(a, b) in &ranked {
            let angles: [f64; 6] = std::array::from_fn(|_| rng.random_range(-PI..PI));
            candidates.push(vec![dressed_layer(a, b, angles)]);
        }
        if search.layers.len() + 2 <= layer_cap {
            let mut combos = 0;
            'outer: for &(a, b) in &ranked {
                for &(c, d) in &ranked {
                    if (a, b) == (c, d) || ![c, d].iter().any(|q| *q == a || *q == b) {
                        continue;
                    }
                    candidates.push(vec![dressed_layer(a, b, [0.0; 6]), dressed_layer(c, d, [0.0; 6])]);
                    combos += 1;
                    if combos == MAX_PAIR_MOVES {
                        break 'outer;
                    }
                }
            }
        }

        let snapshot = (search.layers.clone(), search.closing.clone());
        let mut accepted = None;
        let mut fallback: Option<(f64, Vec<Vec<Element>>, Vec<Element>)> = None;
        for layers in candidates {
            if search.exhausted() {
                break;
            }
            search.layers.extend(layers);
            search.align_closing();
            let start = search.cost();
            let trial = search.optimize(start);
            if best.0 - trial >= MIN_LAYER_GAIN {
                accepted = Some(trial);
                break;
            }
            if fallback.as_ref().is_none_or(|f| trial < f.0) {
                fallback = Some((trial, search.layers.clone(), search.closing.clone()));
            }
            (search.layers, search.closing) = snapshot.clone();
        }

        match (accepted, fallback) {
            (Some(c), _) => {
                cost = c;
                best = (cost, search.layers.clone(), search.closing.clone());
                stalls = 0;
            }
            // No single move pays off; keep the least bad one for a few rounds
            // in case the gain needs several layers (e.g. routing on a chain).
            (None, Some((c, layers, closing))) if stalls < STALL_PATIENCE => {
                cost = c;
                search.layers = layers;
                search.closing = closing;
                stalls += 1;
            }
            _ => break,
        }
    }
    (_, search.layers, search.closing) = best;

    let ansatz: Vec<Gate> = search.elements().map(Element::gate).collect();
    let mut v = Circuit::from_gates(n, ansatz)?.inverse();
    v = prune(&v);
    let achieved_overlap = overlap(u, &v)?;
    let counts = v.gate_counts();
    Ok(RecompileReport {
        achieved_overlap,
        evaluations: search.evaluations,
        cnot_count: counts.cnot,
        single_qubit_count: counts.single_qubit,
        layers: search.layers.len(),
        converged: achieved_overlap >= config.overlap_threshold,
        circuit: v,
    })
}

const PRUNE_ANGLE: f64 = 1e-7;

/// Removes gates that do not change the prepared state (up to phase):
/// negligible rotations, back-to-back CNOT pairs, Z rotations and CNOTs
/// acting first on qubits still in `|0>`.
pub fn prune(circuit: &Circuit) -> Circuit {
    let n = circuit.n_qubits();
    let mut gates: Vec<Gate> = circuit
        .gates()
        .iter()
        .filter_map(|g| match g.angle() {
            Some(a) if wrap(a).abs() < PRUNE_ANGLE => None,
            _ => Some(*g),
        })
        .collect();

    loop {
        let before = gates.len();

        // Leading gates that act trivially on |0>.
        let mut touched = vec![false; n];
        let mut keep = Vec::with_capacity(gates.len());
        for g in gates.drain(..) {
            let drop = match g {
                Gate::Rz { qubit, .. } => !touched[qubit],
                Gate::Cnot { control, .. } => !touched[control],
                _ => false,
            };
            if !drop {
                let (a, b) = g.qubits();
                touched[a] = true;
                if let Some(b) = b {
                    touched[b] = true;
                }
                keep.push(g);
            }
        }
        gates = keep;

        // CNOT pairs separated only by gates on other qubits.
        let mut k = 0;
        while k < gates.len() {
            if let Gate::Cnot { control, target } = gates[k] {
                let partner = gates[k + 1..]
                    .iter()
                    .position(|g| {
                        let (a, b) = g.qubits();
                        [control, target].contains(&a) || b.is_some_and(|b| [control, target].contains(&b))
                    })
                    .map(|p| p + k + 1);
                if let Some(p) = partner {
                    if gates[p] == (Gate::Cnot { control, target }) {
                        gates.remove(p);
                        gates.remove(k);
                        continue;
                    }
                }
            }
            k += 1;
        }

        if gates.len() == before {
            break;
        }
    }
    Circuit::from_gates(n, gates).expect("pruning keeps gates valid")
}
