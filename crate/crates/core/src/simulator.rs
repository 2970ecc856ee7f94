//! Statevector engine, observables, shot sampling and a Pauli-trajectory
//! noise model.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::model::{validate, ModelParams, QubitLayout};
use crate::pauli::Pauli;
use crate::trotter::{initial_state_circuit, trotter_step, TrotterPlan};
use crate::C64;

/// Default largest register the engine will allocate (2^26 amplitudes, 1 GiB).
pub const DEFAULT_QUBIT_CAP: usize = 26;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

type Mat2 = [[C64; 2]; 2];

fn single_qubit_matrix(gate: &Gate) -> Option<Mat2> {
    let m = match *gate {
        Gate::Rx { angle, .. } => {
            let (s, c) = (angle / 2.0).sin_cos();
            let mis = C64::new(0.0, -s);
            [[C64::new(c, 0.0), mis], [mis, C64::new(c, 0.0)]]
        }
        Gate::Ry { angle, .. } => {
            let (s, c) = (angle / 2.0).sin_cos();
            [
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ]
        }
        Gate::H { .. } => {
            let h = C64::new(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        _ => return None,
    };
    Some(m)
}

fn apply_matrix(amps: &mut [C64], qubit: usize, m: &Mat2) {
    let stride = 1usize << qubit;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = m[0][0] * a + m[0][1] * b;
            *y = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_diagonal(amps: &mut [C64], qubit: usize, d0: C64, d1: C64) {
    let stride = 1usize << qubit;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        lo.iter_mut().for_each(|a| *a *= d0);
        hi.iter_mut().for_each(|a| *a *= d1);
    }
}

fn apply_flip(amps: &mut [C64], qubit: usize) {
    let stride = 1usize << qubit;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        lo.swap_with_slice(hi);
    }
}

fn apply_cnot(amps: &mut [C64], control: usize, target: usize) {
    let (cm, tm) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

/// Applies one gate in place to a little-endian amplitude vector.
pub fn apply_gate(amps: &mut [C64], gate: &Gate) {
    match *gate {
        Gate::Rz { qubit, angle } => {
            let half = angle / 2.0;
            apply_diagonal(amps, qubit, C64::new(0.0, -half).exp(), C64::new(0.0, half).exp());
        }
        Gate::X { qubit } => apply_flip(amps, qubit),
        Gate::Cnot { control, target } => apply_cnot(amps, control, target),
        Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::H { qubit } => {
            let m = single_qubit_matrix(gate).expect("dense single-qubit gate");
            apply_matrix(amps, qubit, &m);
        }
    }
}

pub fn apply_pauli(amps: &mut [C64], qubit: usize, pauli: Pauli) {
    match pauli {
        Pauli::X => apply_flip(amps, qubit),
        Pauli::Z => apply_diagonal(amps, qubit, ONE, -ONE),
        Pauli::Y => {
            apply_flip(amps, qubit);
            // After the flip, Y = [[0,-i],[i,0]] leaves phases -i on |0>, +i on |1>.
            apply_diagonal(amps, qubit, C64::new(0.0, -1.0), C64::new(0.0, 1.0));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits`, subject to the default size cap.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(n_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits > cap {
            return Err(Error::TooManyQubits {
                what: "statevector",
                requested: n_qubits,
                limit: cap,
            });
        }
        let mut amplitudes = vec![ZERO; 1usize << n_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn apply(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch {
                left: self.n_qubits,
                right: circuit.n_qubits(),
            });
        }
        for g in circuit.gates() {
            apply_gate(&mut self.amplitudes, g);
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        apply_gate(&mut self.amplitudes, gate);
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Runs `circuit` on `|0...0>` with the default qubit cap.
pub fn run(circuit: &Circuit) -> Result<StateVector> {
    run_with_cap(circuit, DEFAULT_QUBIT_CAP)
}

pub fn run_with_cap(circuit: &Circuit, cap: usize) -> Result<StateVector> {
    let mut state = StateVector::zero_with_cap(circuit.n_qubits(), cap)?;
    state.apply(circuit)?;
    Ok(state)
}

/// Probability that each site qubit reads 1.
pub fn site_populations(state: &StateVector, layout: &QubitLayout) -> Vec<f64> {
    let mut pops = vec![0.0; layout.n_sites];
    for (b, a) in state.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (i, pop) in pops.iter_mut().enumerate() {
            if (b >> layout.site_qubit(i)) & 1 == 1 {
                *pop += p;
            }
        }
    }
    pops
}

/// Distribution of the binary value held by a register.
pub fn register_distribution(state: &StateVector, register: Range<usize>) -> Vec<f64> {
    let width = register.len();
    let mask = (1usize << width) - 1;
    let mut dist = vec![0.0; 1 << width];
    for (b, a) in state.amplitudes.iter().enumerate() {
        dist[(b >> register.start) & mask] += a.norm_sqr();
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub shots: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(shots: usize, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::NoShots);
        }
        Ok(SimConfig { shots, seed })
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Draws `shots` basis states and adds each site's hit count to `counts`.
fn sample_into(cdf: &[f64], shots: usize, layout: &QubitLayout, rng: &mut ChaCha8Rng, counts: &mut [u64]) {
    let total = *cdf.last().unwrap_or(&1.0);
    for _ in 0..shots {
        let r = rng.random::<f64>() * total;
        let b = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
        for (i, n) in counts.iter_mut().enumerate() {
            if (b >> layout.site_qubit(i)) & 1 == 1 {
                *n += 1;
            }
        }
    }
}

/// Site populations estimated from `config.shots` measurements.
pub fn sampled_populations(state: &StateVector, layout: &QubitLayout, config: &SimConfig) -> Result<Vec<f64>> {
    if config.shots == 0 {
        return Err(Error::NoShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts = vec![0u64; layout.n_sites];
    sample_into(
        &cumulative(&state.probabilities()),
        config.shots,
        layout,
        &mut rng,
        &mut counts,
    );
    Ok(counts.iter().map(|&n| n as f64 / config.shots as f64).collect())
}

/// Population curve at `j * delta`, `j = 1..=steps`, built incrementally:
/// the state after `j` steps is exactly the output of the `j`-step circuit.
pub fn exact_population_curve(
    params: &ModelParams,
    delta: f64,
    steps: usize,
    excited_site: usize,
) -> Result<Vec<Vec<f64>>> {
    exact_population_curve_with_cap(params, delta, steps, excited_site, DEFAULT_QUBIT_CAP)
}

pub fn exact_population_curve_with_cap(
    params: &ModelParams,
    delta: f64,
    steps: usize,
    excited_site: usize,
    cap: usize,
) -> Result<Vec<Vec<f64>>> {
    validate(params).map_err(Error::Model)?;
    let layout = params.layout();
    let mut state = run_with_cap(&initial_state_circuit(params, excited_site)?, cap)?;
    let step = trotter_step(params, delta)?;
    let mut curve = Vec::with_capacity(steps);
    for _ in 0..steps {
        state.apply(&step)?;
        curve.push(site_populations(&state, &layout));
    }
    Ok(curve)
}

/// Level occupations of one oscillator, averaged uniformly over the plan's
/// time points `j * delta`, `j = 1..=steps`.
pub fn mode_occupations(
    params: &ModelParams,
    plan: &TrotterPlan,
    excited_site: usize,
    site: usize,
    mode: usize,
) -> Result<Vec<f64>> {
    validate(params).map_err(Error::Model)?;
    params.check_site(site)?;
    if mode >= params.modes_per_site {
        return Err(Error::QubitOutOfRange {
            qubit: mode,
            n_qubits: params.modes_per_site,
        });
    }
    let register = params.layout().mode_register(site, mode);
    let mut state = run(&initial_state_circuit(params, excited_site)?)?;
    let step = trotter_step(params, plan.delta())?;
    let mut avg = vec![0.0; params.levels()];
    for _ in 0..plan.steps() {
        state.apply(&step)?;
        for (a, p) in avg.iter_mut().zip(register_distribution(&state, register.clone())) {
            *a += p;
        }
    }
    avg.iter_mut().for_each(|a| *a /= plan.steps() as f64);
    Ok(avg)
}

/// Stochastic Pauli channel: after every gate, with probability `p1`
/// (one-qubit gates) or `p2` (CNOT) a uniformly random non-identity Pauli
/// hits the gate's qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub p1: f64,
    pub p2: f64,
    pub trajectories: usize,
    pub seed: u64,
}

impl NoiseParams {
    /// Single-qubit error rate defaults to a tenth of the two-qubit rate.
    pub fn new(p2: f64, trajectories: usize, seed: u64) -> Self {
        NoiseParams {
            p1: p2 / 10.0,
            p2,
            trajectories,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidNoise("trajectories must be positive".into()));
        }
        Ok(())
    }
}

const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

fn inject(amps: &mut [C64], gate: &Gate, noise: &NoiseParams, rng: &mut ChaCha8Rng) {
    let (a, b) = gate.qubits();
    let p = if b.is_some() { noise.p2 } else { noise.p1 };
    if p == 0.0 || rng.random::<f64>() >= p {
        return;
    }
    match b {
        None => apply_pauli(amps, a, PAULIS[rng.random_range(0..3)]),
        Some(b) => {
            // Index 1..16 over {I,X,Y,Z}^2 minus the identity.
            let k = rng.random_range(1..16usize);
            for (q, code) in [(a, k & 3), (b, k >> 2)] {
                if code > 0 {
                    apply_pauli(amps, q, PAULIS[code - 1]);
                }
            }
        }
    }
}

fn noisy_trajectory(circuit: &Circuit, noise: &NoiseParams, trajectory: u64, cap: usize) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(trajectory);
    let mut state = StateVector::zero_with_cap(circuit.n_qubits(), cap)?;
    for g in circuit.gates() {
        apply_gate(&mut state.amplitudes, g);
        inject(&mut state.amplitudes, g, noise, &mut rng);
    }
    Ok(state)
}

/// Monte Carlo site populations under the Pauli channel. Each trajectory
/// is measured `shots / trajectories` times (the first `shots % trajectories`
/// trajectories take one extra shot); all shots draw from one generator
/// seeded by `config.seed`, so zero noise reproduces [`sampled_populations`].
pub fn noisy_populations(
    circuit: &Circuit,
    layout: &QubitLayout,
    noise: &NoiseParams,
    config: &SimConfig,
) -> Result<Vec<f64>> {
    noise.validate()?;
    if config.shots == 0 {
        return Err(Error::NoShots);
    }
    let t = noise.trajectories;
    let (base, extra) = (config.shots / t, config.shots % t);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts = vec![0u64; layout.n_sites];
    // Bounded batches keep memory flat while trajectories run in parallel.
    const BATCH: usize = 64;
    for start in (0..t).step_by(BATCH) {
        let end = (start + BATCH).min(t);
        let cdfs: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|k| {
                noisy_trajectory(circuit, noise, k as u64, DEFAULT_QUBIT_CAP).map(|s| cumulative(&s.probabilities()))
            })
            .collect::<Result<_>>()?;
        for (offset, cdf) in cdfs.iter().enumerate() {
            let shots = base + usize::from(start + offset < extra);
            sample_into(cdf, shots, layout, &mut rng, &mut counts);
        }
    }
    Ok(counts.iter().map(|&n| n as f64 / config.shots as f64).collect())
}

/// Exact trajectory-averaged site populations (no shot noise).
pub fn noisy_expected_populations(circuit: &Circuit, layout: &QubitLayout, noise: &NoiseParams) -> Result<Vec<f64>> {
    noise.validate()?;
    let sums = (0..noise.trajectories)
        .into_par_iter()
        .map(|k| noisy_trajectory(circuit, noise, k as u64, DEFAULT_QUBIT_CAP).map(|s| site_populations(&s, layout)))
        .collect::<Result<Vec<_>>>()?;
    let mut avg = vec![0.0; layout.n_sites];
    for pops in &sums {
        for (a, p) in avg.iter_mut().zip(pops) {
            *a += p;
        }
    }
    avg.iter_mut().for_each(|a| *a /= noise.trajectories as f64);
    Ok(avg)
}
