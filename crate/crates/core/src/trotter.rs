//! First-order Trotter circuits: initialization, then repeated
//! electronic, phonon and coupling sub-steps.

use crate::circuit::{pauli_exponential, xy_block, Circuit};
use crate::error::{Error, Result};
use crate::hamiltonian::coupling_terms;
use crate::model::{validate, ModelParams};

/// Total evolution time (units of `1/omega`) split into equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterPlan {
    total_time: f64,
    steps: usize,
    delta: f64,
}

impl TrotterPlan {
    pub fn new(total_time: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !total_time.is_finite() || total_time < 0.0 {
            return Err(Error::InvalidPlan);
        }
        Ok(TrotterPlan {
            total_time,
            steps,
            delta: total_time / steps as f64,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Time points `j * delta` for `j = 1..=steps`.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.steps).map(|j| j as f64 * self.delta).collect()
    }
}

/// Conversion factor from `1/omega` to the hopping time unit `hbar / 2V`.
pub fn hopping_time_unit(params: &ModelParams) -> f64 {
    1.0 / (2.0 * params.max_hopping())
}

pub fn initial_state_circuit(params: &ModelParams, excited_site: usize) -> Result<Circuit> {
    params.check_site(excited_site)?;
    let mut c = Circuit::new(params.n_qubits());
    c.x(params.layout().site_qubit(excited_site));
    Ok(c)
}

/// Site-energy rotations, then one XY block per hopping pair.
pub fn electronic_step(params: &ModelParams, delta: f64) -> Circuit {
    let layout = params.layout();
    let mut c = Circuit::new(params.n_qubits());
    for (i, &eps) in params.site_energies.iter().enumerate() {
        if eps != 0.0 {
            // exp(-i eps delta (I - Z)/2) = RZ(-eps delta) up to phase.
            c.rz(layout.site_qubit(i), -eps * delta);
        }
    }
    for (i, j, v) in params.hopping_pairs() {
        let block = xy_block(c.n_qubits(), layout.site_qubit(i), layout.site_qubit(j), v * delta)
            .expect("site qubits are distinct and in range");
        c.append(&block).expect("same width");
    }
    c
}

/// `exp(-i omega delta n)` per register: one RZ per qubit, no CNOTs.
pub fn phonon_step(params: &ModelParams, delta: f64) -> Circuit {
    let layout = params.layout();
    let mut c = Circuit::new(params.n_qubits());
    for i in 0..params.n_sites {
        for l in 0..params.modes_per_site {
            let omega = params.frequencies[i][l];
            for (k, q) in layout.mode_register(i, l).enumerate() {
                // 2^k (I - Z)/2 contributes RZ(-omega delta 2^k).
                c.rz(q, -omega * delta * (1u64 << k) as f64);
            }
        }
    }
    c
}

/// One staircase per Pauli term of every site/mode coupling.
pub fn coupling_step(params: &ModelParams, delta: f64) -> Result<Circuit> {
    let mut c = Circuit::new(params.n_qubits());
    for i in 0..params.n_sites {
        for l in 0..params.modes_per_site {
            if params.couplings[i][l] == 0.0 {
                continue;
            }
            for (coef, string) in coupling_terms(params, i, l)? {
                c.append(&pauli_exponential(c.n_qubits(), &string, coef * delta)?)?;
            }
        }
    }
    Ok(c)
}

pub fn trotter_step(params: &ModelParams, delta: f64) -> Result<Circuit> {
    let mut c = electronic_step(params, delta);
    c.append(&phonon_step(params, delta))?;
    c.append(&coupling_step(params, delta)?)?;
    Ok(c)
}

/// Initialization followed by `steps` Trotter steps of size `delta`.
/// `steps = 0` yields the initialization alone.
pub fn evolution_circuit_steps(params: &ModelParams, delta: f64, steps: usize, excited_site: usize) -> Result<Circuit> {
    validate(params).map_err(Error::Model)?;
    let mut c = initial_state_circuit(params, excited_site)?;
    if steps > 0 {
        let step = trotter_step(params, delta)?;
        for _ in 0..steps {
            c.append(&step)?;
        }
    }
    Ok(c)
}

pub fn evolution_circuit(params: &ModelParams, plan: &TrotterPlan, excited_site: usize) -> Result<Circuit> {
    evolution_circuit_steps(params, plan.delta(), plan.steps(), excited_site)
}
