//! Executes a scenario and writes its CSV files.

use std::path::{Path, PathBuf};

use ephq_core::ed::{EdBasis, EdPropagator};
use ephq_core::recompiler::{recompile, RecompileConfig, RecompileReport};
use ephq_core::simulator::{
    exact_population_curve_with_cap, mode_occupations, noisy_populations, sampled_populations, site_populations,
    NoiseParams, SimConfig, StateVector,
};
use ephq_core::trotter::{evolution_circuit_steps, initial_state_circuit, trotter_step, TrotterPlan};
use rayon::prelude::*;
use thiserror::Error;

use crate::scenario::{ConfigError, Engine, Observable, Scenario};
use crate::table::Table;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Replaces the scenario's `seed`; the model seed is left alone.
    pub seed: Option<u64>,
    pub jobs: usize,
    pub allow_large: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid scenario")]
    Config(Vec<ConfigError>),
    #[error(transparent)]
    Core(#[from] ephq_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl RunError {
    /// Flat list for the machine-readable error report.
    pub fn entries(&self) -> Vec<ConfigError> {
        match self {
            RunError::Config(list) => list.clone(),
            other => vec![ConfigError {
                field: "run".into(),
                message: other.to_string(),
            }],
        }
    }
}

/// Seed of an independent random stream derived from a base seed.
fn stream_seed(base: u64, stream: u64) -> u64 {
    base.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn noise_seed(base: u64, step: usize) -> u64 {
    stream_seed(base, 2 * step as u64)
}

fn shot_seed(base: u64, step: usize) -> u64 {
    stream_seed(base, 2 * step as u64 + 1)
}

struct Context<'a> {
    scenario: &'a Scenario,
    seed: u64,
    cap: usize,
    out_dir: &'a Path,
}

impl Context<'_> {
    fn plan(&self, steps: usize) -> Result<TrotterPlan, RunError> {
        Ok(TrotterPlan::new(self.scenario.total_time, steps)?)
    }

    fn population_table(&self, times: &[f64], rows: Vec<Vec<f64>>) -> Table {
        let s = self.scenario;
        let mut t =
            Table::new(std::iter::once("time".to_string()).chain((0..s.model.n_sites).map(|i| format!("site_{i}"))));
        for (time, pops) in times.iter().zip(rows) {
            let mut row = vec![s.output_time(*time)];
            row.extend(pops);
            t.push(row);
        }
        t
    }

    fn write(&self, name: &str, table: &Table) -> Result<PathBuf, RunError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, table.to_csv()).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    fn noise(&self, step: usize) -> NoiseParams {
        let n = &self.scenario.noise;
        NoiseParams {
            p1: n.p1,
            p2: n.p2,
            trajectories: n.trajectories,
            seed: noise_seed(self.seed, step),
        }
    }

    fn shots(&self, step: usize) -> Result<SimConfig, RunError> {
        Ok(SimConfig::new(self.scenario.shots, shot_seed(self.seed, step))?)
    }

    fn circuit_curve(&self, engine: Engine, steps: usize) -> Result<Vec<PathBuf>, RunError> {
        let s = self.scenario;
        let plan = self.plan(steps)?;
        let p = &s.model;
        let layout = p.layout();
        let mut written = Vec::new();
        let rows = match engine {
            Engine::Exact => exact_population_curve_with_cap(p, plan.delta(), steps, s.excited_site, self.cap)?,
            Engine::Sampled => {
                let mut state = StateVector::zero_with_cap(p.n_qubits(), self.cap)?;
                state.apply(&initial_state_circuit(p, s.excited_site)?)?;
                let step = trotter_step(p, plan.delta())?;
                let mut rows = Vec::with_capacity(steps);
                for j in 1..=steps {
                    state.apply(&step)?;
                    rows.push(sampled_populations(&state, &layout, &self.shots(j)?)?);
                }
                rows
            }
            Engine::Noisy => (1..=steps)
                .into_par_iter()
                .map(|j| {
                    let c = evolution_circuit_steps(p, plan.delta(), j, s.excited_site)?;
                    Ok(noisy_populations(&c, &layout, &self.noise(j), &self.shots(j)?)?)
                })
                .collect::<Result<Vec<_>, RunError>>()?,
            Engine::RecompiledNoisy => {
                let results = (1..=steps)
                    .into_par_iter()
                    .map(|j| {
                        let c = evolution_circuit_steps(p, plan.delta(), j, s.excited_site)?;
                        let report = recompile(&c, &self.recompile_config(j))?;
                        let pops = noisy_populations(&report.circuit, &layout, &self.noise(j), &self.shots(j)?)?;
                        Ok((pops, report))
                    })
                    .collect::<Result<Vec<(Vec<f64>, RecompileReport)>, RunError>>()?;
                if s.has(Observable::RecompileReport) {
                    written.extend(self.write_reports(steps, &plan, &results)?);
                }
                results.into_iter().map(|(pops, _)| pops).collect()
            }
            Engine::Ed => unreachable!("ed runs once per scenario"),
        };
        if s.has(Observable::Populations) {
            let name = format!("{}_eta{steps}_populations.csv", engine.slug());
            written.push(self.write(&name, &self.population_table(&plan.times(), rows))?);
        }
        if engine == Engine::Exact && s.has(Observable::Occupations) {
            let occ = mode_occupations(p, &plan, s.excited_site, s.occupation_site, s.occupation_mode)?;
            let name = format!("exact_eta{steps}_occupations.csv");
            written.push(self.write(&name, &occupation_table(&occ))?);
        }
        Ok(written)
    }

    fn recompile_config(&self, step: usize) -> RecompileConfig {
        let r = &self.scenario.recompile;
        RecompileConfig {
            overlap_threshold: r.overlap_threshold,
            max_layers: r.max_layers,
            coupling_map: r.coupling_map.as_ref().map(|m| m.pairs(self.scenario.model.n_qubits())),
            seed: stream_seed(self.seed, step as u64),
            max_evaluations: r.max_evaluations,
        }
    }

    fn write_reports(
        &self,
        steps: usize,
        plan: &TrotterPlan,
        results: &[(Vec<f64>, RecompileReport)],
    ) -> Result<Vec<PathBuf>, RunError> {
        let mut table = Table::new([
            "step",
            "time",
            "overlap",
            "cnot",
            "single_qubit",
            "evaluations",
            "layers",
            "converged",
        ]);
        let dir = self.out_dir.join(format!("recompiled_noisy_eta{steps}_circuits"));
        std::fs::create_dir_all(&dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut written = Vec::new();
        for (k, ((_, r), t)) in results.iter().zip(plan.times()).enumerate() {
            let j = k + 1;
            table.push(vec![
                j as f64,
                self.scenario.output_time(t),
                r.achieved_overlap,
                r.cnot_count as f64,
                r.single_qubit_count as f64,
                r.evaluations as f64,
                r.layers as f64,
                f64::from(u8::from(r.converged)),
            ]);
            let path = dir.join(format!("step_{j:03}.txt"));
            std::fs::write(&path, r.circuit.to_text()).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        written.push(self.write(&format!("recompiled_noisy_eta{steps}_report.csv"), &table)?);
        Ok(written)
    }

    fn ed(&self) -> Result<Vec<PathBuf>, RunError> {
        let s = self.scenario;
        let prop = EdPropagator::new(&s.model, EdBasis::new(&s.model, s.fock_cutoff)?, s.excited_site)?;
        let mut written = Vec::new();
        if s.has(Observable::Populations) {
            // Union of every sweep point's grid, so each circuit curve has
            // its times present.
            let mut times: Vec<f64> = Vec::new();
            for &steps in &s.steps {
                times.extend(self.plan(steps)?.times());
            }
            times.sort_by(f64::total_cmp);
            times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
            let rows: Vec<Vec<f64>> = times.par_iter().map(|&t| prop.populations(t)).collect();
            written.push(self.write("ed_populations.csv", &self.population_table(&times, rows))?);
        }
        if s.has(Observable::Occupations) {
            // Averaged over the finest grid.
            let finest = *s.steps.iter().max().expect("validated non-empty");
            let times = self.plan(finest)?.times();
            let mode = s.occupation_site * s.model.modes_per_site + s.occupation_mode;
            let per_time: Vec<Vec<f64>> = times.par_iter().map(|&t| prop.occupation(t, mode)).collect();
            let mut avg = vec![0.0; s.fock_cutoff];
            for occ in &per_time {
                for (a, o) in avg.iter_mut().zip(occ) {
                    *a += o / times.len() as f64;
                }
            }
            written.push(self.write("ed_occupations.csv", &occupation_table(&avg))?);
        }
        Ok(written)
    }

    fn gate_counts(&self) -> Result<PathBuf, RunError> {
        let s = self.scenario;
        let mut table = Table::new([
            "steps",
            "cnot_per_step",
            "single_qubit_per_step",
            "cnot_total",
            "single_qubit_total",
        ]);
        for &steps in &s.steps {
            let plan = self.plan(steps)?;
            let step = trotter_step(&s.model, plan.delta())?.gate_counts();
            let total = evolution_circuit_steps(&s.model, plan.delta(), steps, s.excited_site)?.gate_counts();
            table.push(vec![
                steps as f64,
                step.cnot as f64,
                step.single_qubit as f64,
                total.cnot as f64,
                total.single_qubit as f64,
            ]);
        }
        self.write("gate_counts.csv", &table)
    }
}

fn occupation_table(occ: &[f64]) -> Table {
    let mut t = Table::new(["level", "occupation"]);
    for (level, &o) in occ.iter().enumerate() {
        t.push(vec![level as f64, o]);
    }
    t
}

enum Task {
    Curve(Engine, usize),
    Ed,
    GateCounts,
}

/// Runs every sweep point of the scenario on at most `jobs` threads and
/// returns the files written, in a deterministic order.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<Vec<PathBuf>, RunError> {
    let cap = scenario.check_size(options.allow_large).map_err(RunError::Config)?;
    std::fs::create_dir_all(&options.out_dir).map_err(|source| RunError::Io {
        path: options.out_dir.clone(),
        source,
    })?;
    let ctx = Context {
        scenario,
        seed: options.seed.unwrap_or(scenario.seed),
        cap,
        out_dir: &options.out_dir,
    };

    let mut tasks = Vec::new();
    for &engine in &scenario.engines {
        if engine == Engine::Ed {
            tasks.push(Task::Ed);
        } else {
            tasks.extend(scenario.steps.iter().map(|&n| Task::Curve(engine, n)));
        }
    }
    if scenario.has(Observable::GateCounts) {
        tasks.push(Task::GateCounts);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<Result<Vec<PathBuf>, RunError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| match task {
                Task::Curve(engine, steps) => ctx.circuit_curve(*engine, *steps),
                Task::Ed => ctx.ed(),
                Task::GateCounts => ctx.gate_counts().map(|p| vec![p]),
            })
            .collect()
    });
    let mut files = Vec::new();
    for r in results {
        files.extend(r?);
    }
    Ok(files)
}

/// Noiseless populations at every step of one sweep point, for callers that
/// want numbers rather than files.
pub fn exact_curve(scenario: &Scenario, steps: usize) -> Result<Vec<Vec<f64>>, RunError> {
    let plan = TrotterPlan::new(scenario.total_time, steps)?;
    let p = &scenario.model;
    let mut state = StateVector::zero(p.n_qubits())?;
    state.apply(&initial_state_circuit(p, scenario.excited_site)?)?;
    let step = trotter_step(p, plan.delta())?;
    let layout = p.layout();
    let mut rows = Vec::with_capacity(steps);
    for _ in 0..steps {
        state.apply(&step)?;
        rows.push(site_populations(&state, &layout));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset;

    fn options(dir: &Path) -> RunOptions {
        RunOptions {
            out_dir: dir.to_path_buf(),
            seed: None,
            jobs: 2,
            allow_large: false,
        }
    }

    #[test]
    fn stream_seeds_differ() {
        assert_ne!(noise_seed(0, 1), shot_seed(0, 1));
        assert_ne!(noise_seed(0, 1), noise_seed(0, 2));
        assert_eq!(stream_seed(5, 0), 5);
    }

    #[test]
    fn sweep_writes_one_file_per_point_and_one_ed_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = preset("appendixC").unwrap();
        s.observables = vec![Observable::Populations];
        let files = run_scenario(&s, &options(dir.path())).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "exact_eta6_populations.csv",
                "exact_eta12_populations.csv",
                "exact_eta24_populations.csv",
                "exact_eta48_populations.csv",
                "ed_populations.csv"
            ]
        );
        let ed = Table::read(&dir.path().join("ed_populations.csv")).unwrap();
        // 48 grid contains 24, 12 and 6.
        assert_eq!(ed.rows.len(), 48);
    }

    #[test]
    fn exact_curve_matches_written_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = preset("fig5-upper").unwrap();
        s.steps = vec![6];
        s.engines = vec![Engine::Exact];
        s.observables = vec![Observable::Populations];
        run_scenario(&s, &options(dir.path())).unwrap();
        let t = Table::read(&dir.path().join("exact_eta6_populations.csv")).unwrap();
        let curve = exact_curve(&s, 6).unwrap();
        for (row, pops) in t.rows.iter().zip(&curve) {
            assert!((row[1] - pops[0]).abs() < 1e-11);
        }
    }

    #[test]
    fn reruns_are_byte_identical() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut s = preset("fig6-left").unwrap();
        s.steps = vec![3];
        s.noise.trajectories = 16;
        s.shots = 256;
        let fa = run_scenario(&s, &options(a.path())).unwrap();
        let mut ob = options(b.path());
        ob.jobs = 1;
        let fb = run_scenario(&s, &ob).unwrap();
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }

    #[test]
    fn seed_override_changes_sampled_output() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut s = preset("fig5-upper").unwrap();
        s.steps = vec![3];
        s.engines = vec![Engine::Sampled];
        s.observables = vec![Observable::Populations];
        s.shots = 100;
        run_scenario(&s, &options(a.path())).unwrap();
        let mut ob = options(b.path());
        ob.seed = Some(99);
        run_scenario(&s, &ob).unwrap();
        let read = |d: &Path| std::fs::read(d.join("sampled_eta3_populations.csv")).unwrap();
        assert_ne!(read(a.path()), read(b.path()));
    }
}
