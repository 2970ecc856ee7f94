//! Scenario files: TOML text describing a model, a time grid and what to
//! compute on it.
//!
//! ```toml
//! name = "dimer"
//! engines = ["exact", "ed"]         # exact | sampled | noisy | ed | recompiled+noisy
//! observables = ["populations"]     # populations | occupations | gate_counts | recompile_report
//! seed = 0                          # shots, noise trajectories and recompiler
//! time_unit = "omega"               # or "hopping" (t * 2 V_max)
//!
//! [model]                           # explicit parameters ...
//! n_sites = 2
//! hopping = [[0.0, 1.0], [1.0, 0.0]]
//! frequencies = [[1.0], [1.0]]
//! couplings = [[0.3], [0.3]]
//! qubits_per_mode = 1
//! # site_energies = [0.0, 0.0]      # default zeros
//! # modes_per_site = 1              # default 1
//!
//! # ... or a random chain: n_sites, qubits_per_mode, seed and
//! # random_chain = { lo = 0.8, hi = 1.2 }
//!
//! [plan]
//! total_time = 1.5                  # in 1/omega
//! steps = [6, 12]                   # one sweep point per entry
//! excited_site = 0
//!
//! [sampling]                        # sampled, noisy, recompiled+noisy
//! shots = 8192
//! [noise]                           # noisy, recompiled+noisy
//! p2 = 0.01                         # p1 defaults to p2 / 10
//! trajectories = 200
//! [recompile]
//! overlap_threshold = 0.99
//! coupling_map = "chain"            # or [[0, 1], [1, 2]]; omitted = all pairs
//! [ed]
//! fock_cutoff = 16
//! [occupations]
//! site = 0
//! mode = 0
//! ```

use ephq_core::ed::{EdBasis, DEFAULT_FOCK_CUTOFF};
use ephq_core::model::{random_chain, validate, ModelParams};
use ephq_core::simulator::DEFAULT_QUBIT_CAP;
use serde::{Deserialize, Serialize};

/// Qubit cap applied with `--allow-large`.
pub const LARGE_QUBIT_CAP: usize = 30;

/// One violated requirement, addressed by its dotted config path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Exact,
    Sampled,
    Noisy,
    Ed,
    RecompiledNoisy,
}

impl Engine {
    pub const ALL: [Engine; 5] = [
        Engine::Exact,
        Engine::Sampled,
        Engine::Noisy,
        Engine::Ed,
        Engine::RecompiledNoisy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Sampled => "sampled",
            Engine::Noisy => "noisy",
            Engine::Ed => "ed",
            Engine::RecompiledNoisy => "recompiled+noisy",
        }
    }

    /// File-name stem.
    pub fn slug(self) -> &'static str {
        match self {
            Engine::RecompiledNoisy => "recompiled_noisy",
            e => e.name(),
        }
    }

    pub fn runs_circuits(self) -> bool {
        self != Engine::Ed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    Populations,
    Occupations,
    GateCounts,
    RecompileReport,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::Populations,
        Observable::Occupations,
        Observable::GateCounts,
        Observable::RecompileReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Populations => "populations",
            Observable::Occupations => "occupations",
            Observable::GateCounts => "gate_counts",
            Observable::RecompileReport => "recompile_report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    /// `1 / omega`, the internal unit.
    Omega,
    /// `hbar / 2V` with `V` the largest hopping.
    Hopping,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingMap {
    /// Nearest neighbours in qubit index order.
    Chain,
    Pairs(Vec<(usize, usize)>),
}

impl CouplingMap {
    pub fn pairs(&self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            CouplingMap::Chain => (1..n_qubits).map(|q| (q - 1, q)).collect(),
            CouplingMap::Pairs(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSettings {
    pub p1: f64,
    pub p2: f64,
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecompileSettings {
    pub overlap_threshold: f64,
    pub max_layers: usize,
    pub max_evaluations: usize,
    pub coupling_map: Option<CouplingMap>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: ModelParams,
    pub total_time: f64,
    pub steps: Vec<usize>,
    pub excited_site: usize,
    pub engines: Vec<Engine>,
    pub observables: Vec<Observable>,
    pub seed: u64,
    pub time_unit: TimeUnit,
    pub shots: usize,
    pub noise: NoiseSettings,
    pub recompile: RecompileSettings,
    pub fock_cutoff: usize,
    pub occupation_site: usize,
    pub occupation_mode: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    engines: Vec<String>,
    observables: Vec<String>,
    seed: Option<u64>,
    time_unit: Option<String>,
    model: RawModel,
    plan: RawPlan,
    sampling: Option<RawSampling>,
    noise: Option<RawNoise>,
    recompile: Option<RawRecompile>,
    ed: Option<RawEd>,
    occupations: Option<RawOccupations>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_sites: Option<usize>,
    site_energies: Option<Vec<f64>>,
    hopping: Option<Vec<Vec<f64>>>,
    modes_per_site: Option<usize>,
    frequencies: Option<Vec<Vec<f64>>>,
    couplings: Option<Vec<Vec<f64>>>,
    qubits_per_mode: Option<usize>,
    seed: Option<u64>,
    random_chain: Option<RawInterval>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    lo: f64,
    hi: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    total_time: f64,
    steps: Vec<usize>,
    excited_site: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    shots: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    p1: Option<f64>,
    p2: f64,
    trajectories: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCouplingMap {
    Named(String),
    Pairs(Vec<(usize, usize)>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecompile {
    overlap_threshold: Option<f64>,
    max_layers: Option<usize>,
    max_evaluations: Option<usize>,
    coupling_map: Option<RawCouplingMap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEd {
    fock_cutoff: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOccupations {
    site: Option<usize>,
    mode: Option<usize>,
}

const DEFAULT_SHOTS: usize = 8192;
const DEFAULT_P2: f64 = 0.01;
const DEFAULT_TRAJECTORIES: usize = 200;

impl Scenario {
    /// Parses and validates, collecting every problem found.
    pub fn from_toml(text: &str) -> Result<Scenario, Vec<ConfigError>> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| vec![ConfigError::new("<toml>", e.message())])?;
        let mut errors = Vec::new();

        let model = build_model(&raw.model, &mut errors);
        let engines = parse_names(&raw.engines, "engines", &Engine::ALL, Engine::name, &mut errors);
        let observables = parse_names(
            &raw.observables,
            "observables",
            &Observable::ALL,
            Observable::name,
            &mut errors,
        );

        let time_unit = match raw.time_unit.as_deref() {
            None | Some("omega") => TimeUnit::Omega,
            Some("hopping") => TimeUnit::Hopping,
            Some(other) => {
                errors.push(ConfigError::new(
                    "time_unit",
                    format!("unknown unit {other:?}; use \"omega\" or \"hopping\""),
                ));
                TimeUnit::Omega
            }
        };

        let plan = &raw.plan;
        if !(plan.total_time.is_finite() && plan.total_time > 0.0) {
            errors.push(ConfigError::new("plan.total_time", "must be positive and finite"));
        }
        if plan.steps.is_empty() || plan.steps.contains(&0) {
            errors.push(ConfigError::new("plan.steps", "needs at least one entry, all positive"));
        }
        let excited_site = plan.excited_site.unwrap_or(0);

        let shots = raw.sampling.as_ref().map_or(DEFAULT_SHOTS, |s| s.shots);
        if shots == 0 {
            errors.push(ConfigError::new("sampling.shots", "must be positive"));
        }

        let noise = match &raw.noise {
            Some(n) => NoiseSettings {
                p1: n.p1.unwrap_or(n.p2 / 10.0),
                p2: n.p2,
                trajectories: n.trajectories.unwrap_or(DEFAULT_TRAJECTORIES),
            },
            None => NoiseSettings {
                p1: DEFAULT_P2 / 10.0,
                p2: DEFAULT_P2,
                trajectories: DEFAULT_TRAJECTORIES,
            },
        };
        for (field, p) in [("noise.p1", noise.p1), ("noise.p2", noise.p2)] {
            if !(0.0..=1.0).contains(&p) {
                errors.push(ConfigError::new(field, format!("{p} outside [0, 1]")));
            }
        }
        if noise.trajectories == 0 {
            errors.push(ConfigError::new("noise.trajectories", "must be positive"));
        }

        let rc = raw.recompile.as_ref();
        let recompile = RecompileSettings {
            overlap_threshold: rc.and_then(|r| r.overlap_threshold).unwrap_or(0.99),
            max_layers: rc.and_then(|r| r.max_layers).unwrap_or(40),
            max_evaluations: rc.and_then(|r| r.max_evaluations).unwrap_or(2_000_000),
            coupling_map: match rc.and_then(|r| r.coupling_map.as_ref()) {
                None => None,
                Some(RawCouplingMap::Named(s)) if s == "chain" => Some(CouplingMap::Chain),
                Some(RawCouplingMap::Named(s)) => {
                    errors.push(ConfigError::new(
                        "recompile.coupling_map",
                        format!("unknown map {s:?}; use \"chain\" or a pair list"),
                    ));
                    None
                }
                Some(RawCouplingMap::Pairs(p)) => Some(CouplingMap::Pairs(p.clone())),
            },
        };
        if !(recompile.overlap_threshold > 0.0 && recompile.overlap_threshold <= 1.0) {
            errors.push(ConfigError::new("recompile.overlap_threshold", "must lie in (0, 1]"));
        }

        let fock_cutoff = raw.ed.as_ref().map_or(DEFAULT_FOCK_CUTOFF, |e| e.fock_cutoff);
        if fock_cutoff == 0 {
            errors.push(ConfigError::new("ed.fock_cutoff", "must be positive"));
        }
        let occupation_site = raw.occupations.as_ref().and_then(|o| o.site).unwrap_or(0);
        let occupation_mode = raw.occupations.as_ref().and_then(|o| o.mode).unwrap_or(0);

        if let Some(m) = &model {
            if excited_site >= m.n_sites {
                errors.push(ConfigError::new(
                    "plan.excited_site",
                    format!("site {excited_site} out of range for {} sites", m.n_sites),
                ));
            }
            if occupation_site >= m.n_sites {
                errors.push(ConfigError::new(
                    "occupations.site",
                    format!("site {occupation_site} out of range"),
                ));
            }
            if occupation_mode >= m.modes_per_site {
                errors.push(ConfigError::new(
                    "occupations.mode",
                    format!("mode {occupation_mode} out of range"),
                ));
            }
            if time_unit == TimeUnit::Hopping && m.max_hopping() == 0.0 {
                errors.push(ConfigError::new("time_unit", "hopping units need a nonzero hopping"));
            }
            if engines.contains(&Engine::Ed) && fock_cutoff > 0 {
                if let Err(e) = EdBasis::new(m, fock_cutoff) {
                    errors.push(ConfigError::new("ed.fock_cutoff", e.to_string()));
                }
            }
            if let Some(map) = &recompile.coupling_map {
                for (a, b) in map.pairs(m.n_qubits()) {
                    if a >= m.n_qubits() || b >= m.n_qubits() || a == b {
                        errors.push(ConfigError::new(
                            "recompile.coupling_map",
                            format!("invalid pair ({a}, {b}) for {} qubits", m.n_qubits()),
                        ));
                    }
                }
            }
        }

        check_combinations(&engines, &observables, &mut errors);

        match model {
            Some(model) if errors.is_empty() => Ok(Scenario {
                name: raw.name.unwrap_or_else(|| "scenario".into()),
                model,
                total_time: plan.total_time,
                steps: plan.steps.clone(),
                excited_site,
                engines,
                observables,
                seed: raw.seed.unwrap_or(0),
                time_unit,
                shots,
                noise,
                recompile,
                fock_cutoff,
                occupation_site,
                occupation_mode,
            }),
            _ => Err(errors),
        }
    }

    /// Register-size gate: circuits beyond the default statevector cap need
    /// `allow_large`, and then only the exact and sampled engines run.
    pub fn check_size(&self, allow_large: bool) -> Result<usize, Vec<ConfigError>> {
        let n = self.model.n_qubits();
        if n <= DEFAULT_QUBIT_CAP {
            return Ok(DEFAULT_QUBIT_CAP);
        }
        if !allow_large {
            return Err(vec![ConfigError::new(
                "model",
                format!("{n} qubits exceeds the default cap of {DEFAULT_QUBIT_CAP}; pass --allow-large"),
            )]);
        }
        if n > LARGE_QUBIT_CAP {
            return Err(vec![ConfigError::new(
                "model",
                format!("{n} qubits exceeds the hard cap of {LARGE_QUBIT_CAP}"),
            )]);
        }
        let errors: Vec<ConfigError> = self
            .engines
            .iter()
            .filter(|e| !matches!(e, Engine::Exact | Engine::Sampled))
            .map(|e| {
                ConfigError::new(
                    "engines",
                    format!("engine {} is unavailable beyond {DEFAULT_QUBIT_CAP} qubits", e.name()),
                )
            })
            .collect();
        if errors.is_empty() {
            Ok(LARGE_QUBIT_CAP)
        } else {
            Err(errors)
        }
    }

    pub fn has(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    /// Converts an internal time to the configured output unit.
    pub fn output_time(&self, t: f64) -> f64 {
        match self.time_unit {
            TimeUnit::Omega => t,
            TimeUnit::Hopping => t * 2.0 * self.model.max_hopping(),
        }
    }
}

fn build_model(raw: &RawModel, errors: &mut Vec<ConfigError>) -> Option<ModelParams> {
    let mut missing = |field: &str| {
        errors.push(ConfigError::new(format!("model.{field}"), "missing"));
    };
    let (Some(n_sites), Some(qubits_per_mode)) = (raw.n_sites, raw.qubits_per_mode) else {
        if raw.n_sites.is_none() {
            missing("n_sites");
        }
        if raw.qubits_per_mode.is_none() {
            missing("qubits_per_mode");
        }
        return None;
    };

    let params = if let Some(iv) = &raw.random_chain {
        let explicit = [
            ("hopping", raw.hopping.is_some()),
            ("frequencies", raw.frequencies.is_some()),
            ("couplings", raw.couplings.is_some()),
            ("modes_per_site", raw.modes_per_site.is_some()),
        ];
        for (field, present) in explicit {
            if present {
                errors.push(ConfigError::new(
                    format!("model.{field}"),
                    "conflicts with model.random_chain",
                ));
            }
        }
        match random_chain(n_sites, qubits_per_mode, raw.seed.unwrap_or(0), iv.lo, iv.hi) {
            Ok(mut p) => {
                if let Some(eps) = &raw.site_energies {
                    p.site_energies = eps.clone();
                }
                p
            }
            Err(e) => {
                errors.push(ConfigError::new("model.random_chain", e.to_string()));
                return None;
            }
        }
    } else {
        let (Some(hopping), Some(frequencies), Some(couplings)) = (&raw.hopping, &raw.frequencies, &raw.couplings)
        else {
            for (field, present) in [
                ("hopping", raw.hopping.is_some()),
                ("frequencies", raw.frequencies.is_some()),
                ("couplings", raw.couplings.is_some()),
            ] {
                if !present {
                    missing(field);
                }
            }
            return None;
        };
        ModelParams {
            n_sites,
            site_energies: raw.site_energies.clone().unwrap_or_else(|| vec![0.0; n_sites]),
            hopping: hopping.clone(),
            modes_per_site: raw.modes_per_site.unwrap_or(1),
            frequencies: frequencies.clone(),
            couplings: couplings.clone(),
            qubits_per_mode,
        }
    };
    match validate(&params) {
        Ok(()) => Some(params),
        Err(list) => {
            errors.extend(list.into_iter().map(|e| ConfigError::new("model", e.to_string())));
            None
        }
    }
}

fn parse_names<T: Copy + Ord>(
    names: &[String],
    field: &str,
    all: &[T],
    name: fn(T) -> &'static str,
    errors: &mut Vec<ConfigError>,
) -> Vec<T> {
    if names.is_empty() {
        errors.push(ConfigError::new(field, "needs at least one entry"));
    }
    let mut out = Vec::new();
    for (k, n) in names.iter().enumerate() {
        match all.iter().find(|&&x| name(x) == n) {
            Some(&x) if !out.contains(&x) => out.push(x),
            Some(_) => errors.push(ConfigError::new(format!("{field}[{k}]"), format!("{n:?} listed twice"))),
            None => {
                let known: Vec<&str> = all.iter().map(|&x| name(x)).collect();
                errors.push(ConfigError::new(
                    format!("{field}[{k}]"),
                    format!("unknown {n:?}; expected one of {}", known.join(", ")),
                ));
            }
        }
    }
    out
}

fn check_combinations(engines: &[Engine], observables: &[Observable], errors: &mut Vec<ConfigError>) {
    let any = |f: fn(&Engine) -> bool| engines.iter().any(f);
    if observables.contains(&Observable::Occupations) && !any(|e| matches!(e, Engine::Exact | Engine::Ed)) {
        errors.push(ConfigError::new(
            "observables",
            "occupations require the exact or ed engine",
        ));
    }
    if observables.contains(&Observable::GateCounts) && !any(|e| e.runs_circuits()) {
        errors.push(ConfigError::new("observables", "gate_counts require a circuit engine"));
    }
    if observables.contains(&Observable::RecompileReport) && !engines.contains(&Engine::RecompiledNoisy) {
        errors.push(ConfigError::new(
            "observables",
            "recompile_report requires the recompiled+noisy engine",
        ));
    }
}

/// Named scenarios shipped with the binary.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig4-upper", include_str!("../presets/fig4-upper.toml")),
    ("fig4-lower", include_str!("../presets/fig4-lower.toml")),
    ("fig5-upper", include_str!("../presets/fig5-upper.toml")),
    ("fig5-lower", include_str!("../presets/fig5-lower.toml")),
    ("fig6-left", include_str!("../presets/fig6-left.toml")),
    ("fig6-middle", include_str!("../presets/fig6-middle.toml")),
    ("fig6-right", include_str!("../presets/fig6-right.toml")),
    ("appendixC", include_str!("../presets/appendixC.toml")),
    ("appendixD-small", include_str!("../presets/appendixD-small.toml")),
    ("appendixD-full", include_str!("../presets/appendixD-full.toml")),
];

pub fn preset(name: &str) -> Option<Scenario> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_toml(text).expect("shipped presets are valid"))
}
