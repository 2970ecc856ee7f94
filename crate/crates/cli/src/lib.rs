//! Scenario runner: reads a scenario, runs the requested engines over its
//! time grids and writes one CSV per engine and sweep point.

pub mod compare;
pub mod runner;
pub mod scenario;
pub mod table;

pub use compare::{compare, compare_tables, Comparison};
pub use runner::{run_scenario, RunError, RunOptions};
pub use scenario::{preset, Engine, Observable, Scenario, PRESETS};
pub use table::{format_g, Table};

use serde::Serialize;

use scenario::ConfigError;

#[derive(Serialize)]
struct ErrorReport<'a> {
    errors: &'a [ConfigError],
}

/// `{"errors": [{"field": ..., "message": ...}, ...]}`
pub fn error_json(errors: &[ConfigError]) -> String {
    serde_json::to_string_pretty(&ErrorReport { errors }).expect("plain strings serialize")
}

/// Resolves `config` as a file path, falling back to a preset name.
pub fn load_scenario(config: &str) -> Result<Scenario, Vec<ConfigError>> {
    let path = std::path::Path::new(config);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| {
            vec![ConfigError {
                field: "<file>".into(),
                message: format!("{config}: {e}"),
            }]
        })?;
        return Scenario::from_toml(&text);
    }
    preset(config).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        vec![ConfigError {
            field: "<file>".into(),
            message: format!("{config}: no such file or preset (presets: {})", names.join(", ")),
        }]
    })
}
