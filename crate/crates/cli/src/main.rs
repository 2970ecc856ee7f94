use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ephq_cli::{compare, error_json, load_scenario, run_scenario, RunOptions, PRESETS};

#[derive(Parser)]
#[command(name = "ephq", version, about = "Electron-phonon circuit simulation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a named preset.
    Run {
        config: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the scenario seed (shots, noise, recompiler).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        /// Lift the statevector qubit cap for the exact and sampled engines.
        #[arg(long)]
        allow_large: bool,
    },
    /// Max and mean absolute error between two population CSVs.
    Compare { a: PathBuf, b: PathBuf },
    /// List the shipped presets.
    Presets,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
            allow_large,
        } => {
            let scenario = match load_scenario(&config) {
                Ok(s) => s,
                Err(errors) => {
                    eprintln!("{}", error_json(&errors));
                    return ExitCode::from(2);
                }
            };
            let options = RunOptions {
                out_dir: out,
                seed,
                jobs: jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
                allow_large,
            };
            match run_scenario(&scenario, &options) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}", error_json(&e.entries()));
                    ExitCode::from(if matches!(e, ephq_cli::RunError::Config(_)) {
                        2
                    } else {
                        1
                    })
                }
            }
        }
        Command::Compare { a, b } => match compare(&a, &b) {
            Ok(c) => {
                print!("{}", c.to_text());
                ExitCode::SUCCESS
            }
            Err(e) => {
                let entry = ephq_cli::scenario::ConfigError {
                    field: "compare".into(),
                    message: e.to_string(),
                };
                eprintln!("{}", error_json(&[entry]));
                ExitCode::from(1)
            }
        },
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
