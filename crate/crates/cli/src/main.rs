//! `uscqec`: batch driver producing the CSV and JSON data behind each
//! experiment.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure, 4 verification failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;
use usc_qec::dynamics::DynamicsError;
use usc_qec::fluxqubit::FluxQubitError;
use usc_qec::graphcode::GraphCodeError;
use usc_qec::noise::NoiseError;
use usc_qec::resonator::ResonatorError;

use config::*;
use output::{OutputDir, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<FluxQubitError> for CliError {
    fn from(e: FluxQubitError) -> Self {
        match e {
            FluxQubitError::InvalidParams(_) | FluxQubitError::BadGrid => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ResonatorError> for CliError {
    fn from(e: ResonatorError) -> Self {
        match e {
            ResonatorError::InvalidParams(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidSystem(_) | DynamicsError::ConditionViolated { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<GraphCodeError> for CliError {
    fn from(e: GraphCodeError) -> Self {
        match e {
            GraphCodeError::InvalidGraph(_) | GraphCodeError::Parse(_) | GraphCodeError::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        match e {
            NoiseError::Graph(g) => g.into(),
            NoiseError::DimensionGuard { .. } | NoiseError::NoAcceptedTrials => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "uscqec", version, about = "Simulations of graph-code generation in ultrastrongly coupled circuit QED")]
struct Cli {
    /// JSON file overriding the embedded defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Random seed (Monte Carlo); recorded in the manifest.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    /// Override one config key, e.g. `--set ramp.steps=1000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flux-qubit coupling coefficients over (alpha, f1).
    QubitSweep,
    /// Resonator eigenmodes and the degenerate manifold.
    Modes,
    /// Gate fidelity against transversal coupling for several cavity fields.
    GateFidelity,
    /// Adiabatic switch-off of the coupling.
    Adiabatic {
        /// Ramp duration in units of 1/omega.
        #[arg(long = "T")]
        t: Option<f64>,
    },
    /// Build and check a graph code.
    Code {
        /// `five-qubit` or `steane`.
        code: Option<String>,
        /// Exit with code 4 if any check fails.
        #[arg(long)]
        verify: bool,
        /// Edge-list file for the Steane construction.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Fidelity surfaces under depolarizing noise.
    Montecarlo {
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Measurement error probability.
        #[arg(long)]
        pm: Option<f64>,
        /// `trajectory` or `channel`.
        #[arg(long)]
        mode: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::QubitSweep => "qubit-sweep",
            Command::Modes => "modes",
            Command::GateFidelity => "gate-fidelity",
            Command::Adiabatic { .. } => "adiabatic",
            Command::Code { .. } => "code",
            Command::Montecarlo { .. } => "montecarlo",
        }
    }

    /// Dedicated flags, as overrides applied after `--set`.
    fn flag_overrides(&self, seed: Option<u64>) -> Vec<String> {
        let quoted = |k: &str, v: &str| format!("{k}={}", Value::String(v.to_string()));
        let mut sets = Vec::new();
        match self {
            Command::Adiabatic { t: Some(t) } => sets.push(format!("ramp.T_over_omega={t}")),
            Command::Code { code, verify, graph } => {
                if let Some(c) = code {
                    sets.push(quoted("code", c));
                }
                if *verify {
                    sets.push("verify=true".into());
                }
                if let Some(g) = graph {
                    sets.push(quoted("graph", &g.display().to_string()));
                }
            }
            Command::Montecarlo { code, trials, pm, mode } => {
                if let Some(c) = code {
                    sets.push(quoted("code", c));
                }
                if let Some(t) = trials {
                    sets.push(format!("trials={t}"));
                }
                if let Some(p) = pm {
                    sets.push(format!("p_m={p}"));
                }
                if let Some(m) = mode {
                    sets.push(quoted("mode", m));
                }
                if let Some(s) = seed {
                    sets.push(format!("seed={s}"));
                }
            }
            _ => {}
        }
        sets
    }
}

struct Run<'a> {
    cli: &'a Cli,
    file: Option<Value>,
    sets: Vec<String>,
}

impl Run<'_> {
    fn execute<T, F>(&self, body: F) -> Result<(), CliError>
    where
        T: Default + Serialize + DeserializeOwned,
        F: FnOnce(&T, &mut OutputDir) -> Result<(String, bool), CliError>,
    {
        let cfg: T = resolve(self.file.clone(), &self.sets)?;
        let resolved = serde_json::to_value(&cfg).expect("config serializes");
        if self.cli.print_config {
            println!("{}", serde_json::to_string_pretty(&resolved).expect("valid json"));
            return Ok(());
        }
        let start = Instant::now();
        let mut out = OutputDir::new(&self.cli.out)?;
        let (summary, ok) = body(&cfg, &mut out)?;
        let name = self.cli.command.name();
        let seed = resolved.get("seed").and_then(Value::as_u64).or(self.cli.seed);
        let mut outputs = out.written();
        outputs.push(self.cli.out.join(format!("{name}.manifest.json")).display().to_string());
        let manifest = RunManifest {
            subcommand: name.to_string(),
            config: resolved,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            duration_s: start.elapsed().as_secs_f64(),
        };
        out.write_json(&format!("{name}.manifest.json"), &manifest)?;
        println!("{name}: {summary}");
        if ok {
            Ok(())
        } else {
            Err(CliError::Verification(summary))
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let mut sets = cli.sets.clone();
    sets.extend(cli.command.flag_overrides(cli.seed));
    let run = Run { cli, file, sets };
    let always = |r: Result<String, CliError>| r.map(|s| (s, true));
    match &cli.command {
        Command::QubitSweep => run.execute(|c: &QubitSweepConfig, o| always(commands::qubit_sweep(c, o))),
        Command::Modes => run.execute(|c: &ModesConfig, o| always(commands::modes(c, o))),
        Command::GateFidelity => run.execute(|c: &GateFidelityConfig, o| always(commands::gate_fidelity(c, o))),
        Command::Adiabatic { .. } => run.execute(|c: &AdiabaticConfig, o| always(commands::adiabatic(c, o))),
        Command::Code { .. } => run.execute(|c: &CodeConfig, o| {
            let (summary, ok) = commands::code(c, o)?;
            Ok((summary, ok || !c.verify))
        }),
        Command::Montecarlo { .. } => run.execute(|c: &MontecarloConfig, o| always(commands::montecarlo(c, o))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uscqec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
