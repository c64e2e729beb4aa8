//! `spcirc`: command-line driver for symplectic circuit experiments.
//!
//! Every run prints a JSON envelope on stdout holding the resolved configuration, so
//! `spcirc run --config envelope.json` replays it. Exit codes: 0 success, 1 error, 2 capacity.

mod config;
mod run;
mod states;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use spcirc::brauer_weingarten::BrauerGroup;
use spcirc::group_sampler::Group;
use spcirc::lie_closure::DEFAULT_MAX_DIMENSION;
use spcirc::moment_propagator::DEFAULT_MAX_LAYERS;
use spcirc::{Error, PauliString};

use config::*;

#[derive(Parser)]
#[command(name = "spcirc", version = env!("SPCIRC_BUILD_ID"), about = "Symplectic circuit experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Validate the configuration without running it.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Also write the result envelope to this file.
    #[arg(long, global = true)]
    envelope: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Dimension and type of the Lie algebra generated by a Pauli set.
    Closure {
        #[arg(long, value_enum)]
        set: SetName,
        #[arg(long)]
        n: usize,
        /// File of Pauli strings, one per line (with --set custom).
        #[arg(long)]
        generators: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_DIMENSION)]
        max_dimension: usize,
    },
    /// Draw Haar-random matrices into a binary matrix file.
    Sample {
        #[arg(long)]
        group: Group,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// t-fold twirl of the first matrix in a binary matrix file.
    Twirl {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        group: BrauerGroup,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gram matrix of the Brauer commutant basis.
    Gram {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        group: BrauerGroup,
    },
    /// Apply a JSON circuit to a basis state.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = 0)]
        state: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample expectation vectors over random symplectic unitaries, written as CSV.
    Gp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summary statistics of the expectation-value distribution.
    GpSummary {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Empirical tail of one expectation value against Gaussian and moment bounds.
    Concentration {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "basis:0")]
        state: String,
        /// Defaults to Y on qubit 2.
        #[arg(long)]
        observable: Option<PauliString>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Explicit thresholds; otherwise a grid in units of the exact standard deviation.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[arg(long, default_value_t = 16)]
        points: usize,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Output-probability anti-concentration over random symplectic unitaries.
    Anticoncentration {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
        alphas: Vec<f64>,
        #[arg(long)]
        seed: u64,
    },
    /// Layers for brick-layer circuits to reach the Haar collision probability.
    AnticoncentrationDepth {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 14)]
        n_max: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_LAYERS)]
        max_layers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected collision probability after a brick-layer circuit.
    Collision {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        layers: usize,
    },
    /// Replay a configuration (or the result envelope of an earlier run).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    build_id: &'static str,
    command: &'static str,
    config: &'a ExperimentConfig,
    dry_run: bool,
    wall_clock_seconds: f64,
    payload: Value,
}

fn read_generators(path: &PathBuf) -> spcirc::Result<Vec<PauliString>> {
    fs::read_to_string(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

fn read_gp(path: &PathBuf, seed: u64, out: Option<PathBuf>) -> spcirc::Result<GpConfig> {
    let e: GpExperiment = serde_json::from_str(&fs::read_to_string(path)?)?;
    if e.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema_version {}", e.schema_version)));
    }
    Ok(GpConfig { n: e.n, states: e.states, observable: e.observable, samples: e.samples, seed, out })
}

fn read_replay(path: &PathBuf) -> spcirc::Result<ExperimentConfig> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    // An envelope carries its configuration under "config".
    let v = match v {
        Value::Object(mut m) if m.contains_key("payload") => m.remove("config").unwrap_or(Value::Null),
        v => v,
    };
    let cfg: ExperimentConfig = serde_json::from_value(v)?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema_version {}", cfg.schema_version)));
    }
    Ok(cfg)
}

fn resolve(sub: Sub) -> spcirc::Result<ExperimentConfig> {
    let cmd = match sub {
        Sub::Closure { set, n, generators, max_dimension } => Command::Closure(ClosureConfig {
            set,
            n,
            generators: generators.as_ref().map(read_generators).transpose()?,
            max_dimension: Some(max_dimension),
        }),
        Sub::Sample { group, d, count, seed, out } => Command::Sample(SampleConfig { group, d, count, seed, out }),
        Sub::Twirl { t, d, group, input, out } => Command::Twirl(TwirlConfig { t, d, group, input, out }),
        Sub::Gram { t, d, group } => Command::Gram(GramConfig { t, d, group }),
        Sub::Simulate { circuit, state, out } => Command::Simulate(SimulateConfig { circuit, state, out }),
        Sub::Gp { config, seed, out } => Command::Gp(read_gp(&config, seed, Some(out))?),
        Sub::GpSummary { config, seed } => Command::GpSummary(read_gp(&config, seed, None)?),
        Sub::Concentration { n, state, observable, samples, seed, thresholds, points, step, out } => {
            let observable = match observable {
                Some(p) => p,
                None => {
                    if n < 2 {
                        return Err(Error::Domain("the default observable needs n >= 2".into()));
                    }
                    PauliString::from_factors(n, &[(1, spcirc::Pauli::Y)])?
                }
            };
            Command::Concentration(ConcentrationConfig { n, state, observable, samples, seed, thresholds, points, step, out })
        }
        Sub::Anticoncentration { n, samples, alphas, seed } => {
            Command::Anticoncentration(AnticoncentrationConfig { n, samples, alphas, seed })
        }
        Sub::AnticoncentrationDepth { n_min, n_max, epsilon, max_layers, out } => {
            Command::AnticoncentrationDepth(DepthConfig { n_min, n_max, epsilon, max_layers, out })
        }
        Sub::Collision { n, layers } => Command::Collision(CollisionConfig { n, layers }),
        Sub::Run { config } => return read_replay(&config),
    };
    Ok(ExperimentConfig::new(cmd))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_capacity() { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match resolve(cli.cmd) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let start = Instant::now();
    let payload = match run::execute(&cfg.command, cli.dry_run) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        build_id: env!("SPCIRC_BUILD_ID"),
        command: cfg.command.name(),
        config: &cfg,
        dry_run: cli.dry_run,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        payload,
    };
    let text = match serde_json::to_string_pretty(&env) {
        Ok(t) => t,
        Err(e) => return fail(&e.into()),
    };
    if let Some(p) = &cli.envelope {
        if let Err(e) = fs::write(p, format!("{text}\n")) {
            return fail(&e.into());
        }
    }
    println!("{text}");
    ExitCode::SUCCESS
}
