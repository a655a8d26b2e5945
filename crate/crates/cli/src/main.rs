//! `pilotcluster` command-line driver.
//!
//! Every subcommand reads the same flat `key = value` config (see
//! `ExperimentConfig`); `--set key=value` and the dedicated flags override
//! file values.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pilotcluster::game::{exhaustive_optimum, CoalitionStructure, Game, Target};
use pilotcluster::harness::{self, ExperimentConfig};
use pilotcluster::{estimate_propagation, Deployment, PropagationTable, Scheme};

#[derive(Parser)]
#[command(
    name = "pilotcluster",
    version,
    about = "Pilot clustering via coalition formation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed (overrides `master_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Network {
    /// Deployment file written by `deploy`.
    #[arg(long, value_name = "PATH")]
    deployment: PathBuf,
    /// Propagation table written by `mu`; estimated from the deployment when omitted.
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    #[arg(long, value_parser = parse_scheme, default_value = "mrc")]
    scheme: Scheme,
    /// Antennas per BS; defaults to the first entry of `antennas`.
    #[arg(long)]
    antennas: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Full experiment sweep, one CSV record per (trial, M, scheme, method).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated subset of formation,singletons,grand,exhaustive.
        #[arg(long, value_name = "LIST")]
        methods: Option<String>,
        /// Restrict to one combining scheme.
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        /// Also write per-(M, scheme, method) means and standard errors.
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
    },
    /// Draw a random deployment.
    Deploy {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the propagation table of a deployment.
    Mu {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        deployment: PathBuf,
    },
    /// Run one coalition formation and write its trace log.
    Form {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        network: Network,
    },
    /// Best coalition structure by enumeration.
    Exhaustive {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        network: Network,
    },
    /// Certify that a structure file is individually stable.
    StableCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        network: Network,
        /// Structure file: coalition labels, one per cell.
        #[arg(long, value_name = "PATH")]
        structure: PathBuf,
        /// Comma-separated search counters; zeros when omitted.
        #[arg(long, value_name = "LIST")]
        eta: Option<String>,
    },
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse::<Scheme>().map_err(|e| e.to_string())
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_text(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        config.set(k, v)?;
    }
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(bytes).context("writing stdout"),
    }
}

struct Loaded {
    deployment: Deployment,
    table: PropagationTable,
}

fn load_network(network: &Network, config: &ExperimentConfig) -> Result<Loaded> {
    let deployment = Deployment::from_text(&read(&network.deployment)?)
        .with_context(|| format!("parsing {}", network.deployment.display()))?;
    let table = match &network.table {
        Some(path) => {
            let table = PropagationTable::from_text(&read(path)?)
                .with_context(|| format!("parsing {}", path.display()))?;
            if table.deployment_hash() != deployment.fingerprint() {
                bail!(
                    "{} was estimated for a different deployment",
                    path.display()
                );
            }
            table
        }
        None => estimate_propagation(&deployment, config.mu_samples, config.master_seed)?,
    };
    Ok(Loaded { deployment, table })
}

fn game_for<'a>(
    network: &Network,
    config: &ExperimentConfig,
    loaded: &'a Loaded,
) -> Result<Game<'a>> {
    let cells = loaded.deployment.cells();
    let antennas = network
        .antennas
        .or_else(|| config.antennas.first().copied())
        .context("no antenna count given")?;
    let config = ExperimentConfig {
        cells,
        ..config.clone()
    };
    Ok(Game::with_uniform_budget(
        config.params(antennas)?,
        &loaded.table,
        network.scheme,
        config.budget,
    )?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            common,
            workers,
            methods,
            scheme,
            summary,
        } => {
            let mut config = load_config(&common)?;
            if let Some(w) = workers {
                config.workers = w;
            }
            if let Some(m) = methods {
                config.set("methods", &m)?;
            }
            if let Some(s) = scheme {
                config.schemes = vec![s];
            }
            let records = harness::run_experiment(&config)?;
            let mut buf = Vec::new();
            harness::write_csv(&records, &mut buf)?;
            emit(&common.out, &buf)?;
            if let Some(path) = summary {
                let mut buf = Vec::new();
                harness::write_summary_csv(&harness::aggregate(&records)?, &mut buf)?;
                emit(&Some(path), &buf)?;
            }
        }
        Command::Deploy { common } => {
            let config = load_config(&common)?;
            let d = Deployment::random(
                config.cells,
                config.density,
                config.alpha,
                config.master_seed,
            )?;
            emit(&common.out, d.to_text().as_bytes())?;
        }
        Command::Mu { common, deployment } => {
            let config = load_config(&common)?;
            let d = Deployment::from_text(&read(&deployment)?)?;
            let t = estimate_propagation(&d, config.mu_samples, config.master_seed)?;
            emit(&common.out, t.to_text().as_bytes())?;
        }
        Command::Form { common, network } => {
            let config = load_config(&common)?;
            let loaded = load_network(&network, &config)?;
            let game = game_for(&network, &config, &loaded)?;
            let trace = game.run_formation(config.master_seed);
            emit(&common.out, trace.to_log().as_bytes())?;
        }
        Command::Exhaustive { common, network } => {
            let config = load_config(&common)?;
            let loaded = load_network(&network, &config)?;
            let game = game_for(&network, &config, &loaded)?;
            let (best, total) = exhaustive_optimum(&game, config.objective)?;
            let text = format!(
                "# exhaustive optimum ({}, {} antennas)\n{}\n# total_se {}\n# mean_se {}\n",
                network.scheme,
                game.params().antennas(),
                best.to_label_line(),
                total,
                total / game.cells() as f64
            );
            emit(&common.out, text.as_bytes())?;
        }
        Command::StableCheck {
            common,
            network,
            structure,
            eta,
        } => {
            let config = load_config(&common)?;
            let loaded = load_network(&network, &config)?;
            let game = game_for(&network, &config, &loaded)?;
            let structure = CoalitionStructure::parse(&read(&structure)?)?;
            let eta: Vec<u32> = match eta {
                Some(list) => list
                    .split(',')
                    .map(|s| s.trim().parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .context("parsing --eta")?,
                None => vec![0; game.cells()],
            };
            if !game.is_individually_stable(&structure, &eta)? {
                let (cell, target) = game
                    .first_admissible(&structure, &eta)
                    .expect("unstable structure has an admissible deviation");
                let dest = match target {
                    Target::Empty => "a new singleton".to_string(),
                    Target::Block(b) => format!("{:?}", structure.members(b).collect::<Vec<_>>()),
                };
                emit(
                    &common.out,
                    format!("unstable: cell {cell} gains by moving to {dest}\n").as_bytes(),
                )?;
                return Ok(ExitCode::from(2));
            }
            emit(&common.out, b"stable\n")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
