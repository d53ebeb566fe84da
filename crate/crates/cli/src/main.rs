mod artifact;
mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mbl_core::delta_opt::OptimizerConfig;
use mbl_core::sampler::ChainConfig;
use serde::Deserialize;

use artifact::{Artifact, Format};
use commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "mbl", version, about = "Volumes, constants and sampling for unit balls of self-adjoint matrix ensembles")]
struct Cli {
    /// Output format of the artifact.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true, env = "MBL_THREADS")]
    threads: Option<usize>,
    /// TOML file with `[optimizer]` and `[chain]` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form constants for given exponents.
    Constants(commands::ConstantsArgs),
    /// Numerical Δ_n(p) for a range of n.
    Delta(commands::DeltaArgs),
    /// Ullman density, distribution function and potential checks.
    Ullman(commands::UllmanArgs),
    /// Gauss–Lobatto identity, Fekete points and k-diameters.
    Vandermonde(commands::VandermondeArgs),
    /// Eigenvalues of uniform points in the matrix ball.
    Sample(commands::SampleArgs),
    /// Weak law of large numbers for eigenvalue q-norms.
    Wlln(commands::WllnArgs),
    /// Intersection fractions over a dilation grid.
    Intersect(commands::IntersectArgs),
    /// Monte Carlo volumes against the asymptotic surrogate.
    Volume(commands::VolumeArgs),
}

/// Settings read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub optimizer: OptimizerConfig,
    pub chain: ChainConfig,
}

/// Exit code 2 for rejected input, 1 for everything else.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<mbl_core::Error> for Failure {
    fn from(e: mbl_core::Error) -> Self {
        use mbl_core::Error::*;
        match e {
            InvalidArgument(_) | Domain(_) | DegenerateExponents { .. } | Unsupported(_) | Refused(_) => {
                Self::Usage(e.into())
            }
            Singularity(_) | EigenSolver { .. } => Self::Runtime(e.into()),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Runtime)?;
    toml::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Usage)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::Runtime)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage(anyhow::anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")
            .map_err(Failure::Runtime)?;
    }
    let file = load_config(cli.config.as_deref())?;
    let ctx = commands::Context { seed: cli.seed, file };
    let start = Instant::now();
    let Outcome { command, params, table, summary, sidecar } = match &cli.command {
        Command::Constants(a) => commands::constants(a, &ctx),
        Command::Delta(a) => commands::delta(a, &ctx),
        Command::Ullman(a) => commands::ullman(a, &ctx),
        Command::Vandermonde(a) => commands::vandermonde(a, &ctx),
        Command::Sample(a) => commands::sample(a, &ctx),
        Command::Wlln(a) => commands::wlln(a, &ctx),
        Command::Intersect(a) => commands::intersect(a, &ctx),
        Command::Volume(a) => commands::volume(a, &ctx),
    }?;
    let artifact = Artifact { command, seed: cli.seed, params, duration_ms: start.elapsed().as_millis(), table };
    let text = artifact.render(cli.format).map_err(Failure::Runtime)?;
    match &cli.output {
        Some(path) => {
            write_file(path, &text)?;
            if sidecar && cli.format == Format::Csv {
                let mut side = path.clone().into_os_string();
                side.push(".json");
                write_file(Path::new(&side), &artifact.to_json())?;
            }
            println!("{summary} -> {}", path.display());
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
