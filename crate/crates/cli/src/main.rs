use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgfluct::config::{parse_config, ExperimentConfig, Tolerances};
use kgfluct::run::{run_experiment, Command};
use kgfluct::validate::validate;
use kgfluct::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "kgfluct", version, about = "Lattice Klein-Gordon fields with probabilistic initial conditions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// experiment config (JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    /// overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// overrides the config output directory
    #[arg(long)]
    output: Option<PathBuf>,
    /// worker threads for the engines (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Transport the classical wave function on the phase-space grid
    EvolveLiouville(Common),
    /// Evolve the Fourier-transformed wave function by split-step
    EvolveSchroedinger(Common),
    /// Sample and advance an ensemble with the cellular automaton
    RunEnsemble(Common),
    /// Check commutators, hermiticity and identities on the initial state
    CheckOperators(Common),
    /// Tree-level mirror-field series and direct stationarisation
    SaddlePoint(Common),
    /// One-loop lattice momentum sum
    OneLoop(Common),
    /// Run the desk-scale cross-check suite
    Validate(Common),
}

fn load(common: &Common) -> CliResult<ExperimentConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.output {
        cfg.output = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn dispatch(cmd: Cmd) -> CliResult<()> {
    let (common, command) = match cmd {
        Cmd::EvolveLiouville(c) => (c, Some(Command::EvolveLiouville)),
        Cmd::EvolveSchroedinger(c) => (c, Some(Command::EvolveSchroedinger)),
        Cmd::RunEnsemble(c) => (c, Some(Command::RunEnsemble)),
        Cmd::CheckOperators(c) => (c, Some(Command::CheckOperators)),
        Cmd::SaddlePoint(c) => (c, Some(Command::SaddlePoint)),
        Cmd::OneLoop(c) => (c, Some(Command::OneLoop)),
        Cmd::Validate(c) => (c, None),
    };
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = common.threads {
            if n == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
    };
    pool.install(|| match command {
        Some(command) => {
            let cfg = load(&common)?;
            let summary = run_experiment(&cfg, command)?;
            for f in &summary.files {
                println!("{}", summary.output_dir.join(f).display());
            }
            Ok(())
        }
        None => {
            let (tolerances, output) = match &common.config {
                Some(_) => {
                    let cfg = load(&common)?;
                    (cfg.tolerances, PathBuf::from(cfg.output))
                }
                None => (
                    Tolerances::default(),
                    common.output.clone().unwrap_or_else(|| Path::new("results").to_path_buf()),
                ),
            };
            let report = validate(&tolerances, &output)?;
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {}: {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
            }
            report.into_result().map(|_| ())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
