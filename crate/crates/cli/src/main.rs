//! `ks-blowup`: drives the numerical kernels from a `key = value` config.
//!
//! Exit codes: 0 success, 1 config error, 2 numerical failure,
//! 3 verification FAIL.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{Context, Failure};
use crate::config::{parse_config, Command};

#[derive(Parser, Debug)]
#[command(name = "ks-blowup", version, about = "Critical-mass Keller-Segel blow-up laboratory")]
struct Cli {
    /// `key = value` configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomly drawn test functions.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AnsatzAction {
    /// Write `selfsim.csv` and `profile.csv`.
    Dump,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Self-similar profiles and the radial ansatz.
    Ansatz {
        #[arg(value_enum, default_value = "dump")]
        action: AnsatzAction,
    },
    /// Moment identity and second moments on test densities.
    Moments,
    /// Integrate the radial equation and record parameter estimates.
    Evolve,
    /// Fit λ√(log t) on a trajectory CSV.
    FitRate {
        /// Overrides the `trajectory` key.
        trajectory: Option<PathBuf>,
    },
    /// Sphere coefficients of g and both quadratic-form routes.
    Spectrum,
    /// Orthogonalize a model right-hand side and solve the inner problem.
    InnerSolve,
    /// Integrate the reduced parameter system.
    ReducedOde,
    /// Run the acceptance checks and write `report.txt`.
    VerifyAll,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Ansatz { .. } => Command::Ansatz,
            Sub::Moments => Command::Moments,
            Sub::Evolve => Command::Evolve,
            Sub::FitRate { .. } => Command::FitRate,
            Sub::Spectrum => Command::Spectrum,
            Sub::InnerSolve => Command::InnerSolve,
            Sub::ReducedOde => Command::ReducedOde,
            Sub::VerifyAll => Command::VerifyAll,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(cli.command.command(), &text)?;
    if let Sub::FitRate { trajectory: Some(p) } = &cli.command {
        cfg.set_text("trajectory", &p.to_string_lossy());
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out)?;

    let mut header = cfg.header();
    if let Some(s) = cli.seed {
        header.push_str(&format!("# seed = {s}\n"));
    }
    print!("{header}");
    let report = commands::run(&Context { cfg: &cfg, out: &cli.out, seed: cli.seed })?;
    report.write(&cli.out.join("report.txt"), &header)?;
    if report.failed > 0 {
        return Err(Failure::Verification(format!("{} check(s) failed; see report.txt", report.failed)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
