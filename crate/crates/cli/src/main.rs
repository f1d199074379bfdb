use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsab_cli::{load_config, report_early_error, resolve_out_dir, run, Experiment, Overrides, RunError, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "nsab", version, about = "NS-alpha-beta channel solver and verifier")]
#[command(after_help = concat!(
    "Exit codes: 0 success, 1 i/o error, 2 config error, 3 numerical or verification failure, 4 watchdog event.\n",
    "Environment: NSAB_OUT_DIR overrides the output directory unless --out is given."
))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`section.key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single worker thread, for reproducible runs.
    #[arg(long)]
    serial: bool,
    /// Seed of all random fields; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Ellipticity and covering checks of the boundary value problem.
    VerifyAdn(Common),
    /// Stationary solve with a built-in forcing.
    Solve(Common),
    /// Lowest eigenpairs of A and discrete Gårding constants.
    Eigs(Common),
    /// Time integration with energy monitors and snapshots.
    Evolve(Common),
    /// Evolution for a sequence of halved (alpha, beta).
    Sweep(Common),
    /// Growth of a small perturbation between two trajectories.
    ProbeUniqueness(Common),
    /// Manufactured-solution convergence study over wall-normal degrees.
    Convergence(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::VerifyAdn(c) => (Experiment::VerifyAdn, c),
        Command::Solve(c) => (Experiment::Solve, c),
        Command::Eigs(c) => (Experiment::Eigs, c),
        Command::Evolve(c) => (Experiment::Evolve, c),
        Command::Sweep(c) => (Experiment::Sweep, c),
        Command::ProbeUniqueness(c) => (Experiment::ProbeUniqueness, c),
        Command::Convergence(c) => (Experiment::Convergence, c),
    };
    let ov = Overrides { out: common.out, seed: common.seed, serial: common.serial };
    if ov.serial {
        rayon::ThreadPoolBuilder::new().num_threads(1).build_global().expect("thread pool not yet initialized");
    }
    let cfg = match load_config(&common.config, experiment, &ov) {
        Ok(c) => c,
        Err(e) => return fail(&e, ov.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))),
    };
    match run(&cfg, &ov) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("nsab: {e}");
            if matches!(e, RunError::Io(_)) {
                report_early_error(&e, Some(&resolve_out_dir(&cfg, &ov)));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn fail(e: &RunError, out: Option<PathBuf>) -> ExitCode {
    eprintln!("nsab: {e}");
    report_early_error(e, out.as_deref());
    ExitCode::from(e.exit_code() as u8)
}
