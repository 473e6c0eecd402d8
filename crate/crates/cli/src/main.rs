use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridopt_cli::{cmd_solve, cmd_sweep, format_table, AdmmParams, CliError, Mode, RunManifest, SweepManifest, TransportKind};

/// Centralized and distributed AC-DC optimal power flow.
///
/// Log verbosity follows the GRIDOPT_LOG environment variable
/// (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "gridopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case.
    Solve(SolveArgs),
    /// Distributed solves over a grid of initial penalties and ramp factors.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// Case file.
    #[arg(long)]
    case: PathBuf,
    /// Residual decrease required to keep a penalty.
    #[arg(long, default_value_t = 0.99)]
    theta: f64,
    /// Consensus tolerance.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Weight of voltage consensus rows.
    #[arg(long, default_value_t = 100.0)]
    w_voltage: f64,
    /// Weight of AC power consensus rows.
    #[arg(long, default_value_t = 1.0)]
    w_power_ac: f64,
    /// Weight of DC power consensus rows.
    #[arg(long, default_value_t = 10.0)]
    w_power_dc: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Output directory; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the manifest.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Mode::Central)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = TransportKind::Inproc)]
    transport: TransportKind,
    /// Initial penalty.
    #[arg(long, default_value_t = 100.0)]
    rho0: f64,
    /// Penalty ramp factor.
    #[arg(long, default_value_t = 1.1)]
    tau: f64,
    /// Also solve centrally and report the optimality gap.
    #[arg(long)]
    compare_central: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Initial penalties, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    rho0: Vec<f64>,
    /// Ramp factors, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1.02,1.05,1.1,1.2")]
    tau: Vec<f64>,
    /// Run grid cells concurrently.
    #[arg(long)]
    parallel: bool,
}

fn manifest(c: Common, mode: Mode, transport: TransportKind, rho0: f64, tau: f64, compare_central: bool) -> RunManifest {
    RunManifest {
        case: c.case,
        mode,
        transport,
        admm: AdmmParams {
            rho0,
            tau,
            theta: c.theta,
            eps: c.eps,
            w_voltage: c.w_voltage,
            w_power_ac: c.w_power_ac,
            w_power_dc: c.w_power_dc,
            max_iterations: c.max_iter,
        },
        compare_central,
        out: c.out,
        seed: c.seed,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => {
            let m = manifest(a.common, a.mode, a.transport, a.rho0, a.tau, a.compare_central);
            let summary = cmd_solve(&m)?;
            println!("{summary}");
        }
        Command::Sweep(a) => {
            let defaults = AdmmParams::default();
            let run = manifest(a.common, Mode::Distributed, TransportKind::Inproc, defaults.rho0, defaults.tau, true);
            let m = SweepManifest { run, rho0_grid: a.rho0, tau_grid: a.tau, parallel: a.parallel };
            let cells = cmd_sweep(&m)?;
            print!("{}", format_table(&cells));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("GRIDOPT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("error[{}]: {e}", class.as_str());
            ExitCode::from(class.exit_code() as u8)
        }
    }
}
