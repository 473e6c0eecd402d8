use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use gridopt_admm::{AdmmResult, Coordinator, IterationTrace, Routes, SocketTransport};
use gridopt_network::{parse_case, Network};
use gridopt_opf::{evaluate_balance, solve_opf, OpfSolution, Scope};
use gridopt_partition::partition;
use log::info;
use serde::Serialize;

use crate::manifest::{Mode, RunManifest, TransportKind};
use crate::CliError;

pub fn load_case(path: &Path) -> Result<Network, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let net = parse_case(&text).map_err(|source| CliError::Case { path: path.into(), source })?;
    net.validate().map_err(|source| CliError::Case { path: path.into(), source })?;
    Ok(net)
}

/// Relative optimality gap `(F − F_ref) / |F_ref|`.
pub fn gap(objective: f64, reference: f64) -> f64 {
    (objective - reference) / reference.abs().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub case: String,
    pub mode: Mode,
    pub converged: bool,
    pub objective: f64,
    pub iterations: usize,
    /// Consensus residual of the reported iterate (distributed only).
    pub residual: Option<f64>,
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    /// Largest nodal imbalance of the solution on the original network.
    pub max_balance: f64,
    pub central_objective: Option<f64>,
    pub gap: Option<f64>,
    pub runtime_s: f64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Central => "central",
            Mode::Distributed => "distributed",
        };
        writeln!(f, "case        {}", self.case)?;
        writeln!(f, "mode        {mode}")?;
        writeln!(f, "converged   {}", self.converged)?;
        writeln!(f, "objective   {:.6}", self.objective)?;
        writeln!(f, "iterations  {}", self.iterations)?;
        if let Some(r) = self.residual {
            writeln!(f, "residual    {r:.3e}")?;
        }
        writeln!(
            f,
            "kkt         stat {:.2e}  feas {:.2e}  compl {:.2e}",
            self.stationarity, self.feasibility, self.complementarity
        )?;
        writeln!(f, "balance     {:.3e}", self.max_balance)?;
        if let (Some(c), Some(g)) = (self.central_objective, self.gap) {
            writeln!(f, "central     {c:.6}")?;
            writeln!(f, "gap         {:.4}%", 100.0 * g)?;
        }
        write!(f, "runtime     {:.3} s", self.runtime_s)
    }
}

/// Result of one run before anything is written.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub network: Network,
    pub solution: OpfSolution,
    pub trace: Option<IterationTrace>,
    pub summary: Summary,
}

fn run_distributed(net: &Network, manifest: &RunManifest) -> Result<AdmmResult, CliError> {
    let part = partition(net)?;
    info!("{}", part.report());
    let config = manifest.admm.to_config();
    let coord = match manifest.transport {
        TransportKind::Inproc => Coordinator::new(&part, config)?,
        TransportKind::Socket => {
            let socket = SocketTransport::connect(Routes::from_partition(&part)).map_err(gridopt_admm::AdmmError::from)?;
            Coordinator::with_transport(&part, config, Box::new(socket))?
        }
    };
    Ok(coord.run()?)
}

/// Runs the solve described by `manifest` without writing files.
pub fn solve(manifest: &RunManifest) -> Result<SolveOutput, CliError> {
    manifest.validate()?;
    let net = load_case(&manifest.case)?;
    let opts = manifest.admm.to_config().solver;
    let started = Instant::now();
    let (solution, trace, converged, iterations, residual) = match manifest.mode {
        Mode::Central => {
            let (_, sol) = solve_opf(&net, Scope::All, &opts)?;
            let (c, it) = (sol.converged(), sol.iterations);
            (sol, None, c, it, None)
        }
        Mode::Distributed => {
            let r = run_distributed(&net, manifest)?;
            (r.solution, Some(r.trace), r.converged, r.iterations, Some(r.residual))
        }
    };
    let runtime_s = started.elapsed().as_secs_f64();
    let central_objective = if manifest.compare_central && manifest.mode == Mode::Distributed {
        let (_, c) = solve_opf(&net, Scope::All, &opts)?;
        if !c.converged() {
            return Err(CliError::Status(c.status));
        }
        Some(c.objective)
    } else {
        None
    };
    let summary = Summary {
        case: manifest.case.display().to_string(),
        mode: manifest.mode,
        converged,
        objective: solution.objective,
        iterations,
        residual,
        stationarity: solution.kkt.stationarity,
        feasibility: solution.kkt.feasibility,
        complementarity: solution.kkt.complementarity,
        max_balance: evaluate_balance(&net, &solution).max_abs(),
        central_objective,
        gap: central_objective.map(|c| gap(solution.objective, c)),
        runtime_s,
    };
    Ok(SolveOutput { network: net, solution, trace, summary })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|source| CliError::Write { path: path.into(), source })
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })
}

/// Writes manifest, solution, trace and summary into `dir`.
pub fn write_outputs(dir: &Path, manifest: &RunManifest, out: &SolveOutput) -> Result<(), CliError> {
    create_dir(dir)?;
    write_json(&dir.join("manifest.json"), manifest)?;
    write_json(&dir.join("solution.json"), &out.solution.document(&out.network))?;
    write_json(&dir.join("summary.json"), &out.summary)?;
    if let Some(trace) = &out.trace {
        let path = dir.join("trace.csv");
        let file = fs::File::create(&path).map_err(|source| CliError::Write { path: path.clone(), source })?;
        trace
            .write_csv(std::io::BufWriter::new(file))
            .map_err(|e| CliError::Write { path, source: std::io::Error::other(e) })?;
    }
    Ok(())
}

/// `solve` plus output files; a run without convergence still writes its
/// outputs before reporting the failure.
pub fn cmd_solve(manifest: &RunManifest) -> Result<Summary, CliError> {
    let out = solve(manifest)?;
    if let Some(dir) = &manifest.out {
        write_outputs(dir, manifest, &out)?;
    }
    if !out.summary.converged {
        return Err(match manifest.mode {
            Mode::Central => CliError::Status(out.solution.status),
            Mode::Distributed => CliError::NoConvergence {
                iterations: out.summary.iterations,
                residual: out.summary.residual.unwrap_or(f64::INFINITY),
            },
        });
    }
    Ok(out.summary)
}
