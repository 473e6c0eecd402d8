use gridopt_admm::run;
use gridopt_network::Network;
use gridopt_opf::{solve_opf, Scope};
use gridopt_partition::{partition, Partition};
use serde::Serialize;

use crate::manifest::{AdmmParams, RunManifest};
use crate::solve::{create_dir, gap, load_case, write_json};
use crate::CliError;

/// Outcome of one `(ρ0, τ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub rho0: f64,
    pub tau: f64,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepManifest {
    pub run: RunManifest,
    pub rho0_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub parallel: bool,
}

fn run_cell(part: &Partition, base: &AdmmParams, central: f64, rho0: f64, tau: f64) -> SweepCell {
    let params = AdmmParams { rho0, tau, ..*base };
    let mut cell = SweepCell {
        rho0,
        tau,
        converged: false,
        iterations: None,
        residual: None,
        objective: None,
        gap: None,
        error: None,
    };
    let config = params.to_config();
    if let Err(e) = config.validate() {
        cell.error = Some(format!("config: {e}"));
        return cell;
    }
    match run(part, config) {
        Ok(r) => {
            cell.converged = r.converged;
            cell.iterations = Some(r.iterations);
            cell.residual = Some(r.residual);
            cell.objective = Some(r.solution.objective);
            cell.gap = Some(gap(r.solution.objective, central));
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

/// Distributed solves over the `(ρ0, τ)` grid, ρ0-major. Cell failures are
/// recorded in the cell; the sweep continues.
pub fn sweep(net: &Network, base: &AdmmParams, rho0s: &[f64], taus: &[f64], parallel: bool) -> Result<Vec<SweepCell>, CliError> {
    if rho0s.is_empty() || taus.is_empty() {
        return Err(CliError::Config("sweep grids must not be empty".into()));
    }
    let opts = base.to_config().solver;
    let (_, central) = solve_opf(net, Scope::All, &opts)?;
    if !central.converged() {
        return Err(CliError::Status(central.status));
    }
    let part = partition(net)?;
    let grid: Vec<(f64, f64)> = rho0s.iter().flat_map(|&r| taus.iter().map(move |&t| (r, t))).collect();
    let cells = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = grid
                .iter()
                .map(|&(r, t)| {
                    let part = &part;
                    s.spawn(move || run_cell(part, base, central.objective, r, t))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sweep cell panicked")).collect()
        })
    } else {
        grid.iter().map(|&(r, t)| run_cell(&part, base, central.objective, r, t)).collect()
    };
    Ok(cells)
}

pub fn write_sweep_csv<W: std::io::Write>(cells: &[SweepCell], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho0", "tau", "converged", "iterations", "residual", "objective", "gap", "error"])?;
    let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
    for c in cells {
        w.write_record([
            format!("{:e}", c.rho0),
            format!("{:e}", c.tau),
            c.converged.to_string(),
            c.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(c.residual),
            opt(c.objective),
            opt(c.gap),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep(manifest: &SweepManifest) -> Result<Vec<SweepCell>, CliError> {
    let net = load_case(&manifest.run.case)?;
    let cells = sweep(&net, &manifest.run.admm, &manifest.rho0_grid, &manifest.tau_grid, manifest.parallel)?;
    if let Some(dir) = &manifest.run.out {
        create_dir(dir)?;
        write_json(&dir.join("manifest.json"), manifest)?;
        let path = dir.join("sweep.csv");
        let file = std::fs::File::create(&path).map_err(|source| CliError::Write { path: path.clone(), source })?;
        write_sweep_csv(&cells, file).map_err(|e| CliError::Write { path, source: std::io::Error::other(e) })?;
    }
    Ok(cells)
}

/// Fixed-width table for the terminal.
pub fn format_table(cells: &[SweepCell]) -> String {
    let mut s = format!("{:>10} {:>6} {:>6} {:>11} {:>10}\n", "rho0", "tau", "iters", "gap", "residual");
    for c in cells {
        match &c.error {
            Some(e) => s.push_str(&format!("{:>10} {:>6} error: {e}\n", c.rho0, c.tau)),
            None => s.push_str(&format!(
                "{:>10} {:>6} {:>6} {:>10.4}% {:>10.2e}{}\n",
                c.rho0,
                c.tau,
                c.iterations.unwrap_or(0),
                100.0 * c.gap.unwrap_or(f64::NAN),
                c.residual.unwrap_or(f64::NAN),
                if c.converged { "" } else { "  (no consensus)" }
            )),
        }
    }
    s
}
