use std::time::Instant;

use gridopt_nlp::{solve, solve_warm, NlpSolution, SolverOptions};
use gridopt_opf::OpfSolution;
use gridopt_partition::{CouplingClass, CouplingKind, Partition, RegionalProblem};
use log::{debug, info, warn};

use crate::augmented::{AugmentedProblem, CoupledProblem};
use crate::message::Message;
use crate::trace::{IterationRecord, IterationTrace};
use crate::transport::{InProcTransport, Routes, Transport};
use crate::update::{local_residual, pair_mismatch, penalty_must_grow, update_duals, update_z};
use crate::{AdmmConfig, AdmmError};

/// Per-region algorithm state, in local row order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionState {
    /// Boundary values of the latest solve (`∞` before the first).
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rho: f64,
    /// Number of penalty increases so far: `ρ = ρ0 τ^m`.
    pub penalty_steps: u32,
    pub gamma: f64,
}

impl RegionState {
    /// Initial guesses: flat voltages, zero interchange, zero duals.
    pub fn initial(rp: &RegionalProblem, rho0: f64) -> Self {
        let z = rp
            .rows
            .iter()
            .map(|r| match r.kind {
                CouplingKind::Vmag | CouplingKind::Vdc => 1.0,
                _ => 0.0,
            })
            .collect();
        Self {
            x: vec![f64::INFINITY; rp.rows.len()],
            z,
            lambda: vec![0.0; rp.rows.len()],
            rho: rho0,
            penalty_steps: 0,
            gamma: f64::INFINITY,
        }
    }
}

/// Owns one region's subproblem and state.
#[derive(Debug, Clone)]
pub struct RegionWorker<'a> {
    pub problem: &'a RegionalProblem,
    pub state: RegionState,
    variables: Vec<usize>,
    weights: Vec<f64>,
    last: Option<NlpSolution>,
}

impl<'a> RegionWorker<'a> {
    pub fn new(problem: &'a RegionalProblem, config: &AdmmConfig) -> Self {
        Self {
            problem,
            state: RegionState::initial(problem, config.rho0),
            variables: problem.boundary(),
            weights: problem.rows.iter().map(|r| config.weights.of(r.kind)).collect(),
            last: None,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn augmented(&self) -> Result<AugmentedProblem<'_, gridopt_opf::OpfProblem>, AdmmError> {
        AugmentedProblem::new(
            &self.problem.problem,
            &self.variables,
            &self.state.lambda,
            &self.state.z,
            &self.weights,
            self.state.rho,
        )
    }

    /// Solves the augmented subproblem, warm-started from the previous
    /// solution; falls back to a cold start once.
    pub fn solve(&mut self, opts: &SolverOptions) -> Result<&NlpSolution, AdmmError> {
        let region = self.problem.region;
        let aug = self.augmented()?;
        let mut result = match &self.last {
            Some(prev) => solve_warm(&aug, opts, Some(prev)),
            None => solve(&aug, opts),
        };
        let retry = match &result {
            Ok(s) => !s.converged() && self.last.is_some(),
            Err(_) => self.last.is_some(),
        };
        if retry {
            debug!("region {region}: warm start failed, retrying cold");
            result = solve(&aug, opts);
        }
        let sol = result.map_err(|source| AdmmError::RegionSolver { region, source })?;
        if !sol.converged() {
            return Err(AdmmError::RegionFailed { region, status: sol.status });
        }
        self.state.x = self.variables.iter().map(|&v| sol.x[v]).collect();
        self.last = Some(sol);
        Ok(self.last.as_ref().expect("just stored"))
    }

    pub fn last_solution(&self) -> Option<&NlpSolution> {
        self.last.as_ref()
    }

    /// Outgoing messages: one per tie and class, rows in local order.
    pub fn messages(&self, iteration: u64) -> Vec<Message> {
        let mut out: Vec<Message> = Vec::new();
        for (r, row) in self.problem.rows.iter().enumerate() {
            let tie = row.tie as u32;
            let class = row.class();
            match out.iter_mut().find(|m| m.tie == tie && m.class == class) {
                Some(m) => m.values.push(self.state.x[r]),
                None => out.push(Message {
                    iteration,
                    sender: self.problem.region,
                    tie,
                    class,
                    values: vec![self.state.x[r]],
                }),
            }
        }
        out
    }

    /// `(tie, class)` groups of local rows, in row order.
    fn groups(&self) -> Vec<(u32, CouplingClass, Vec<usize>)> {
        let mut groups: Vec<(u32, CouplingClass, Vec<usize>)> = Vec::new();
        for (r, row) in self.problem.rows.iter().enumerate() {
            let key = (row.tie as u32, row.class());
            match groups.iter_mut().find(|g| (g.0, g.1) == key) {
                Some(g) => g.2.push(r),
                None => groups.push((key.0, key.1, vec![r])),
            }
        }
        groups
    }

    /// Consensus targets from own and received messages.
    pub fn update_targets(&mut self, iteration: u64, own: &[Message], inbox: &[Message]) -> Result<(), AdmmError> {
        for (tie, class, rows) in self.groups() {
            let find = |ms: &[Message]| ms.iter().find(|m| m.tie == tie && m.class == class).cloned();
            let mine = find(own).ok_or(AdmmError::MissingMessage { region: self.problem.region, tie })?;
            let theirs = find(inbox).ok_or(AdmmError::MissingMessage { region: self.problem.region, tie })?;
            let z = update_z(iteration, &mine, &theirs)?;
            if z.len() != rows.len() {
                return Err(AdmmError::MessageMismatch { tie });
            }
            for (r, v) in rows.into_iter().zip(z) {
                self.state.z[r] = v;
            }
        }
        Ok(())
    }

    /// Dual and penalty steps; returns `Γ⁺`.
    pub fn update_multipliers(&mut self, config: &AdmmConfig) -> f64 {
        let st = &mut self.state;
        update_duals(&mut st.lambda, st.rho, &self.weights, &st.x, &st.z);
        let gamma = local_residual(&st.x, &st.z);
        if penalty_must_grow(config.theta, st.gamma, gamma) {
            st.penalty_steps += 1;
            st.rho = config.penalty(st.penalty_steps);
        }
        st.gamma = gamma;
        gamma
    }
}

/// Residual `max |pair mismatch|` computed from messages alone.
pub fn message_residual(outgoing: &[Message], routes: &Routes) -> f64 {
    let mut worst = 0.0f64;
    for m in outgoing {
        let (a, _) = routes.ties[m.tie as usize];
        if m.sender != a {
            continue;
        }
        if let Some(n) = outgoing.iter().find(|n| n.tie == m.tie && n.class == m.class && n.sender != a) {
            for (x, y) in m.values.iter().zip(&n.values) {
                worst = worst.max(pair_mismatch(m.class, *x, *y).abs());
            }
        }
    }
    worst
}

/// What one call to [`Coordinator::step`] produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub iteration: u64,
    pub residual: f64,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct AdmmResult {
    /// Merged solution on the original network, from the iterate with the
    /// lowest residual.
    pub solution: OpfSolution,
    /// Regional solutions of that iterate.
    pub regional: Vec<OpfSolution>,
    pub trace: IterationTrace,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Runs the iterations over a transport.
pub struct Coordinator<'a> {
    partition: &'a Partition,
    config: AdmmConfig,
    workers: Vec<RegionWorker<'a>>,
    transport: Box<dyn Transport + 'a>,
    routes: Routes,
    iteration: u64,
    trace: IterationTrace,
    best: Option<(f64, Vec<OpfSolution>)>,
}

impl<'a> Coordinator<'a> {
    pub fn new(partition: &'a Partition, config: AdmmConfig) -> Result<Self, AdmmError> {
        let routes = Routes::from_partition(partition);
        Self::with_transport(partition, config, Box::new(InProcTransport::new(routes)))
    }

    pub fn with_transport(
        partition: &'a Partition,
        config: AdmmConfig,
        transport: Box<dyn Transport + 'a>,
    ) -> Result<Self, AdmmError> {
        config.validate()?;
        let workers = partition.regions.iter().map(|rp| RegionWorker::new(rp, &config)).collect();
        Ok(Self {
            partition,
            routes: Routes::from_partition(partition),
            trace: IterationTrace::new(partition.regions.iter().map(|r| r.region).collect()),
            config,
            workers,
            transport,
            iteration: 0,
            best: None,
        })
    }

    pub fn config(&self) -> &AdmmConfig {
        &self.config
    }

    pub fn workers(&self) -> &[RegionWorker<'a>] {
        &self.workers
    }

    pub fn trace(&self) -> &IterationTrace {
        &self.trace
    }

    /// Replaces the targets and duals of region position `k`.
    pub fn set_state(&mut self, k: usize, z: Vec<f64>, lambda: Vec<f64>) -> Result<(), AdmmError> {
        let st = &mut self.workers[k].state;
        if z.len() != st.z.len() || lambda.len() != st.lambda.len() {
            return Err(AdmmError::Dimension(format!("region position {k} has {} coupling rows", st.z.len())));
        }
        st.z = z;
        st.lambda = lambda;
        Ok(())
    }

    /// Seeds every region with targets and duals that make a centralized
    /// optimum a fixed point: targets are the split boundary values, duals
    /// the consensus multipliers of the coupled problem solved from there.
    pub fn seed_from_central(&mut self, central: &OpfSolution) -> Result<(), AdmmError> {
        let xs = self.partition.split_points(central);
        let coupled = CoupledProblem::new(self.partition).starting_from(&xs);
        let sol = solve(&coupled, &self.config.solver)
            .map_err(|source| AdmmError::CoupledSolver { source })?;
        if !sol.converged() {
            return Err(AdmmError::CoupledFailed { status: sol.status });
        }
        let y = &sol.eq_multipliers[coupled.consensus_offset()..];
        for (k, x) in xs.iter().enumerate() {
            let rows = &self.partition.regions[k].rows;
            let targets = rows.iter().map(|r| x[r.variable]).collect();
            let lambda = rows.iter().map(|r| r.coefficient * y[r.row]).collect();
            self.set_state(k, targets, lambda)?;
        }
        Ok(())
    }

    /// One iteration: solve, broadcast, update targets, duals and penalties.
    pub fn step(&mut self) -> Result<StepOutcome, AdmmError> {
        self.iteration += 1;
        let it = self.iteration;
        let t0 = Instant::now();
        let opts = self.config.solver.clone();
        let results: Vec<Result<(), AdmmError>> = if self.config.parallel && self.workers.len() > 1 {
            std::thread::scope(|s| {
                let handles: Vec<_> = self
                    .workers
                    .iter_mut()
                    .map(|w| {
                        let opts = &opts;
                        s.spawn(move || w.solve(opts).map(|_| ()))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("region worker panicked")).collect()
            })
        } else {
            self.workers.iter_mut().map(|w| w.solve(&opts).map(|_| ())).collect()
        };
        for r in results {
            if let Err(e) = r {
                let _ = self.transport.finish(false);
                return Err(e);
            }
        }
        let solve_time = t0.elapsed();

        let t1 = Instant::now();
        let own: Vec<Vec<Message>> = self.workers.iter().map(|w| w.messages(it)).collect();
        let outgoing: Vec<Message> = own.iter().flatten().cloned().collect();
        let inboxes = match self.transport.exchange(it, outgoing) {
            Ok(i) => i,
            Err(e) => {
                let _ = self.transport.finish(false);
                return Err(e.into());
            }
        };
        let exchange_time = t1.elapsed();

        let t2 = Instant::now();
        let xs: Vec<Vec<f64>> = self.workers.iter().map(|w| w.last_solution().expect("solved").x.clone()).collect();
        let residual = self.partition.max_residual(&xs);
        let objective: f64 = self
            .workers
            .iter()
            .zip(&xs)
            .map(|(w, x)| w.problem.problem.cost(x))
            .sum();
        for (k, w) in self.workers.iter_mut().enumerate() {
            w.update_targets(it, &own[k], &inboxes[k])?;
            w.update_multipliers(&self.config);
        }
        let update_time = t2.elapsed();

        if self.best.as_ref().map_or(true, |(r, _)| residual < *r) {
            let sols = self
                .workers
                .iter()
                .map(|w| OpfSolution::from_nlp(&w.problem.problem, w.last_solution().expect("solved")))
                .collect();
            self.best = Some((residual, sols));
        }
        self.trace.push(IterationRecord {
            iteration: it,
            residual,
            objective,
            rho: self.workers.iter().map(|w| w.state.rho).collect(),
            gamma: self.workers.iter().map(|w| w.state.gamma).collect(),
            solve_time,
            exchange_time,
            update_time,
        });
        info!("iteration {it:4}: residual {residual:.3e}, objective {objective:.6}");
        Ok(StepOutcome { iteration: it, residual, objective, converged: residual <= self.config.eps })
    }

    /// Messages of the latest solves, for auditing.
    pub fn current_messages(&self) -> Vec<Message> {
        self.workers.iter().flat_map(|w| w.messages(self.iteration)).collect()
    }

    pub fn routes(&self) -> &Routes {
        &self.routes
    }

    /// Iterates until the residual drops to `ε` or the iteration limit.
    pub fn run(mut self) -> Result<AdmmResult, AdmmError> {
        let mut converged = false;
        while (self.iteration as usize) < self.config.max_iterations {
            if self.step()?.converged {
                converged = true;
                break;
            }
        }
        self.transport.finish(converged)?;
        if !converged {
            warn!("no consensus after {} iterations", self.iteration);
        }
        let (residual, regional) = self.best.take().expect("at least one iteration");
        let tolerance = if converged { self.config.eps } else { f64::INFINITY };
        let solution = self.partition.reconstruct(&regional, tolerance)?;
        Ok(AdmmResult {
            solution,
            regional,
            trace: self.trace,
            converged,
            iterations: self.iteration as usize,
            residual,
        })
    }
}

/// Partitioned solve over the in-process transport.
pub fn run(partition: &Partition, config: AdmmConfig) -> Result<AdmmResult, AdmmError> {
    Coordinator::new(partition, config)?.run()
}
