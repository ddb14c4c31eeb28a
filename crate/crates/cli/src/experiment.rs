//! Experiment orchestration: build the problem, validate parameters,
//! dispatch to the named solver, emit the trace and a summary line.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use proxsplit::distnet::{
    build_graph, graph_from_edges, ActivationSchedule, AgentGraph, DistPadmmSolver, DistState,
    GraphKind, PdapdsSolver, DIST_TRACE_HEADER,
};
use proxsplit::km::{CoordinateSampler, InertialSchedule, RunStatus, StopRule};
use proxsplit::linops::{IdentityMap, SparseMatrix, Vector, ZeroMap};
use proxsplit::minibatch::{
    split_lasso, split_problem, BatchedProblem, MinibatchPadmmSolver, MinibatchState, PsmpdsSolver,
    MINIBATCH_TRACE_HEADER,
};
use proxsplit::pd::{
    build_diag_preconditioner, CompositeProblem, CondatSolver, ForwardBackwardSolver, IadmmSolver,
    IpdsSolver, PrimalDualState, StepSizes, PD_TRACE_HEADER,
};
use proxsplit::prox::{L1Prox, LogisticLoss, QuadraticLoss, SmoothOracle, ZeroProx};
use proxsplit::trace::Trace;

use crate::config::{ExperimentConfig, KNOWN_ALGOS};
use crate::data::{load_libsvm, synth_lasso};
use crate::reference::reference_solve;
use crate::CliError;

#[derive(Debug)]
pub struct Summary {
    pub algo: String,
    pub status: RunStatus,
    pub iterations: u64,
    pub objective: f64,
    pub reference_objective: f64,
    pub gap: f64,
    pub consensus_error: Option<f64>,
    pub wall_seconds: f64,
    pub trace_path: Option<PathBuf>,
}

impl Summary {
    pub fn line(&self) -> String {
        let status = match self.status {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max-iters",
        };
        let consensus = self
            .consensus_error
            .map(|c| format!(" consensus={c:e}"))
            .unwrap_or_default();
        format!(
            "algo={} status={} iters={} objective={} reference={} gap={:e}{} seconds={:.3}",
            self.algo,
            status,
            self.iterations,
            self.objective,
            self.reference_objective,
            self.gap,
            consensus,
            self.wall_seconds
        )
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Converged => 0,
            RunStatus::MaxIters => 2,
        }
    }
}

/// The two benchmark problem shapes.
enum Loaded {
    Lasso {
        a: Arc<SparseMatrix>,
        b: Vector,
    },
    Logistic {
        a: Arc<SparseMatrix>,
        labels: Vec<f64>,
    },
}

impl Loaded {
    fn from_config(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        if let Some(path) = &cfg.data_path {
            let ds = load_libsvm(Path::new(path))?;
            return Ok(Loaded::Logistic {
                a: Arc::new(ds.a),
                labels: ds.labels,
            });
        }
        if let Some(sy) = &cfg.synth {
            let gen = synth_lasso(cfg.seed, sy.m, sy.q, sy.sparsity, sy.noise)?;
            return Ok(Loaded::Lasso {
                a: Arc::new(gen.a),
                b: gen.b,
            });
        }
        Err(CliError::Config(
            "choose a problem with --data <libsvm> or --synth m,q,k,noise".into(),
        ))
    }

    fn features(&self) -> usize {
        match self {
            Loaded::Lasso { a, .. } => proxsplit::linops::LinearMap::in_dim(a.as_ref()),
            Loaded::Logistic { a, .. } => proxsplit::linops::LinearMap::in_dim(a.as_ref()),
        }
    }

    fn smooth_oracle(&self) -> Result<Box<dyn SmoothOracle>, CliError> {
        match self {
            Loaded::Lasso { a, b } => Ok(Box::new(
                QuadraticLoss::new(a.clone(), b.clone())
                    .map_err(|e| CliError::Solver(e.to_string()))?,
            )),
            Loaded::Logistic { a, labels } => Ok(Box::new(
                LogisticLoss::new(a.clone(), labels.clone())
                    .map_err(|e| CliError::Solver(e.to_string()))?,
            )),
        }
    }
}

fn batched_with_lambda(loaded: &Loaded, lambda: f64, n: usize) -> Result<BatchedProblem, CliError> {
    match loaded {
        Loaded::Lasso { a, b } => {
            split_lasso(a.as_ref(), b, lambda, n).map_err(|e| CliError::Solver(e.to_string()))
        }
        Loaded::Logistic { a, labels } => split_problem(a.as_ref(), labels, lambda, n)
            .map_err(|e| CliError::Solver(e.to_string())),
    }
}

fn schedule_from(cfg: &ExperimentConfig) -> Result<InertialSchedule, CliError> {
    let rho_max = InertialSchedule::rho_upper_bound(cfg.alpha, cfg.theta, cfg.delta_hat);
    let rho = cfg.rho_frac * rho_max;
    InertialSchedule::validate(cfg.alpha, cfg.theta, cfg.delta_hat, rho)
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn parse_graph(cfg: &ExperimentConfig, n: usize) -> Result<AgentGraph, CliError> {
    match cfg.graph.as_str() {
        "ring" => build_graph(GraphKind::Ring, n).map_err(|e| CliError::Validation(e.to_string())),
        "path" => build_graph(GraphKind::Path, n).map_err(|e| CliError::Validation(e.to_string())),
        "complete" => {
            build_graph(GraphKind::Complete, n).map_err(|e| CliError::Validation(e.to_string()))
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read graph file {path}: {e}")))?;
            let mut edges = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut it = line.split_whitespace();
                let a: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                    CliError::Data(format!("{path}:{}: expected `n m`", lineno + 1))
                })?;
                let b: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                    CliError::Data(format!("{path}:{}: expected `n m`", lineno + 1))
                })?;
                if a == 0 || b == 0 {
                    return Err(CliError::Data(format!(
                        "{path}:{}: node ids are 1-based",
                        lineno + 1
                    )));
                }
                edges.push((a - 1, b - 1));
            }
            graph_from_edges(n, &edges).map_err(|e| CliError::Validation(e.to_string()))
        }
    }
}

/// Validate everything an experiment would use, without iterating.
pub fn validate_only(cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    let mut report = Vec::new();
    if !KNOWN_ALGOS.contains(&cfg.algo.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown algo `{}`; expected one of {}",
            cfg.algo,
            KNOWN_ALGOS.join(", ")
        )));
    }
    let loaded = Loaded::from_config(cfg)?;
    let q = loaded.features();
    report.push(format!("problem: {q} features"));
    let sched = schedule_from(cfg)?;
    report.push(format!(
        "schedule: alpha={} rho={} (cap {})",
        sched.alpha(),
        sched.rho(),
        InertialSchedule::rho_upper_bound(cfg.alpha, cfg.theta, cfg.delta_hat)
    ));
    match cfg.algo.as_str() {
        "fb" | "condat" | "ipds" | "iadmm" | "padmm" => {
            let f = loaded.smooth_oracle()?;
            let l = f.cocoercivity_diag().max_entry();
            report.push(format!("cocoercivity bound l = {l}"));
            if cfg.algo == "padmm" {
                let id = IdentityMap::new(q);
                let (t, psi) =
                    build_diag_preconditioner(&id, f.cocoercivity_diag(), cfg.gamma, cfg.r, cfg.s)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                let cert = proxsplit::pd::validate_step_sizes(
                    f.cocoercivity_diag(),
                    &id,
                    &StepSizes::AdmmDiagonal { t, psi },
                )
                .map_err(|e| CliError::Validation(e.to_string()))?;
                report.push(format!(
                    "preconditioner margins: positivity {:e}, coupling {:e}",
                    cert.positivity_margin, cert.coupling_margin
                ));
            }
        }
        "minibatch" | "psmpds" | "dist-padmm" | "pdapds" => {
            let bp = batched_with_lambda(&loaded, cfg.lambda, cfg.batches)?;
            let (t, psi) =
                proxsplit::minibatch::consensus_preconditioner(&bp, cfg.gamma, cfg.r, cfg.s)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            let cert = proxsplit::pd::validate_step_sizes(
                bp.cocoercivity_diag(),
                &IdentityMap::new(q),
                &StepSizes::AdmmDiagonal { t, psi },
            )
            .map_err(|e| CliError::Validation(e.to_string()))?;
            report.push(format!(
                "consensus preconditioner margins: positivity {:e}, coupling {:e}",
                cert.positivity_margin, cert.coupling_margin
            ));
            if matches!(cfg.algo.as_str(), "dist-padmm" | "pdapds") {
                let graph = parse_graph(cfg, cfg.batches)?;
                report.push(format!(
                    "graph: {} nodes, {} edges, degrees {:?}",
                    graph.num_nodes(),
                    graph.num_edges(),
                    graph.degrees()
                ));
            }
            let _ = CoordinateSampler::uniform_singletons(cfg.batches, cfg.seed);
        }
        _ => unreachable!(),
    }
    Ok(report)
}

/// Run one experiment end to end and return its summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    if !KNOWN_ALGOS.contains(&cfg.algo.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown algo `{}`; expected one of {}",
            cfg.algo,
            KNOWN_ALGOS.join(", ")
        )));
    }
    let loaded = Loaded::from_config(cfg)?;
    let q = loaded.features();
    let stop = StopRule {
        max_iters: cfg.max_iters,
        residual_tol: cfg.tol,
    };

    // independent yardstick for the gap column
    let ref_oracle = loaded.smooth_oracle()?;
    let reference = reference_solve(ref_oracle.as_ref(), cfg.lambda, 1e-12, 5_000_000)?;

    let started = Instant::now();
    let (status, iterations, objective, consensus, trace) = match cfg.algo.as_str() {
        "fb" | "condat" | "ipds" | "iadmm" | "padmm" => {
            let f = loaded.smooth_oracle()?;
            let l = f.cocoercivity_diag().max_entry();
            let e = f.cocoercivity_diag().clone();
            let g =
                Box::new(L1Prox::new(q, cfg.lambda).map_err(|e| CliError::Solver(e.to_string()))?);
            let needs_identity = matches!(cfg.algo.as_str(), "iadmm" | "padmm");
            let d: Box<dyn proxsplit::linops::LinearMap> = if needs_identity {
                Box::new(IdentityMap::new(q))
            } else {
                Box::new(ZeroMap::new(q, q))
            };
            let pb = CompositeProblem::new(f, g, Box::new(ZeroProx::new(q)), d)
                .map_err(|e| CliError::Solver(e.to_string()))?;
            let st0 = PrimalDualState::zeros(q, q);
            let mut trace = Trace::new(PD_TRACE_HEADER);
            let out = match cfg.algo.as_str() {
                "fb" => {
                    let solver = ForwardBackwardSolver::new(&pb, 1.0 / l)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    solver.solve(st0, stop, Some(&mut trace))
                }
                "condat" => {
                    let solver = CondatSolver::new(&pb, 1.0 / l, 1.0, 1.0)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    solver.solve(st0, stop, Some(&mut trace))
                }
                "ipds" => {
                    let sched = schedule_from(cfg)?;
                    let solver = IpdsSolver::new(
                        &pb,
                        StepSizes::PdScalar {
                            tau: 1.0 / l,
                            sigma: 1.0,
                        },
                        sched,
                    )
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                    solver.solve(st0, stop, Some(&mut trace))
                }
                "iadmm" => {
                    let sched = schedule_from(cfg)?;
                    let solver = IadmmSolver::new(
                        &pb,
                        StepSizes::AdmmScalar {
                            tau: 1.0 / l,
                            mu: 10.0 / l,
                        },
                        sched,
                    )
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                    solver.solve(st0, stop, Some(&mut trace))
                }
                "padmm" => {
                    let sched = schedule_from(cfg)?;
                    let id = IdentityMap::new(q);
                    let (t, psi) = build_diag_preconditioner(&id, &e, cfg.gamma, cfg.r, cfg.s)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    let solver = IadmmSolver::new(&pb, StepSizes::AdmmDiagonal { t, psi }, sched)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    solver.solve(st0, stop, Some(&mut trace))
                }
                _ => unreachable!(),
            };
            (out.status, out.iterations, out.objective, None, trace)
        }
        "minibatch" | "psmpds" => {
            let bp = batched_with_lambda(&loaded, cfg.lambda, cfg.batches)?;
            let (t, psi) =
                proxsplit::minibatch::consensus_preconditioner(&bp, cfg.gamma, cfg.r, cfg.s)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            let sched = schedule_from(cfg)?;
            let st0 = MinibatchState::zeros(cfg.batches, q);
            let mut trace = Trace::new(MINIBATCH_TRACE_HEADER);
            let out = if cfg.algo == "minibatch" {
                let solver = MinibatchPadmmSolver::new(&bp, t, psi, sched)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                solver
                    .solve(st0, stop, Some(&mut trace))
                    .map_err(|e| CliError::Solver(e.to_string()))?
            } else {
                let solver = PsmpdsSolver::new(&bp, t, psi, sched)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                let mut sampler = CoordinateSampler::uniform_singletons(cfg.batches, cfg.seed);
                solver
                    .solve(&mut sampler, st0, stop, Some(&mut trace))
                    .map_err(|e| CliError::Solver(e.to_string()))?
            };
            (
                out.status,
                out.iterations,
                out.objective_at_mean,
                Some(out.consensus_error),
                trace,
            )
        }
        "dist-padmm" | "pdapds" => {
            let bp = batched_with_lambda(&loaded, cfg.lambda, cfg.batches)?;
            let graph = parse_graph(cfg, cfg.batches)?;
            let (t, psi) =
                proxsplit::minibatch::consensus_preconditioner(&bp, cfg.gamma, cfg.r, cfg.s)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            let sched = schedule_from(cfg)?;
            let st0 = DistState::zeros(&graph, q);
            let mut trace = Trace::new(DIST_TRACE_HEADER);
            let out = if cfg.algo == "dist-padmm" {
                let solver = DistPadmmSolver::new(&bp, &graph, t, psi, sched)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                solver
                    .solve(st0, stop, Some(&mut trace))
                    .map_err(|e| CliError::Solver(e.to_string()))?
            } else {
                let solver = PdapdsSolver::new(&bp, &graph, t, psi, sched)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                let mut activation =
                    ActivationSchedule::uniform_singletons(graph.num_nodes(), cfg.seed);
                solver
                    .solve(&mut activation, st0, stop, Some(&mut trace))
                    .map_err(|e| CliError::Solver(e.to_string()))?
            };
            (
                out.status,
                out.iterations,
                out.objective_at_mean,
                Some(out.consensus_error),
                trace,
            )
        }
        _ => unreachable!(),
    };
    let wall_seconds = started.elapsed().as_secs_f64();

    let trace_path = if let Some(out_path) = &cfg.out {
        let p = PathBuf::from(out_path);
        trace
            .write_to(&p)
            .map_err(|e| CliError::Data(format!("cannot write trace: {e}")))?;
        Some(p)
    } else {
        None
    };

    Ok(Summary {
        algo: cfg.algo.clone(),
        status,
        iterations,
        objective,
        reference_objective: reference.objective,
        gap: (objective - reference.objective).abs(),
        consensus_error: consensus,
        wall_seconds,
        trace_path,
    })
}
