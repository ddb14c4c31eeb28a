//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured margins. Run with `--nocapture` to see the lines.
//!
//! Shared benchmark instances: a seed-fixed synthetic least-squares
//! problem (m=50, q=20, lambda=0.1) and a synthetic logistic problem
//! (m=200, q=50, lambda=0.01).

use std::sync::Arc;

use proxsplit::distnet::{
    build_graph, ActivationSchedule, DistPadmmSolver, DistState, GraphKind, PdapdsSolver,
};
use proxsplit::km::{
    km_step, run, validate_schedule, BlockOperator, BlockPoint, CoordinateSampler,
    InertialSchedule, KMState, RunStatus, StopRule,
};
use proxsplit::linops::{
    BlockVector, DiagonalMap, IdentityMap, LinearMap, SparseMatrix, Vector, ZeroMap,
};
use proxsplit::minibatch::{
    consensus_preconditioner, operator_averagedness, split_lasso, split_problem, BatchedProblem,
    MinibatchPadmmSolver, MinibatchState, PsmpdsSolver,
};
use proxsplit::pd::{
    build_diag_preconditioner, CompositeProblem, CondatSolver, ForwardBackwardSolver, IadmmSolver,
    IpdsSolver, PrimalDualState, StepSizes,
};
use proxsplit::prox::{
    logistic_oracle, L1Prox, LogisticLoss, ProxOracle, QuadraticLoss, SmoothOracle, ZeroProx,
};
use proxsplit_cli::data::{synth_lasso, synth_logistic};
use proxsplit_cli::reference::reference_solve;
use proxsplit_testkit::{central_diff_grad, DenseMatrix, ProbeRng};

const LASSO_SEED: u64 = 7;
const LASSO_LAMBDA: f64 = 0.1;
const LOGISTIC_SEED: u64 = 11;
const LOGISTIC_LAMBDA: f64 = 0.01;

struct Bench {
    a: Arc<SparseMatrix>,
    lambda: f64,
    /// least squares target (empty for logistic)
    b: Option<Vector>,
    labels: Option<Vec<f64>>,
    name: &'static str,
}

impl Bench {
    fn lasso() -> Bench {
        let gen = synth_lasso(LASSO_SEED, 50, 20, 5, 0.05).unwrap();
        Bench {
            a: Arc::new(gen.a),
            lambda: LASSO_LAMBDA,
            b: Some(gen.b),
            labels: None,
            name: "lasso(m=50,q=20)",
        }
    }

    fn logistic() -> Bench {
        let ds = synth_logistic(LOGISTIC_SEED, 200, 50).unwrap();
        Bench {
            a: Arc::new(ds.a),
            lambda: LOGISTIC_LAMBDA,
            b: None,
            labels: Some(ds.labels),
            name: "logistic(m=200,q=50)",
        }
    }

    fn q(&self) -> usize {
        self.a.in_dim()
    }

    fn smooth(&self) -> Box<dyn SmoothOracle> {
        match (&self.b, &self.labels) {
            (Some(b), None) => Box::new(QuadraticLoss::new(self.a.clone(), b.clone()).unwrap()),
            (None, Some(labels)) => {
                Box::new(LogisticLoss::new(self.a.clone(), labels.clone()).unwrap())
            }
            _ => unreachable!(),
        }
    }

    fn composite(&self, identity_coupling: bool) -> CompositeProblem {
        let q = self.q();
        let d: Box<dyn LinearMap> = if identity_coupling {
            Box::new(IdentityMap::new(q))
        } else {
            Box::new(ZeroMap::new(q, q))
        };
        CompositeProblem::new(
            self.smooth(),
            Box::new(L1Prox::new(q, self.lambda).unwrap()),
            Box::new(ZeroProx::new(q)),
            d,
        )
        .unwrap()
    }

    fn batched(&self, n: usize) -> BatchedProblem {
        match (&self.b, &self.labels) {
            (Some(b), None) => split_lasso(self.a.as_ref(), b, self.lambda, n).unwrap(),
            (None, Some(labels)) => split_problem(self.a.as_ref(), labels, self.lambda, n).unwrap(),
            _ => unreachable!(),
        }
    }

    fn reference_objective(&self) -> f64 {
        let f = self.smooth();
        reference_solve(f.as_ref(), self.lambda, 1e-12, 5_000_000)
            .unwrap()
            .objective
    }
}

fn default_sched() -> InertialSchedule {
    let rho = 0.9 * InertialSchedule::rho_upper_bound(0.3, 0.01, 1.0);
    validate_schedule(0.3, 0.01, 1.0, rho).unwrap()
}

const STOP: StopRule = StopRule {
    max_iters: 400_000,
    residual_tol: 1e-11,
};

#[test]
fn criterion_1_reduction_identities() {
    let bench = Bench::lasso();
    let q = bench.q();

    // ipds with alpha = 0 tracks the baseline iteration bit for bit
    let pb = bench.composite(false);
    let l = pb.lipschitz_scalar();
    let rho = 0.9;
    let condat = CondatSolver::new(&pb, 1.0 / l, 1.0, rho).unwrap();
    let ipds = IpdsSolver::new(
        &pb,
        StepSizes::PdScalar {
            tau: 1.0 / l,
            sigma: 1.0,
        },
        InertialSchedule::unvalidated(0.0, rho),
    )
    .unwrap();
    let mut a = PrimalDualState::zeros(q, q);
    let mut b = PrimalDualState::zeros(q, q);
    for _ in 0..100 {
        a = condat.step(&a);
        b = ipds.step(&b);
        assert_eq!(a.x_curr, b.x_curr, "ipds(alpha=0) != condat");
        assert_eq!(a.y_curr, b.y_curr);
    }

    // iadmm with alpha = 0, h = 0, D = I tracks forward-backward
    let pb_id = bench.composite(true);
    let iadmm = IadmmSolver::new(
        &pb_id,
        StepSizes::AdmmScalar {
            tau: 1.0 / l,
            mu: 10.0 / l,
        },
        InertialSchedule::unvalidated(0.0, 1.0),
    )
    .unwrap();
    let fb = ForwardBackwardSolver::new(&pb_id, 1.0 / l).unwrap();
    let mut a = PrimalDualState::zeros(q, q);
    let mut b = PrimalDualState::zeros(q, q);
    for _ in 0..100 {
        a = iadmm.step(&a);
        b = fb.step(&b);
        assert_eq!(a.x_curr, b.x_curr, "iadmm(alpha=0,h=0,D=I) != fb");
    }

    // asynchronous solver under full activation tracks the synchronous one
    let n = 5;
    let bp = bench.batched(n);
    let graph = build_graph(GraphKind::Ring, n).unwrap();
    let (t, psi) = consensus_preconditioner(&bp, 1.9, 1.0, 1.0).unwrap();
    let sched = default_sched();
    let sync = DistPadmmSolver::new(&bp, &graph, t.clone(), psi.clone(), sched).unwrap();
    let asynch = PdapdsSolver::new(&bp, &graph, t.clone(), psi.clone(), sched).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let mut a = DistState::zeros(&graph, q);
    let mut b = DistState::zeros(&graph, q);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        a = sync.step(&a).unwrap();
        b = asynch.step_with_active(&b, &all);
        let dx = a.x_curr.sub(&b.x_curr).norm_sq().sqrt();
        worst = worst.max(dx);
        assert!(dx <= 1e-12, "pdapds(full) vs dist-padmm drift {dx}");
    }

    // one full stochastic sweep from a zero mean dual equals one
    // synchronous minibatch step exactly
    let bp4 = bench.batched(4);
    let (t4, psi4) = consensus_preconditioner(&bp4, 1.9, 1.0, 1.0).unwrap();
    let sync_mb = MinibatchPadmmSolver::new(&bp4, t4.clone(), psi4.clone(), sched).unwrap();
    let stoch_mb = PsmpdsSolver::new(&bp4, t4, psi4, sched).unwrap();
    let mut st = MinibatchState::zeros(4, q);
    st.x_curr = BlockVector::replicate(4, Vector::from_slice(&vec![0.25; q]));
    st.x_prev = st.x_curr.clone();
    let a = sync_mb.step(&st).unwrap();
    let b = stoch_mb.step_with_active(&st, &[0, 1, 2, 3]);
    assert_eq!(a.x_curr, b.x_curr, "psmpds full sweep != minibatch step");
    assert_eq!(a.y_curr, b.y_curr);

    println!(
        "criterion 1 (reduction identities): PASS — exact/<=1e-12 per-iterate agreement \
         (worst distributed drift {worst:.2e})"
    );
}

struct Criterion2Outcome {
    name: String,
    gap: f64,
    tolerance: f64,
    consensus: Option<f64>,
}

fn criterion_2_runs(bench: &Bench) -> Vec<Criterion2Outcome> {
    let q = bench.q();
    let reference = bench.reference_objective();
    let sched = default_sched();
    let mut outcomes = Vec::new();
    let mut record = |name: String, objective: f64, tolerance: f64, consensus: Option<f64>| {
        outcomes.push(Criterion2Outcome {
            name,
            gap: (objective - reference).abs(),
            tolerance,
            consensus,
        });
    };

    let pb = bench.composite(false);
    let l = pb.lipschitz_scalar();

    let condat = CondatSolver::new(&pb, 1.0 / l, 1.0, 1.0).unwrap();
    let out = condat.solve(PrimalDualState::zeros(q, q), STOP, None);
    assert_eq!(out.status, RunStatus::Converged, "condat did not converge");
    record("condat".into(), out.objective, 1e-6, None);

    let ipds = IpdsSolver::new(
        &pb,
        StepSizes::PdScalar {
            tau: 1.0 / l,
            sigma: 1.0,
        },
        sched,
    )
    .unwrap();
    let out = ipds.solve(PrimalDualState::zeros(q, q), STOP, None);
    assert_eq!(out.status, RunStatus::Converged, "ipds did not converge");
    record("ipds".into(), out.objective, 1e-6, None);

    let pb_id = bench.composite(true);
    let iadmm = IadmmSolver::new(
        &pb_id,
        StepSizes::AdmmScalar {
            tau: 1.0 / l,
            mu: 10.0 / l,
        },
        sched,
    )
    .unwrap();
    let out = iadmm.solve(PrimalDualState::zeros(q, q), STOP, None);
    assert_eq!(out.status, RunStatus::Converged, "iadmm did not converge");
    record("iadmm".into(), out.objective, 1e-6, None);

    let e = pb_id.f.cocoercivity_diag().clone();
    let (t, psi) = build_diag_preconditioner(&IdentityMap::new(q), &e, 1.9, 1.0, 1.0).unwrap();
    let padmm = IadmmSolver::new(&pb_id, StepSizes::AdmmDiagonal { t, psi }, sched).unwrap();
    let out = padmm.solve(PrimalDualState::zeros(q, q), STOP, None);
    assert_eq!(out.status, RunStatus::Converged, "padmm did not converge");
    record("padmm".into(), out.objective, 1e-6, None);

    let bp = bench.batched(4);
    let (t, psi) = consensus_preconditioner(&bp, 1.9, 1.0, 1.0).unwrap();
    let mb = MinibatchPadmmSolver::new(&bp, t.clone(), psi.clone(), sched).unwrap();
    let out = mb.solve(MinibatchState::zeros(4, q), STOP, None).unwrap();
    assert_eq!(
        out.status,
        RunStatus::Converged,
        "minibatch did not converge"
    );
    record(
        "minibatch(N=4)".into(),
        out.objective_at_mean,
        1e-6,
        Some(out.consensus_error),
    );

    let stoch = PsmpdsSolver::new(&bp, t, psi, sched).unwrap();
    for seed in 0..5u64 {
        let mut sampler = CoordinateSampler::uniform_singletons(4, seed);
        let out = stoch
            .solve(&mut sampler, MinibatchState::zeros(4, q), STOP, None)
            .unwrap();
        assert_eq!(
            out.status,
            RunStatus::Converged,
            "psmpds seed {seed} did not converge"
        );
        record(
            format!("psmpds(N=4,seed={seed})"),
            out.objective_at_mean,
            1e-4,
            Some(out.consensus_error),
        );
    }

    let n = 5;
    let bp5 = bench.batched(n);
    let graph = build_graph(GraphKind::Ring, n).unwrap();
    let (t5, psi5) = consensus_preconditioner(&bp5, 1.9, 1.0, 1.0).unwrap();
    let sync = DistPadmmSolver::new(&bp5, &graph, t5.clone(), psi5.clone(), sched).unwrap();
    let out = sync.solve(DistState::zeros(&graph, q), STOP, None).unwrap();
    assert_eq!(
        out.status,
        RunStatus::Converged,
        "dist-padmm did not converge"
    );
    record(
        "dist-padmm(ring-5)".into(),
        out.objective_at_mean,
        1e-6,
        Some(out.consensus_error),
    );

    let asynch = PdapdsSolver::new(&bp5, &graph, t5, psi5, sched).unwrap();
    for seed in 0..5u64 {
        let mut activation = ActivationSchedule::uniform_singletons(n, seed);
        let out = asynch
            .solve(&mut activation, DistState::zeros(&graph, q), STOP, None)
            .unwrap();
        assert_eq!(
            out.status,
            RunStatus::Converged,
            "pdapds seed {seed} did not converge"
        );
        record(
            format!("pdapds(ring-5,seed={seed})"),
            out.objective_at_mean,
            1e-4,
            Some(out.consensus_error),
        );
    }
    outcomes
}

#[test]
fn criterion_2_oracle_equivalence_and_criterion_3_consensus() {
    let mut worst_gap = 0.0f64;
    let mut worst_consensus = 0.0f64;
    let mut runs = 0usize;
    for bench in [Bench::lasso(), Bench::logistic()] {
        let outcomes = criterion_2_runs(&bench);
        for o in &outcomes {
            assert!(
                o.gap <= o.tolerance,
                "{} on {}: objective gap {} exceeds {}",
                o.name,
                bench.name,
                o.gap,
                o.tolerance
            );
            worst_gap = worst_gap.max(o.gap);
            runs += 1;
            if let Some(c) = o.consensus {
                assert!(
                    c <= 1e-6,
                    "{} on {}: consensus error {} exceeds 1e-6",
                    o.name,
                    bench.name,
                    c
                );
                worst_consensus = worst_consensus.max(c);
            }
        }
    }
    println!(
        "criterion 2 (oracle equivalence): PASS — {runs} runs, worst objective gap \
         {worst_gap:.2e} (tolerances 1e-6 deterministic / 1e-4 stochastic)"
    );
    println!("criterion 3 (consensus): PASS — worst consensus error {worst_consensus:.2e} <= 1e-6");
}

#[test]
fn criterion_4_preconditioner_soundness() {
    let mut rng = ProbeRng::new(4040);
    let mut worst_margin = f64::MAX;
    for trial in 0..100 {
        let rows = 2 + (rng.next_u64() % 49) as usize;
        let cols = 2 + (rng.next_u64() % 49) as usize;
        let density = 0.1 + 0.8 * (trial as f64 / 99.0);
        let mut triplets = Vec::new();
        for i in 0..rows {
            let mut has = false;
            for j in 0..cols {
                if (rng.next_f64() + 1.0) / 2.0 < density {
                    triplets.push((i, j, 2.0 * rng.next_f64()));
                    has = true;
                }
            }
            if !has {
                // every dual row must be used, or the builder rejects it
                triplets.push((i, (rng.next_u64() % cols as u64) as usize, 1.0));
            }
        }
        let d = SparseMatrix::from_triplets(rows, cols, &triplets).unwrap();
        let e = DiagonalMap::new(
            (0..cols)
                .map(|_| 0.1 + 2.0 * (rng.next_f64() + 1.0))
                .collect(),
        )
        .unwrap();
        let s = (trial % 5) as f64 / 2.0;
        let (t, psi) = build_diag_preconditioner(&d, &e, 1.9, 1.0, s).unwrap();

        // condition: T^{-1} - E/2 positive, pointwise
        let mut pos_margin = f64::MAX;
        for j in 0..cols {
            pos_margin = pos_margin.min(1.0 / t.get(j) - e.get(j) / 2.0);
        }
        assert!(pos_margin > 0.0, "trial {trial}: positivity violated");

        // norm condition by dense eigendecomposition of the scaled matrix
        let mut scaled = DenseMatrix::zeros(rows, cols);
        for (i, j, v) in d.entries() {
            let left = 1.0 / psi.get(i).sqrt();
            let right = 1.0 / (1.0 / t.get(j) - e.get(j) / 2.0).sqrt();
            scaled.set(i, j, scaled.get(i, j) + left * v * right);
        }
        let norm_sq = scaled.spectral_norm_sq();
        let margin = 1.0 - norm_sq;
        assert!(
            margin > 0.0,
            "trial {trial}: norm condition violated ({norm_sq})"
        );
        worst_margin = worst_margin.min(margin.min(pos_margin));
    }
    println!(
        "criterion 4 (preconditioner soundness): PASS — 100 instances, smallest margin {worst_margin:.3e}"
    );
}

#[test]
fn criterion_5_schedule_validator_agreement() {
    let mut rng = ProbeRng::new(5050);
    let mut accepted = 0usize;
    for trial in 0..1000 {
        // half the tuples from wide ranges, half biased toward the
        // admissible region so both decisions are exercised
        let (alpha, theta, delta_hat, rho) = if trial % 2 == 0 {
            (
                (rng.next_f64() + 1.0) / 2.0 * 0.999,
                (rng.next_f64() + 1.0) * 5.0 + 1e-9,
                (rng.next_f64() + 1.0) * 5.0 + 1e-9,
                (rng.next_f64() + 1.0) * 0.75 + 1e-9,
            )
        } else {
            let alpha = (rng.next_f64() + 1.0) / 2.0 * 0.4;
            let theta = (rng.next_f64() + 1.0) / 2.0 * 0.1 + 1e-4;
            let delta_hat = InertialSchedule::delta_hat_lower_bound(alpha, theta)
                + 0.5
                + (rng.next_f64() + 1.0);
            let cap = InertialSchedule::rho_upper_bound(alpha, theta, delta_hat);
            let rho = cap * (rng.next_f64() + 1.0) * 0.75 + 1e-9;
            (alpha, theta, delta_hat, rho)
        };
        let direct = {
            let cond1 =
                delta_hat > (alpha * alpha * (1.0 + alpha) + alpha * theta) / (1.0 - alpha * alpha);
            let bracket = alpha * (1.0 + alpha) + alpha * delta_hat + theta;
            let cap = (delta_hat - alpha * bracket) / (delta_hat * (1.0 + bracket));
            cond1 && rho < cap
        };
        let validated = validate_schedule(alpha, theta, delta_hat, rho).is_ok();
        assert_eq!(
            validated, direct,
            "disagreement at alpha={alpha}, theta={theta}, delta_hat={delta_hat}, rho={rho}"
        );
        accepted += usize::from(validated);
    }
    println!(
        "criterion 5 (schedule validator): PASS — 1000/1000 decisions agree ({accepted} accepted)"
    );
}

/// Projection onto the x-axis composed with projection onto x - y = 1;
/// fixed point (1, 0).
struct TwoLineOp;

impl BlockOperator for TwoLineOp {
    fn num_blocks(&self) -> usize {
        2
    }
    fn apply_block(&self, j: usize, w: &BlockPoint) -> Vector {
        let u = w.block(0).get(0);
        match j {
            0 => Vector::from_slice(&[(u + 1.0) / 2.0]),
            1 => Vector::from_slice(&[(u - 1.0) / 2.0]),
            _ => unreachable!(),
        }
    }
}

#[test]
fn criterion_6_km_engine_convergence() {
    // intersection from the 2x2 system [[0,1],[1,-1]] p = (0,1)
    let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, -1.0]]);
    let p = m.solve(&[0.0, 1.0]);
    let (ix, iy) = (p[0], p[1]);

    let sched = default_sched();
    for seed in 0..20u64 {
        let mut sampler = CoordinateSampler::uniform_singletons(2, seed);
        let out = run(
            &TwoLineOp,
            &mut sampler,
            &sched,
            StopRule {
                max_iters: 100_000,
                residual_tol: 1e-12,
            },
            BlockPoint::new(vec![
                Vector::from_slice(&[5.0 + seed as f64]),
                Vector::from_slice(&[-3.0]),
            ]),
            None,
            None,
        );
        assert_eq!(out.status, RunStatus::Converged, "seed {seed}");
        let u = out.state.x_curr.block(0).get(0);
        let v = out.state.x_curr.block(1).get(0);
        assert!(
            (u - ix).abs() <= 1e-8 && (v - iy).abs() <= 1e-8,
            "seed {seed}: ({u}, {v})"
        );
    }

    // alpha = 0, rho = 1, full activation: bitwise Picard
    let sched = InertialSchedule::unvalidated(0.0, 1.0);
    let mut st = KMState::new(BlockPoint::new(vec![
        Vector::from_slice(&[9.0]),
        Vector::from_slice(&[-4.0]),
    ]));
    let mut reference = (9.0f64, -4.0f64);
    for _ in 0..200 {
        st = km_step(&TwoLineOp, &st, &sched, &[0, 1]);
        reference = ((reference.0 + 1.0) / 2.0, (reference.0 - 1.0) / 2.0);
        assert_eq!(st.x_curr.block(0).get(0), reference.0);
        assert_eq!(st.x_curr.block(1).get(0), reference.1);
    }
    println!(
        "criterion 6 (KM engine): PASS — 20 seeds hit ({ix}, {iy}) within 1e-8; Picard bitwise"
    );
}

/// Iterations an ipds run needs to bring the objective gap below 1e-6.
fn iterations_to_gap(pb: &CompositeProblem, sched: InertialSchedule, reference: f64) -> u64 {
    let l = pb.lipschitz_scalar();
    let solver = IpdsSolver::new(
        pb,
        StepSizes::PdScalar {
            tau: 1.0 / l,
            sigma: 1.0,
        },
        sched,
    )
    .unwrap();
    let q = pb.primal_dim();
    let mut st = PrimalDualState::zeros(q, q);
    for iter in 1..=400_000u64 {
        st = solver.step(&st);
        if (pb.objective(&st.x_curr) - reference).abs() <= 1e-6 {
            return iter;
        }
    }
    u64::MAX
}

#[test]
fn criterion_7_inertia_benefit_soft_check() {
    // soft check, logged not gated: same relaxation for both, the
    // admissible one at alpha = 0.3
    let rho = 0.9 * InertialSchedule::rho_upper_bound(0.3, 0.01, 1.0);
    let with_inertia = validate_schedule(0.3, 0.01, 1.0, rho).unwrap();
    let without = validate_schedule(0.0, 0.01, 1.0, rho).unwrap();
    let mut wins = 0usize;
    let mut rows = Vec::new();
    for seed in 0..5u64 {
        let ds = synth_logistic(100 + seed, 200, 50).unwrap();
        let a = Arc::new(ds.a);
        let f = Box::new(LogisticLoss::new(a, ds.labels).unwrap());
        let q = 50;
        let pb = CompositeProblem::new(
            f,
            Box::new(L1Prox::new(q, LOGISTIC_LAMBDA).unwrap()),
            Box::new(ZeroProx::new(q)),
            Box::new(ZeroMap::new(q, q)),
        )
        .unwrap();
        let reference = reference_solve(pb.f.as_ref(), LOGISTIC_LAMBDA, 1e-12, 5_000_000)
            .unwrap()
            .objective;
        let k_inertial = iterations_to_gap(&pb, with_inertia, reference);
        let k_plain = iterations_to_gap(&pb, without, reference);
        if k_inertial < k_plain {
            wins += 1;
        }
        rows.push(format!(
            "seed {seed}: alpha=0.3 took {k_inertial}, alpha=0 took {k_plain}"
        ));
    }
    for row in &rows {
        println!("  {row}");
    }
    // logged, not gated: the claim is qualitative
    let verdict = if wins >= 4 {
        "supported"
    } else {
        "not supported"
    };
    println!(
        "criterion 7 (inertia benefit, soft): {wins}/5 seeds faster with inertia — claim {verdict}"
    );
}

#[test]
fn criterion_8_numerical_hygiene() {
    let mut rng = ProbeRng::new(808);

    // gradient finite differences at h = 1e-5, both loss families
    for bench in [Bench::lasso(), Bench::logistic()] {
        let f = bench.smooth();
        for _ in 0..5 {
            let x = Vector::from_slice(&rng.vector(bench.q()));
            let grad = f.grad(&x);
            let fd = central_diff_grad(|xs| f.value(&Vector::from_slice(xs)), x.as_slice(), 1e-5);
            for (g, d) in grad.iter().zip(fd.iter()) {
                assert!(
                    (g - d).abs() <= 1e-5,
                    "{}: gradient check failed ({g} vs {d})",
                    bench.name
                );
            }
        }
    }

    // firm nonexpansiveness of the prox oracles in random metrics
    let oracles: Vec<Box<dyn ProxOracle>> = vec![
        Box::new(L1Prox::new(8, 0.3).unwrap()),
        Box::new(ZeroProx::new(8)),
    ];
    for oracle in &oracles {
        for _ in 0..100 {
            let w =
                DiagonalMap::new((0..8).map(|_| 0.2 + (rng.next_f64() + 1.0)).collect()).unwrap();
            let u = Vector::from_slice(&rng.vector(8)).scale(3.0);
            let v = Vector::from_slice(&rng.vector(8)).scale(3.0);
            let pu = oracle.prox(&w, &u);
            let pv = oracle.prox(&w, &v);
            let diff = pu.sub(&pv);
            let lhs = w.inv_weighted_dot(&diff, &diff);
            let rhs = w.inv_weighted_dot(&diff, &u.sub(&v));
            assert!(lhs <= rhs + 1e-10, "firm nonexpansiveness: {lhs} > {rhs}");
        }
    }

    // averagedness probe for the synchronous consensus operator on the
    // logistic benchmark
    let bench = Bench::logistic();
    let bp = bench.batched(4);
    let (t, psi) = consensus_preconditioner(&bp, 1.9, 1.0, 1.0).unwrap();
    let a_avg = operator_averagedness(bp.cocoercivity_diag(), &t, &psi).unwrap();
    let sched = validate_schedule(0.0, 0.01, 1.0, 0.5).unwrap();
    let solver = MinibatchPadmmSolver::new(&bp, t.clone(), psi.clone(), sched).unwrap();
    let q = bench.q();
    let metric = |zx: &BlockVector, zy: &BlockVector, wx: &BlockVector, wy: &BlockVector| {
        let mut acc = 0.0;
        for n in 0..zx.num_blocks() {
            let (x, y) = (zx.block(n), zy.block(n));
            let (xp, yp) = (wx.block(n), wy.block(n));
            acc += t.inverse().apply(x).dot(xp) + x.dot(yp) + y.dot(xp) + psi.apply(y).dot(yp);
        }
        acc
    };
    let ratio = (1.0 - a_avg) / a_avg;
    let rand_bv = |rng: &mut ProbeRng| {
        BlockVector::new(
            (0..4)
                .map(|_| Vector::from_slice(&rng.vector(q)).scale(2.0))
                .collect(),
        )
        .unwrap()
    };
    for _ in 0..1000 {
        let (zx, zy) = (rand_bv(&mut rng), rand_bv(&mut rng));
        let (wx, wy) = (rand_bv(&mut rng), rand_bv(&mut rng));
        let (tzx, tzy) = solver.apply_operator(&zx, &zy);
        let (twx, twy) = solver.apply_operator(&wx, &wy);
        let (dx, dy) = (tzx.sub(&twx), tzy.sub(&twy));
        let (ex, ey) = (zx.sub(&wx), zy.sub(&wy));
        let (rx, ry) = (ex.sub(&dx), ey.sub(&dy));
        let lhs = metric(&dx, &dy, &dx, &dy);
        let base = metric(&ex, &ey, &ex, &ey);
        let defect = metric(&rx, &ry, &rx, &ry);
        assert!(
            lhs <= base - ratio * defect + 1e-9 * (1.0 + base),
            "averagedness probe failed"
        );
    }

    // the logistic oracle itself stays finite across extreme margins
    let a = SparseMatrix::from_dense(&[vec![1.0]]).unwrap();
    for t_val in [-700.0, 0.0, 700.0] {
        let (v, g) = logistic_oracle(&a, &[1.0], &Vector::from_slice(&[t_val])).unwrap();
        assert!(v.is_finite() && g.is_finite());
    }

    println!(
        "criterion 8 (numerical hygiene): PASS — gradients <= 1e-5, prox probes <= 1e-10, \
         averagedness probe green (a = {a_avg:.4})"
    );
}
