//! Cross-solver agreement, validator soundness against dense
//! eigendecomposition, and convergence-quality invariants.

use std::sync::Arc;

use proptest::prelude::*;
use proxsplit::km::{validate_schedule, InertialSchedule, StopRule};
use proxsplit::linops::{DiagonalMap, IdentityMap, LinearMap, SparseMatrix, Vector, ZeroMap};
use proxsplit::pd::{
    build_diag_preconditioner, optimality_residuals, validate_step_sizes, CompositeProblem,
    CondatSolver, ForwardBackwardSolver, IadmmSolver, IpdsSolver, PrimalDualState, StepSizes,
};
use proxsplit::prox::{L1Prox, QuadraticLoss, ZeroProx};
use proxsplit_testkit::{DenseMatrix, ProbeRng};

fn small_lasso(seed: u64, m: usize, q: usize) -> (Arc<SparseMatrix>, Vector) {
    let mut rng = ProbeRng::new(seed);
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..q {
            triplets.push((i, j, rng.next_f64() / (m as f64).sqrt()));
        }
    }
    let a = Arc::new(SparseMatrix::from_triplets(m, q, &triplets).unwrap());
    let b = Vector::from_slice(&rng.vector(m));
    (a, b)
}

fn lasso_problem(
    a: Arc<SparseMatrix>,
    b: Vector,
    lambda: f64,
    identity_coupling: bool,
) -> CompositeProblem {
    let q = proxsplit::linops::LinearMap::in_dim(a.as_ref());
    let f = Box::new(QuadraticLoss::new(a, b).unwrap());
    let g = Box::new(L1Prox::new(q, lambda).unwrap());
    let h = Box::new(ZeroProx::new(q));
    let d: Box<dyn LinearMap> = if identity_coupling {
        Box::new(IdentityMap::new(q))
    } else {
        Box::new(ZeroMap::new(q, q))
    };
    CompositeProblem::new(f, g, h, d).unwrap()
}

#[test]
fn four_solvers_agree_on_the_objective() {
    let (a, b) = small_lasso(7, 18, 6);
    let lambda = 0.05;
    let stop = StopRule {
        max_iters: 500_000,
        residual_tol: 1e-12,
    };
    // forward-backward reference at 1e-12
    let pb0 = lasso_problem(a.clone(), b.clone(), lambda, false);
    let l = pb0.lipschitz_scalar();
    let fb = ForwardBackwardSolver::new(&pb0, 1.0 / l).unwrap();
    let reference = fb.solve(PrimalDualState::zeros(6, 6), stop, None);
    assert_eq!(reference.status, proxsplit::km::RunStatus::Converged);

    let sched = validate_schedule(0.3, 0.01, 1.0, 0.4).unwrap();

    let condat = CondatSolver::new(&pb0, 1.0 / l, 1.0, 1.0).unwrap();
    let out = condat.solve(PrimalDualState::zeros(6, 6), stop, None);
    assert!((out.objective - reference.objective).abs() <= 1e-6);

    let ipds = IpdsSolver::new(
        &pb0,
        StepSizes::PdScalar {
            tau: 1.0 / l,
            sigma: 1.0,
        },
        sched,
    )
    .unwrap();
    let out = ipds.solve(PrimalDualState::zeros(6, 6), stop, None);
    assert!((out.objective - reference.objective).abs() <= 1e-6);

    let pb1 = lasso_problem(a.clone(), b.clone(), lambda, true);
    let iadmm = IadmmSolver::new(
        &pb1,
        StepSizes::AdmmScalar {
            tau: 1.0 / l,
            mu: 10.0 / l,
        },
        sched,
    )
    .unwrap();
    let out = iadmm.solve(PrimalDualState::zeros(6, 6), stop, None);
    assert!((out.objective - reference.objective).abs() <= 1e-6);

    let e = pb1.f.cocoercivity_diag().clone();
    let id = IdentityMap::new(6);
    let (t, psi) = build_diag_preconditioner(&id, &e, 1.9, 1.0, 1.0).unwrap();
    let padmm = IadmmSolver::new(&pb1, StepSizes::AdmmDiagonal { t, psi }, sched).unwrap();
    let out = padmm.solve(PrimalDualState::zeros(6, 6), stop, None);
    assert!((out.objective - reference.objective).abs() <= 1e-6);
}

#[test]
fn optimality_residuals_bounded_by_ten_tolerances() {
    let (a, b) = small_lasso(11, 15, 5);
    let pb = lasso_problem(a, b, 0.08, false);
    let l = pb.lipschitz_scalar();
    let tol = 1e-11;
    let solver = CondatSolver::new(&pb, 1.0 / l, 1.0, 1.0).unwrap();
    let out = solver.solve(
        PrimalDualState::zeros(5, 5),
        StopRule {
            max_iters: 500_000,
            residual_tol: tol,
        },
        None,
    );
    let t = DiagonalMap::uniform(5, 1.0 / l).unwrap();
    let s = DiagonalMap::uniform(5, 1.0).unwrap();
    let (rx, ry) = optimality_residuals(&pb, &t, &s, &out.state.x_curr, &out.state.y_curr);
    assert!(rx <= 10.0 * tol, "primal optimality residual {rx}");
    assert!(ry <= 10.0 * tol, "dual optimality residual {ry}");
}

#[test]
fn residual_square_sum_stabilizes() {
    let (a, b) = small_lasso(13, 12, 4);
    let pb = lasso_problem(a, b, 0.1, false);
    let l = pb.lipschitz_scalar();
    let sched = validate_schedule(0.3, 0.01, 1.0, 0.4).unwrap();
    let solver = IpdsSolver::new(
        &pb,
        StepSizes::PdScalar {
            tau: 1.0 / l,
            sigma: 1.0,
        },
        sched,
    )
    .unwrap();
    let mut st = PrimalDualState::zeros(4, 4);
    let total = 30_000usize;
    let mut acc = 0.0;
    let mut partials = Vec::with_capacity(total);
    for _ in 0..total {
        st = solver.step(&st);
        acc += st.x_curr.sub(&st.x_prev).norm_sq() + st.y_curr.sub(&st.y_prev).norm_sq();
        partials.push(acc);
    }
    let at_90 = partials[(total * 9) / 10 - 1];
    let at_end = partials[total - 1];
    assert!((at_end - at_90) <= 1e-9 * at_end.max(1e-300));
}

fn random_positive_diag(rng: &mut ProbeRng, dim: usize) -> DiagonalMap {
    DiagonalMap::new(
        (0..dim)
            .map(|_| 0.1 + 2.0 * (rng.next_f64() + 1.0))
            .collect(),
    )
    .unwrap()
}

fn random_sparse_full_rows(
    rng: &mut ProbeRng,
    rows: usize,
    cols: usize,
    density: f64,
) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..rows {
        let mut row_has = false;
        for j in 0..cols {
            if (rng.next_f64() + 1.0) / 2.0 < density {
                triplets.push((i, j, 2.0 * rng.next_f64()));
                row_has = true;
            }
        }
        if !row_has {
            // keep every dual coordinate used
            let j = (rng.next_u64() % cols as u64) as usize;
            triplets.push((i, j, 1.0 + rng.next_f64().abs()));
        }
    }
    SparseMatrix::from_triplets(rows, cols, &triplets).unwrap()
}

/// Dense-oracle evaluation of the metric coupling norm
/// ||Psi^{-1/2} D (T^{-1} - E/2)^{-1/2}||^2.
fn dense_coupling_norm_sq(
    d: &SparseMatrix,
    e: &DiagonalMap,
    t: &DiagonalMap,
    psi: &DiagonalMap,
) -> f64 {
    let rows = d.out_dim();
    let cols = d.in_dim();
    let mut scaled = DenseMatrix::zeros(rows, cols);
    for (i, j, v) in d.entries() {
        let left = 1.0 / psi.get(i).sqrt();
        let right = 1.0 / (1.0 / t.get(j) - e.get(j) / 2.0).sqrt();
        scaled.set(i, j, scaled.get(i, j) + left * v * right);
    }
    scaled.spectral_norm_sq()
}

#[test]
fn preconditioner_passes_conditions_on_random_instances() {
    let mut rng = ProbeRng::new(2024);
    for trial in 0..100 {
        let rows = 2 + (rng.next_u64() % 49) as usize;
        let cols = 2 + (rng.next_u64() % 49) as usize;
        let density = 0.1 + 0.8 * ((trial % 10) as f64 / 10.0);
        let d = random_sparse_full_rows(&mut rng, rows, cols, density);
        let e = random_positive_diag(&mut rng, cols);
        let s = (trial % 5) as f64 / 2.0;
        let (t, psi) = build_diag_preconditioner(&d, &e, 1.9, 1.0, s).unwrap();
        // positivity of T^{-1} - E/2, pointwise
        for j in 0..cols {
            assert!(1.0 / t.get(j) - e.get(j) / 2.0 > 0.0);
        }
        // coupling norm below one, by dense eigendecomposition
        let norm_sq = dense_coupling_norm_sq(&d, &e, &t, &psi);
        assert!(
            norm_sq < 1.0,
            "trial {trial}: dense coupling norm^2 = {norm_sq}"
        );
        // and the validator agrees (coupling is checked for the
        // PDS-family orientation with dual step psi^{-1})
        let cert = validate_step_sizes(
            &e,
            &d,
            &StepSizes::PdDiagonal {
                t: t.clone(),
                sigma: psi.inverse(),
            },
        )
        .unwrap();
        assert!(cert.positivity_margin > 0.0);
        assert!(cert.coupling_margin > 0.0);
        // the two margin computations see the same norm
        assert!(
            (cert.coupling_margin - (1.0 - norm_sq)).abs() <= 1e-6 * (1.0 + norm_sq),
            "trial {trial}: validator {} vs dense {}",
            cert.coupling_margin,
            1.0 - norm_sq
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// the validator's accept/reject decision matches a direct
    /// transcription of the two schedule inequalities
    #[test]
    fn prop_schedule_validator_matches_direct_evaluation(
        alpha in 0.0f64..0.999,
        theta in 1e-6f64..10.0,
        delta_hat in 1e-6f64..10.0,
        rho in 1e-6f64..1.5,
    ) {
        let direct_ok = {
            let cond1 = delta_hat
                > (alpha * alpha * (1.0 + alpha) + alpha * theta) / (1.0 - alpha * alpha);
            let bracket = alpha * (1.0 + alpha) + alpha * delta_hat + theta;
            let cap = (delta_hat - alpha * bracket) / (delta_hat * (1.0 + bracket));
            cond1 && rho < cap
        };
        let validated = validate_schedule(alpha, theta, delta_hat, rho).is_ok();
        prop_assert_eq!(validated, direct_ok);
    }

    /// inertial schedules admit strictly positive relaxation whenever
    /// delta_hat clears its lower bound
    #[test]
    fn prop_admissible_interval_is_nonempty(
        alpha in 0.0f64..0.9,
        theta in 1e-4f64..1.0,
    ) {
        let lower = InertialSchedule::delta_hat_lower_bound(alpha, theta);
        let delta_hat = lower + 1.0;
        let cap = InertialSchedule::rho_upper_bound(alpha, theta, delta_hat);
        prop_assert!(cap > 0.0);
        prop_assert!(validate_schedule(alpha, theta, delta_hat, cap * 0.5).is_ok());
    }
}
