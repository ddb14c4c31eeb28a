//! Consensus-product reformulation of a sum of composite batch losses,
//! with the synchronous preconditioned solver and its stochastic
//! single-batch counterpart.

use crate::error::{Error, Result};
use crate::km::{CoordinateSampler, InertialSchedule, RunStatus, StopRule};
use crate::linops::{BlockVector, DiagonalMap, IdentityMap, LinearMap, SparseMatrix, Vector};
use crate::pd::{build_diag_preconditioner, validate_step_sizes, StepCertificate, StepSizes};
use crate::prox::{L1Prox, LogisticLoss, ProxOracle, QuadraticLoss, ScaledSmooth, SmoothOracle};
use crate::trace::Trace;

/// One data batch: a smooth loss and a prox-able regularizer on the
/// shared space X.
pub struct Batch {
    pub f: Box<dyn SmoothOracle>,
    pub g: Box<dyn ProxOracle>,
}

/// N batch oracles over a shared space, with the shared cocoercivity
/// diagonal (elementwise maximum over batches).
pub struct BatchedProblem {
    batches: Vec<Batch>,
    q: usize,
    e_hat: DiagonalMap,
}

impl BatchedProblem {
    pub fn new(batches: Vec<Batch>) -> Result<Self> {
        if batches.is_empty() {
            return Err(Error::InvalidParameter {
                name: "batches",
                reason: "need at least one batch".into(),
            });
        }
        let q = batches[0].f.dim();
        let mut e_hat = vec![0.0f64; q];
        for b in &batches {
            if b.f.dim() != q || b.g.dim() != q {
                return Err(Error::DimensionMismatch {
                    context: "BatchedProblem",
                    expected: q,
                    got: b.f.dim().max(b.g.dim()),
                });
            }
            for (acc, e) in e_hat.iter_mut().zip(b.f.cocoercivity_diag().entries()) {
                *acc = acc.max(*e);
            }
        }
        let e_hat = DiagonalMap::new(e_hat)?;
        Ok(BatchedProblem { batches, q, e_hat })
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn batch(&self, n: usize) -> &Batch {
        &self.batches[n]
    }

    pub fn cocoercivity_diag(&self) -> &DiagonalMap {
        &self.e_hat
    }

    /// Full objective sum_n f_n(x) + g_n(x) at a single shared point.
    pub fn objective_at(&self, x: &Vector) -> f64 {
        self.batches
            .iter()
            .map(|b| b.f.value(x) + b.g.value(x))
            .sum()
    }
}

/// Contiguous near-equal partition of 0..m into n chunks, remainder
/// spread over the first chunks.
pub fn row_chunks(m: usize, n: usize) -> Vec<std::ops::Range<usize>> {
    let base = m / n;
    let extra = m % n;
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let len = base + usize::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

fn submatrix_rows(a: &dyn LinearMap, range: &std::ops::Range<usize>) -> Result<SparseMatrix> {
    let triplets: Vec<(usize, usize, f64)> = a
        .entries()
        .filter(|(i, _, _)| range.contains(i))
        .map(|(i, j, v)| (i - range.start, j, v))
        .collect();
    SparseMatrix::from_triplets(range.len(), a.in_dim(), &triplets)
}

/// Split an l1-regularized logistic regression problem into N batches:
/// each batch keeps the global 1/m scaling of its samples and a lambda/N
/// share of the regularizer, so the batch objectives sum to the original.
pub fn split_problem(
    a: &dyn LinearMap,
    labels: &[f64],
    lambda: f64,
    n_batches: usize,
) -> Result<BatchedProblem> {
    let m = a.out_dim();
    if labels.len() != m {
        return Err(Error::DimensionMismatch {
            context: "split_problem labels",
            expected: m,
            got: labels.len(),
        });
    }
    if n_batches == 0 || n_batches > m {
        return Err(Error::InvalidParameter {
            name: "n_batches",
            reason: format!("must lie in 1..={m}, got {n_batches}"),
        });
    }
    let q = a.in_dim();
    let mut batches = Vec::with_capacity(n_batches);
    for range in row_chunks(m, n_batches) {
        let chunk = submatrix_rows(a, &range)?;
        let chunk_labels = labels[range.clone()].to_vec();
        let m_n = range.len();
        let loss = LogisticLoss::new(std::sync::Arc::new(chunk), chunk_labels)?;
        // per-batch mean scaled back to the global 1/m convention
        let f = ScaledSmooth::new(Box::new(loss), m_n as f64 / m as f64)?;
        let g = L1Prox::new(q, lambda / n_batches as f64)?;
        batches.push(Batch {
            f: Box::new(f),
            g: Box::new(g),
        });
    }
    BatchedProblem::new(batches)
}

/// Split a least-squares l1 problem 1/2||Ax-b||^2 + lambda||x||_1 into N
/// batches of rows.
pub fn split_lasso(
    a: &dyn LinearMap,
    b: &Vector,
    lambda: f64,
    n_batches: usize,
) -> Result<BatchedProblem> {
    let m = a.out_dim();
    if b.dim() != m {
        return Err(Error::DimensionMismatch {
            context: "split_lasso b",
            expected: m,
            got: b.dim(),
        });
    }
    if n_batches == 0 || n_batches > m {
        return Err(Error::InvalidParameter {
            name: "n_batches",
            reason: format!("must lie in 1..={m}, got {n_batches}"),
        });
    }
    let q = a.in_dim();
    let mut batches = Vec::with_capacity(n_batches);
    for range in row_chunks(m, n_batches) {
        let chunk = submatrix_rows(a, &range)?;
        let rhs = Vector::from_slice(&b.as_slice()[range.clone()]);
        let f = QuadraticLoss::new(std::sync::Arc::new(chunk), rhs)?;
        let g = L1Prox::new(q, lambda / n_batches as f64)?;
        batches.push(Batch {
            f: Box::new(f),
            g: Box::new(g),
        });
    }
    BatchedProblem::new(batches)
}

/// Per-batch copies of the primal and dual variables plus their previous
/// values for the inertial extrapolation.
#[derive(Debug, Clone)]
pub struct MinibatchState {
    pub x_prev: BlockVector,
    pub x_curr: BlockVector,
    pub y_prev: BlockVector,
    pub y_curr: BlockVector,
    pub k: u64,
}

impl MinibatchState {
    pub fn zeros(n: usize, q: usize) -> Self {
        let x = BlockVector::zeros(n, q);
        let y = BlockVector::zeros(n, q);
        MinibatchState {
            x_prev: x.clone(),
            x_curr: x,
            y_prev: y.clone(),
            y_curr: y,
            k: 1,
        }
    }

    pub fn mean_dual_norm(&self) -> f64 {
        self.y_curr.mean_block().norm()
    }
}

/// Build (T, Psi) for the consensus coupling (D = I on each copy) from
/// the shared cocoercivity diagonal.
pub fn consensus_preconditioner(
    bp: &BatchedProblem,
    gamma: f64,
    r: f64,
    s: f64,
) -> Result<(DiagonalMap, DiagonalMap)> {
    let id = IdentityMap::new(bp.dim());
    build_diag_preconditioner(&id, bp.cocoercivity_diag(), gamma, r, s)
}

/// Averagedness bound of the synchronous consensus operator,
/// 1 / (2 - a1) with a1 = (||E||/2) / (||T^{-1}|| - ||Psi^{-1}||),
/// when the norm gap is positive.
pub fn operator_averagedness(
    e_hat: &DiagonalMap,
    t: &DiagonalMap,
    psi: &DiagonalMap,
) -> Option<f64> {
    let gap = 1.0 / t.min_entry() - 1.0 / psi.min_entry();
    if gap <= 0.0 {
        return None;
    }
    let a1 = e_hat.max_entry() / 2.0 / gap;
    if a1 >= 1.0 {
        return None;
    }
    Some(1.0 / (2.0 - a1))
}

fn validate_consensus(
    bp: &BatchedProblem,
    t: &DiagonalMap,
    psi: &DiagonalMap,
    sched: &InertialSchedule,
) -> Result<StepCertificate> {
    let id = IdentityMap::new(bp.dim());
    let cert = validate_step_sizes(
        bp.cocoercivity_diag(),
        &id,
        &StepSizes::AdmmDiagonal {
            t: t.clone(),
            psi: psi.clone(),
        },
    )?;
    // when the operator is provably averaged, the non-inertial relaxation
    // cap 1/a applies on top of the inertial one
    if let Some(a) = operator_averagedness(bp.cocoercivity_diag(), t, psi) {
        let cap = InertialSchedule::averaged_rho_cap(a);
        if sched.rho() >= cap {
            return Err(Error::ScheduleViolation {
                condition: format!(
                    "rho = {} must stay below 1/a for the {a}-averaged operator",
                    sched.rho()
                ),
                rho_max: cap,
            });
        }
    }
    Ok(cert)
}

/// Shared arithmetic of the per-batch primal argument:
/// xi_n - T grad - T eta_n - T (2 inner), where `inner` carries the
/// consensus coupling. Identical code path for both solvers keeps the
/// full-sweep reduction exact.
fn batch_primal_arg(
    t: &DiagonalMap,
    xi_n: &Vector,
    grad: &Vector,
    eta_n: &Vector,
    inner: &Vector,
) -> Vector {
    xi_n.sub(&t.apply(grad))
        .sub(&t.apply(eta_n))
        .sub(&t.apply(&inner.scale(2.0)))
}

fn extrapolate_blocks(curr: &BlockVector, prev: &BlockVector, alpha: f64) -> BlockVector {
    if alpha == 0.0 {
        return curr.clone();
    }
    BlockVector::new(
        curr.blocks()
            .iter()
            .zip(prev.blocks().iter())
            .map(|(c, p)| c.add_scaled(alpha, &c.sub(p)))
            .collect(),
    )
    .expect("same structure")
}

#[derive(Debug)]
pub struct MinibatchOutcome {
    pub status: RunStatus,
    pub state: MinibatchState,
    pub objective_at_mean: f64,
    pub consensus_error: f64,
    pub residual: f64,
    pub iterations: u64,
}

/// Header of the minibatch CSV trace rows.
pub const MINIBATCH_TRACE_HEADER: &str = "k,objective,consensus_error,residual";

/// Synchronous preconditioned consensus solver: every batch is updated
/// each step. Requires the mean dual started (and therefore kept) at zero.
pub struct MinibatchPadmmSolver<'a> {
    bp: &'a BatchedProblem,
    t: DiagonalMap,
    psi: DiagonalMap,
    sched: InertialSchedule,
    pub certificate: StepCertificate,
}

impl<'a> MinibatchPadmmSolver<'a> {
    pub fn new(
        bp: &'a BatchedProblem,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
    ) -> Result<Self> {
        let certificate = validate_consensus(bp, &t, &psi, &sched)?;
        Ok(MinibatchPadmmSolver {
            bp,
            t,
            psi,
            sched,
            certificate,
        })
    }

    /// The plain synchronous operator (no inertia, no relaxation),
    /// mapping (x, y) to its full update. Fixed points of this map are
    /// the solutions; it also feeds the averagedness probe.
    pub fn apply_operator(&self, x: &BlockVector, y: &BlockVector) -> (BlockVector, BlockVector) {
        let n = self.bp.num_batches();
        let xi_bar = x.mean_block();
        let mut new_x = Vec::with_capacity(n);
        let mut new_y = Vec::with_capacity(n);
        for b in 0..n {
            let xi_n = x.block(b);
            let eta_n = y.block(b);
            let inner = self.psi.apply_inv(&xi_n.sub(&xi_bar));
            let ytil = eta_n.add(&inner);
            let grad = self.bp.batch(b).f.grad(xi_n);
            let arg = batch_primal_arg(&self.t, xi_n, &grad, eta_n, &inner);
            let xtil = self.bp.batch(b).g.prox(&self.t, &arg);
            new_x.push(xtil);
            new_y.push(ytil);
        }
        (
            BlockVector::new(new_x).expect("same structure"),
            BlockVector::new(new_y).expect("same structure"),
        )
    }

    pub fn step(&self, st: &MinibatchState) -> Result<MinibatchState> {
        if st.mean_dual_norm() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "mean dual must be zero for the synchronous solver, norm is {}",
                st.mean_dual_norm()
            )));
        }
        let alpha_k = self.sched.alpha_at(st.k);
        let rho = self.sched.rho();
        let xi = extrapolate_blocks(&st.x_curr, &st.x_prev, alpha_k);
        let eta = extrapolate_blocks(&st.y_curr, &st.y_prev, alpha_k);
        let (xtil, ytil) = self.apply_operator(&xi, &eta);
        let n = self.bp.num_batches();
        let mut x_next = xi.clone();
        let mut y_next = eta.clone();
        for b in 0..n {
            *x_next.block_mut(b) = xi.block(b).relax_toward(rho, xtil.block(b));
            *y_next.block_mut(b) = eta.block(b).relax_toward(rho, ytil.block(b));
        }
        Ok(MinibatchState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: x_next,
            y_curr: y_next,
            k: st.k + 1,
        })
    }

    /// Distance between (x, y) and its full synchronous update.
    pub fn full_residual(&self, x: &BlockVector, y: &BlockVector) -> f64 {
        let (tx, ty) = self.apply_operator(x, y);
        (tx.sub(x).norm_sq() + ty.sub(y).norm_sq()).sqrt()
    }

    pub fn solve(
        &self,
        st0: MinibatchState,
        stop: StopRule,
        mut trace: Option<&mut Trace>,
    ) -> Result<MinibatchOutcome> {
        let mut st = st0;
        for iter in 1..=stop.max_iters {
            let next = self.step(&st)?;
            let step_res = (next.x_curr.sub(&next.x_prev).norm_sq()
                + next.y_curr.sub(&next.y_prev).norm_sq())
            .sqrt();
            st = next;
            if let Some(tr) = trace.as_deref_mut() {
                let mean = st.x_curr.mean_block();
                tr.push_row(format!(
                    "{},{},{},{}",
                    st.k,
                    self.bp.objective_at(&mean),
                    st.x_curr.consensus_error(),
                    step_res
                ));
            }
            if step_res <= stop.residual_tol || iter % 100 == 0 {
                let full = self.full_residual(&st.x_curr, &st.y_curr);
                if full <= stop.residual_tol {
                    return Ok(self.outcome(RunStatus::Converged, st, full, iter));
                }
            }
        }
        let full = self.full_residual(&st.x_curr, &st.y_curr);
        let status = if full <= stop.residual_tol {
            RunStatus::Converged
        } else {
            RunStatus::MaxIters
        };
        Ok(self.outcome(status, st, full, stop.max_iters))
    }

    fn outcome(
        &self,
        status: RunStatus,
        st: MinibatchState,
        residual: f64,
        iterations: u64,
    ) -> MinibatchOutcome {
        let mean = st.x_curr.mean_block();
        MinibatchOutcome {
            status,
            objective_at_mean: self.bp.objective_at(&mean),
            consensus_error: st.x_curr.consensus_error(),
            residual,
            iterations,
            state: st,
        }
    }
}

/// Stochastic single-batch solver: each step extrapolates every copy but
/// updates only the drawn batches; the others carry their extrapolated
/// values over. The mean dual is generally nonzero here, so the dual
/// update carries the extra mean-correction terms.
pub struct PsmpdsSolver<'a> {
    bp: &'a BatchedProblem,
    t: DiagonalMap,
    psi: DiagonalMap,
    sched: InertialSchedule,
    pub certificate: StepCertificate,
}

impl<'a> PsmpdsSolver<'a> {
    pub fn new(
        bp: &'a BatchedProblem,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
    ) -> Result<Self> {
        let certificate = validate_consensus(bp, &t, &psi, &sched)?;
        Ok(PsmpdsSolver {
            bp,
            t,
            psi,
            sched,
            certificate,
        })
    }

    /// One step with an explicit active-batch set.
    pub fn step_with_active(&self, st: &MinibatchState, active: &[usize]) -> MinibatchState {
        let alpha_k = self.sched.alpha_at(st.k);
        let rho = self.sched.rho();
        let xi = extrapolate_blocks(&st.x_curr, &st.x_prev, alpha_k);
        let eta = extrapolate_blocks(&st.y_curr, &st.y_prev, alpha_k);
        let xi_bar = xi.mean_block();
        let eta_bar = eta.mean_block();
        // inactive batches carry the extrapolated values
        let mut x_next = xi.clone();
        let mut y_next = eta.clone();
        for &b in active {
            let xi_n = xi.block(b);
            let eta_n = eta.block(b);
            let pi = self.psi.apply_inv(&xi_n.sub(&xi_bar));
            let ytil = eta_n.sub(&eta_bar).add(&pi);
            let inner = pi.sub(&eta_bar);
            let grad = self.bp.batch(b).f.grad(xi_n);
            let arg = batch_primal_arg(&self.t, xi_n, &grad, eta_n, &inner);
            let xtil = self.bp.batch(b).g.prox(&self.t, &arg);
            *x_next.block_mut(b) = xi_n.relax_toward(rho, &xtil);
            *y_next.block_mut(b) = eta_n.relax_toward(rho, &ytil);
        }
        MinibatchState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: x_next,
            y_curr: y_next,
            k: st.k + 1,
        }
    }

    /// One step drawing the active set from the sampler.
    pub fn step(&self, sampler: &mut CoordinateSampler, st: &MinibatchState) -> MinibatchState {
        let active = sampler.draw().to_vec();
        self.step_with_active(st, &active)
    }

    /// Distance between (x, y) and its all-batches update under this
    /// solver's map (including the mean-dual correction).
    pub fn full_residual(&self, x: &BlockVector, y: &BlockVector) -> f64 {
        let n = self.bp.num_batches();
        let xi_bar = x.mean_block();
        let eta_bar = y.mean_block();
        let mut acc = 0.0;
        for b in 0..n {
            let xi_n = x.block(b);
            let eta_n = y.block(b);
            let pi = self.psi.apply_inv(&xi_n.sub(&xi_bar));
            let ytil = eta_n.sub(&eta_bar).add(&pi);
            let inner = pi.sub(&eta_bar);
            let grad = self.bp.batch(b).f.grad(xi_n);
            let arg = batch_primal_arg(&self.t, xi_n, &grad, eta_n, &inner);
            let xtil = self.bp.batch(b).g.prox(&self.t, &arg);
            acc += xtil.sub(xi_n).norm_sq() + ytil.sub(eta_n).norm_sq();
        }
        acc.sqrt()
    }

    pub fn solve(
        &self,
        sampler: &mut CoordinateSampler,
        st0: MinibatchState,
        stop: StopRule,
        mut trace: Option<&mut Trace>,
    ) -> Result<MinibatchOutcome> {
        if sampler.num_blocks() != self.bp.num_batches() {
            return Err(Error::InvalidSampler(format!(
                "sampler covers {} blocks, problem has {} batches",
                sampler.num_blocks(),
                self.bp.num_batches()
            )));
        }
        let mut st = st0;
        for iter in 1..=stop.max_iters {
            let next = self.step(sampler, &st);
            let step_res = (next.x_curr.sub(&next.x_prev).norm_sq()
                + next.y_curr.sub(&next.y_prev).norm_sq())
            .sqrt();
            st = next;
            if let Some(tr) = trace.as_deref_mut() {
                let mean = st.x_curr.mean_block();
                tr.push_row(format!(
                    "{},{},{},{}",
                    st.k,
                    self.bp.objective_at(&mean),
                    st.x_curr.consensus_error(),
                    step_res
                ));
            }
            if step_res <= stop.residual_tol || iter % 100 == 0 {
                let full = self.full_residual(&st.x_curr, &st.y_curr);
                if full <= stop.residual_tol {
                    return Ok(self.outcome(RunStatus::Converged, st, full, iter));
                }
            }
        }
        let full = self.full_residual(&st.x_curr, &st.y_curr);
        let status = if full <= stop.residual_tol {
            RunStatus::Converged
        } else {
            RunStatus::MaxIters
        };
        Ok(self.outcome(status, st, full, stop.max_iters))
    }

    fn outcome(
        &self,
        status: RunStatus,
        st: MinibatchState,
        residual: f64,
        iterations: u64,
    ) -> MinibatchOutcome {
        let mean = st.x_curr.mean_block();
        MinibatchOutcome {
            status,
            objective_at_mean: self.bp.objective_at(&mean),
            consensus_error: st.x_curr.consensus_error(),
            residual,
            iterations,
            state: st,
        }
    }
}
