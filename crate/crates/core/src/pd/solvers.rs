use crate::error::{Error, Result};
use crate::km::{InertialSchedule, RunStatus, StopRule};
use crate::linops::{operator_norm_sq, DiagonalMap, LinearMap, Vector};
use crate::pd::problem::{CompositeProblem, PrimalDualState};
use crate::pd::steps::{validate_for_problem, StepCertificate, StepSizes};
use crate::prox::prox_conjugate;
use crate::trace::Trace;

/// Header of the primal-dual solver CSV trace rows.
pub const PD_TRACE_HEADER: &str = "k,objective,primal_residual,dual_residual";

#[derive(Debug)]
pub struct SolveOutcome {
    pub status: RunStatus,
    pub state: PrimalDualState,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub iterations: u64,
}

fn extrapolate(curr: &Vector, prev: &Vector, alpha: f64) -> Vector {
    if alpha == 0.0 {
        curr.clone()
    } else {
        curr.add_scaled(alpha, &curr.sub(prev))
    }
}

fn drive(
    pb: &CompositeProblem,
    mut step: impl FnMut(&PrimalDualState) -> PrimalDualState,
    st0: PrimalDualState,
    stop: StopRule,
    mut trace: Option<&mut Trace>,
) -> SolveOutcome {
    let mut st = st0;
    let mut primal_res = f64::MAX;
    let mut dual_res = f64::MAX;
    for iter in 1..=stop.max_iters {
        st = step(&st);
        primal_res = st.x_curr.sub(&st.x_prev).norm();
        dual_res = st.y_curr.sub(&st.y_prev).norm();
        if let Some(tr) = trace.as_deref_mut() {
            tr.push_row(format!(
                "{},{},{},{}",
                st.k,
                pb.objective(&st.x_curr),
                primal_res,
                dual_res
            ));
        }
        if primal_res.max(dual_res) <= stop.residual_tol {
            return SolveOutcome {
                status: RunStatus::Converged,
                objective: pb.objective(&st.x_curr),
                state: st,
                primal_residual: primal_res,
                dual_residual: dual_res,
                iterations: iter,
            };
        }
    }
    SolveOutcome {
        status: RunStatus::MaxIters,
        objective: pb.objective(&st.x_curr),
        state: st,
        primal_residual: primal_res,
        dual_residual: dual_res,
        iterations: stop.max_iters,
    }
}

/// Normalize the primal-dual step parameterization to diagonal maps so
/// the scalar and preconditioned variants share one arithmetic path.
fn normalize_pd(pb: &CompositeProblem, steps: &StepSizes) -> Result<(DiagonalMap, DiagonalMap)> {
    match steps {
        StepSizes::PdScalar { tau, sigma } => Ok((
            DiagonalMap::uniform(pb.primal_dim(), *tau)?,
            DiagonalMap::uniform(pb.dual_dim(), *sigma)?,
        )),
        StepSizes::PdDiagonal { t, sigma } => Ok((t.clone(), sigma.clone())),
        _ => Err(Error::InvalidParameter {
            name: "steps",
            reason: "primal-dual solvers need PdScalar or PdDiagonal steps".into(),
        }),
    }
}

/// Baseline primal-dual splitting iteration without inertia: dual prox,
/// primal prox, then relaxation anchored at the current pair.
pub struct CondatSolver<'a> {
    pb: &'a CompositeProblem,
    t: DiagonalMap,
    sigma: DiagonalMap,
    rho: f64,
    pub certificate: StepCertificate,
    pub rho_cap: f64,
}

impl<'a> CondatSolver<'a> {
    pub fn new(pb: &'a CompositeProblem, tau: f64, sigma: f64, rho: f64) -> Result<Self> {
        let steps = StepSizes::PdScalar { tau, sigma };
        let certificate = validate_for_problem(pb.f.as_ref(), pb.d.as_ref(), &steps)?;
        let l = pb.lipschitz_scalar();
        let d_norm_sq = operator_norm_sq(pb.d.as_ref(), 1e-9)?;
        let rho_cap = 2.0 - (l / 2.0) / (1.0 / tau - sigma * d_norm_sq);
        if !(rho > 0.0 && rho < rho_cap) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must lie in (0, {rho_cap}), got {rho}"),
            });
        }
        let (t, sigma) = normalize_pd(pb, &steps)?;
        Ok(CondatSolver {
            pb,
            t,
            sigma,
            rho,
            certificate,
            rho_cap,
        })
    }

    pub fn step(&self, st: &PrimalDualState) -> PrimalDualState {
        let pb = self.pb;
        let xi = &st.x_curr;
        let eta = &st.y_curr;
        let ytil = prox_conjugate(
            pb.h.as_ref(),
            &self.sigma,
            &eta.add(&self.sigma.apply(&pb.d.apply(xi))),
        );
        let grad = pb.f.grad(xi);
        let dual_back = pb.d.adjoint_apply(&ytil.scale(2.0).sub(eta));
        let xtil = pb.g.prox(
            &self.t,
            &xi.sub(&self.t.apply(&grad)).sub(&self.t.apply(&dual_back)),
        );
        PrimalDualState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: st.x_curr.relax_toward(self.rho, &xtil),
            y_curr: st.y_curr.relax_toward(self.rho, &ytil),
            k: st.k + 1,
        }
    }

    pub fn solve(
        &self,
        st0: PrimalDualState,
        stop: StopRule,
        trace: Option<&mut Trace>,
    ) -> SolveOutcome {
        drive(self.pb, |st| self.step(st), st0, stop, trace)
    }
}

/// Inertial primal-dual splitting: extrapolate both variables, dual prox
/// through the conjugate, primal prox, then relaxation of the pair
/// anchored at the previous iterates. Scalar steps give the basic
/// variant, diagonal steps the preconditioned one.
pub struct IpdsSolver<'a> {
    pb: &'a CompositeProblem,
    t: DiagonalMap,
    sigma: DiagonalMap,
    sched: InertialSchedule,
    pub certificate: StepCertificate,
}

impl<'a> IpdsSolver<'a> {
    pub fn new(
        pb: &'a CompositeProblem,
        steps: StepSizes,
        sched: InertialSchedule,
    ) -> Result<Self> {
        let certificate = validate_for_problem(pb.f.as_ref(), pb.d.as_ref(), &steps)?;
        let (t, sigma) = normalize_pd(pb, &steps)?;
        Ok(IpdsSolver {
            pb,
            t,
            sigma,
            sched,
            certificate,
        })
    }

    pub fn step(&self, st: &PrimalDualState) -> PrimalDualState {
        let pb = self.pb;
        let alpha_k = self.sched.alpha_at(st.k);
        let rho = self.sched.rho();
        let xi = extrapolate(&st.x_curr, &st.x_prev, alpha_k);
        let eta = extrapolate(&st.y_curr, &st.y_prev, alpha_k);
        let ytil = prox_conjugate(
            pb.h.as_ref(),
            &self.sigma,
            &eta.add(&self.sigma.apply(&pb.d.apply(&xi))),
        );
        let grad = pb.f.grad(&xi);
        let dual_back = pb.d.adjoint_apply(&ytil.scale(2.0).sub(&eta));
        let xtil = pb.g.prox(
            &self.t,
            &xi.sub(&self.t.apply(&grad)).sub(&self.t.apply(&dual_back)),
        );
        PrimalDualState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: st.x_curr.relax_toward(rho, &xtil),
            y_curr: st.y_curr.relax_toward(rho, &ytil),
            k: st.k + 1,
        }
    }

    pub fn solve(
        &self,
        st0: PrimalDualState,
        stop: StopRule,
        trace: Option<&mut Trace>,
    ) -> SolveOutcome {
        drive(self.pb, |st| self.step(st), st0, stop, trace)
    }
}

fn map_is_identity(d: &dyn LinearMap) -> bool {
    if d.in_dim() != d.out_dim() {
        return false;
    }
    let mut seen = 0usize;
    for (i, j, v) in d.entries() {
        if i != j || v != 1.0 {
            return false;
        }
        seen += 1;
    }
    seen == d.in_dim()
}

/// Inertial ADMM-style solver: prox of h with step psi (scalar mu), dual
/// ascent, an interpolated image point, and a primal argmin through the
/// prox of g. Supports coupling maps with diagonal D*D; diagonal step
/// maps additionally require D = I.
pub struct IadmmSolver<'a> {
    pb: &'a CompositeProblem,
    t_y: DiagonalMap,
    t_x: DiagonalMap,
    psi: DiagonalMap,
    /// diag of D*D
    lam_inv: DiagonalMap,
    prox_weight: DiagonalMap,
    sched: InertialSchedule,
    pub certificate: StepCertificate,
}

impl<'a> IadmmSolver<'a> {
    pub fn new(
        pb: &'a CompositeProblem,
        steps: StepSizes,
        sched: InertialSchedule,
    ) -> Result<Self> {
        let lam = pb.d.gram_diag().ok_or_else(|| {
            Error::UnsupportedOperator(
                "this solver needs D*D diagonal (identity, block identity, edge operator); \
                 route general D through the primal-dual solver instead"
                    .into(),
            )
        })?;
        let smallest = lam.iter().cloned().fold(f64::MAX, f64::min);
        if smallest <= 0.0 {
            return Err(Error::UnsupportedOperator(
                "D is not injective: smallest singular value estimate is zero".into(),
            ));
        }
        let q = pb.primal_dim();
        let m = pb.dual_dim();
        let (t_y, t_x, psi) = match &steps {
            StepSizes::AdmmScalar { tau, mu } => (
                DiagonalMap::uniform(m, *tau)?,
                DiagonalMap::uniform(q, *tau)?,
                DiagonalMap::uniform(m, *mu)?,
            ),
            StepSizes::AdmmDiagonal { t, psi } => {
                if !map_is_identity(pb.d.as_ref()) {
                    return Err(Error::UnsupportedOperator(
                        "diagonal ADMM steps are supported for D = I only".into(),
                    ));
                }
                (t.clone(), t.clone(), psi.clone())
            }
            _ => {
                return Err(Error::InvalidParameter {
                    name: "steps",
                    reason: "ADMM solvers need AdmmScalar or AdmmDiagonal steps".into(),
                })
            }
        };
        let certificate = validate_for_problem(pb.f.as_ref(), pb.d.as_ref(), &steps)?;
        let lam_inv = DiagonalMap::new(lam.iter().map(|l| 1.0 / l).collect())?;
        let prox_weight = DiagonalMap::new(
            t_x.entries()
                .iter()
                .zip(lam.iter())
                .map(|(t, l)| t / l)
                .collect(),
        )?;
        Ok(IadmmSolver {
            pb,
            t_y,
            t_x,
            psi,
            lam_inv,
            prox_weight,
            sched,
            certificate,
        })
    }

    pub fn step(&self, st: &PrimalDualState) -> PrimalDualState {
        let pb = self.pb;
        let alpha_k = self.sched.alpha_at(st.k);
        let rho = self.sched.rho();
        let xi = extrapolate(&st.x_curr, &st.x_prev, alpha_k);
        let eta = extrapolate(&st.y_curr, &st.y_prev, alpha_k);
        let dxi = pb.d.apply(&xi);
        let z = pb.h.prox(&self.psi, &dxi.add(&self.psi.apply(&eta)));
        let ytil = eta.add(&self.psi.apply_inv(&dxi.sub(&z)));
        // u = (I - T psi^{-1}) D xi + T psi^{-1} z, grouped around D xi
        let u = dxi.add(&self.t_y.apply(&self.psi.apply_inv(&z.sub(&dxi))));
        let target = u.sub(&self.t_y.apply(&ytil));
        let grad = pb.f.grad(&xi);
        let arg = self
            .lam_inv
            .apply(&pb.d.adjoint_apply(&target).sub(&self.t_x.apply(&grad)));
        let xtil = pb.g.prox(&self.prox_weight, &arg);
        PrimalDualState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: st.x_curr.relax_toward(rho, &xtil),
            y_curr: st.y_curr.relax_toward(rho, &ytil),
            k: st.k + 1,
        }
    }

    pub fn solve(
        &self,
        st0: PrimalDualState,
        stop: StopRule,
        trace: Option<&mut Trace>,
    ) -> SolveOutcome {
        drive(self.pb, |st| self.step(st), st0, stop, trace)
    }
}

/// One proximal-gradient step per iteration; the reference member of the
/// family for problems with h = 0.
pub struct ForwardBackwardSolver<'a> {
    pb: &'a CompositeProblem,
    w: DiagonalMap,
    pub tau: f64,
}

impl<'a> ForwardBackwardSolver<'a> {
    pub fn new(pb: &'a CompositeProblem, tau: f64) -> Result<Self> {
        if !pb.h.is_zero() {
            return Err(Error::InvalidParameter {
                name: "problem",
                reason: "forward-backward needs h = 0".into(),
            });
        }
        let l = pb.lipschitz_scalar();
        if !(tau > 0.0 && tau < 2.0 / l) {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("must lie in (0, 2/l) = (0, {}), got {tau}", 2.0 / l),
            });
        }
        Ok(ForwardBackwardSolver {
            pb,
            w: DiagonalMap::uniform(pb.primal_dim(), tau)?,
            tau,
        })
    }

    pub fn step(&self, st: &PrimalDualState) -> PrimalDualState {
        let grad = self.pb.f.grad(&st.x_curr);
        let x_next = self
            .pb
            .g
            .prox(&self.w, &st.x_curr.sub(&self.w.apply(&grad)));
        PrimalDualState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: x_next,
            y_curr: st.y_curr.clone(),
            k: st.k + 1,
        }
    }

    pub fn solve(
        &self,
        st0: PrimalDualState,
        stop: StopRule,
        trace: Option<&mut Trace>,
    ) -> SolveOutcome {
        drive(self.pb, |st| self.step(st), st0, stop, trace)
    }
}

/// Fixed-point optimality residuals of a candidate pair (x, y) under the
/// given diagonal steps: distance of x to its own prox update and of y to
/// its conjugate prox update.
pub fn optimality_residuals(
    pb: &CompositeProblem,
    t: &DiagonalMap,
    sigma: &DiagonalMap,
    x: &Vector,
    y: &Vector,
) -> (f64, f64) {
    let grad = pb.f.grad(x);
    let xr = pb.g.prox(
        t,
        &x.sub(&t.apply(&grad)).sub(&t.apply(&pb.d.adjoint_apply(y))),
    );
    let yr = prox_conjugate(pb.h.as_ref(), sigma, &y.add(&sigma.apply(&pb.d.apply(x))));
    (x.sub(&xr).norm(), y.sub(&yr).norm())
}
