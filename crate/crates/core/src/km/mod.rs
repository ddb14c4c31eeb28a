//! Inertial Krasnosel'skii–Mann fixed-point iteration with randomized
//! coordinate-block activation: the substrate every solver in this crate
//! reduces to, plus the parameter validation that gates it.

mod sampler;
mod schedule;

pub use sampler::CoordinateSampler;
pub use schedule::{validate_schedule, InertialSchedule};

use crate::linops::Vector;
use crate::trace::Trace;

/// A point split into coordinate blocks. Unlike [`crate::linops::BlockVector`],
/// blocks may have different dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPoint {
    blocks: Vec<Vector>,
}

impl BlockPoint {
    pub fn new(blocks: Vec<Vector>) -> Self {
        assert!(!blocks.is_empty(), "a block point needs at least one block");
        BlockPoint { blocks }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, j: usize) -> &Vector {
        &self.blocks[j]
    }

    pub fn set_block(&mut self, j: usize, v: Vector) {
        assert_eq!(v.dim(), self.blocks[j].dim(), "block dimension changed");
        self.blocks[j] = v;
    }

    pub fn blocks(&self) -> &[Vector] {
        &self.blocks
    }

    /// Euclidean distance over all blocks.
    pub fn distance(&self, other: &BlockPoint) -> f64 {
        assert_eq!(self.num_blocks(), other.num_blocks());
        self.blocks
            .iter()
            .zip(other.blocks.iter())
            .map(|(a, b)| a.sub(b).norm_sq())
            .sum::<f64>()
            .sqrt()
    }

    /// self + alpha (self - prev), blockwise. Alpha of zero returns an
    /// exact copy so degenerate schedules stay bit-identical.
    pub fn extrapolate(&self, prev: &BlockPoint, alpha: f64) -> BlockPoint {
        if alpha == 0.0 {
            return self.clone();
        }
        BlockPoint {
            blocks: self
                .blocks
                .iter()
                .zip(prev.blocks.iter())
                .map(|(c, p)| c.add_scaled(alpha, &c.sub(p)))
                .collect(),
        }
    }
}

/// Operator with coordinate-block structure: apply_block(j, w) must equal
/// block j of apply(w) exactly. The default apply assembles blockwise,
/// which makes that identity hold by construction.
pub trait BlockOperator: Send + Sync {
    fn num_blocks(&self) -> usize;
    fn apply_block(&self, j: usize, w: &BlockPoint) -> Vector;

    fn apply(&self, w: &BlockPoint) -> BlockPoint {
        BlockPoint::new(
            (0..self.num_blocks())
                .map(|j| self.apply_block(j, w))
                .collect(),
        )
    }
}

/// Iterate pair (x^{k-1}, x^k) plus the step counter.
#[derive(Debug, Clone)]
pub struct KMState {
    pub x_prev: BlockPoint,
    pub x_curr: BlockPoint,
    pub k: u64,
}

impl KMState {
    pub fn new(x0: BlockPoint) -> Self {
        KMState {
            x_prev: x0.clone(),
            x_curr: x0,
            k: 1,
        }
    }
}

/// One inertial KM step on the active blocks:
/// w = x^k + alpha_k (x^k - x^{k-1}), then for active j the new block is
/// (1 - rho) w_j + rho T_j(w), while inactive blocks keep w_j.
pub fn km_step(
    t: &dyn BlockOperator,
    st: &KMState,
    sched: &InertialSchedule,
    active: &[usize],
) -> KMState {
    assert!(!active.is_empty(), "active set must be nonempty");
    let alpha_k = sched.alpha_at(st.k);
    let w = st.x_curr.extrapolate(&st.x_prev, alpha_k);
    let rho = sched.rho();
    let mut next = w.clone();
    for &j in active {
        let tj = t.apply_block(j, &w);
        next.set_block(j, w.block(j).relax_toward(rho, &tj));
    }
    KMState {
        x_prev: st.x_curr.clone(),
        x_curr: next,
        k: st.k + 1,
    }
}

/// ||T(x) - x||_2 over all blocks.
pub fn fixed_point_residual(t: &dyn BlockOperator, x: &BlockPoint) -> f64 {
    t.apply(x).distance(x)
}

#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub max_iters: u64,
    pub residual_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIters,
}

#[derive(Debug)]
pub struct KmRun {
    pub status: RunStatus,
    pub state: KMState,
    pub final_residual: f64,
    pub iterations: u64,
}

/// Header of the engine's CSV trace rows.
pub const KM_TRACE_HEADER: &str = "k,residual,metric";

/// Drive the randomized inertial KM iteration until the full fixed-point
/// residual drops below tolerance or the iteration budget runs out.
///
/// The step residual ||x^{k+1} - x^k|| is cheap and recorded every
/// iteration; the full residual ||T(x) - x|| is evaluated every 100
/// iterations and whenever the step residual is already below tolerance.
pub fn run(
    t: &dyn BlockOperator,
    sampler: &mut CoordinateSampler,
    sched: &InertialSchedule,
    stop: StopRule,
    x0: BlockPoint,
    mut trace: Option<&mut Trace>,
    metric: Option<&dyn Fn(&BlockPoint) -> f64>,
) -> KmRun {
    assert_eq!(sampler.num_blocks(), t.num_blocks());
    let mut st = KMState::new(x0);
    let mut last_step_res = f64::MAX;
    for iter in 1..=stop.max_iters {
        let active = sampler.draw().to_vec();
        st = km_step(t, &st, sched, &active);
        last_step_res = st.x_curr.distance(&st.x_prev);
        if let Some(tr) = trace.as_deref_mut() {
            let m = metric
                .map(|f| f(&st.x_curr).to_string())
                .unwrap_or_default();
            tr.push_row(format!("{},{},{}", st.k, last_step_res, m));
        }
        if last_step_res <= stop.residual_tol || iter % 100 == 0 {
            let fp = fixed_point_residual(t, &st.x_curr);
            if fp <= stop.residual_tol {
                return KmRun {
                    status: RunStatus::Converged,
                    state: st,
                    final_residual: fp,
                    iterations: iter,
                };
            }
        }
    }
    let fp = fixed_point_residual(t, &st.x_curr);
    KmRun {
        status: if fp <= stop.residual_tol {
            RunStatus::Converged
        } else {
            RunStatus::MaxIters
        },
        state: st,
        final_residual: if fp.is_finite() { fp } else { last_step_res },
        iterations: stop.max_iters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Constant map to a fixed point c.
    struct ConstMap {
        c: Vec<Vector>,
    }

    impl BlockOperator for ConstMap {
        fn num_blocks(&self) -> usize {
            self.c.len()
        }
        fn apply_block(&self, j: usize, _w: &BlockPoint) -> Vector {
            self.c[j].clone()
        }
    }

    struct IdentityOp {
        blocks: usize,
    }

    impl BlockOperator for IdentityOp {
        fn num_blocks(&self) -> usize {
            self.blocks
        }
        fn apply_block(&self, j: usize, w: &BlockPoint) -> Vector {
            w.block(j).clone()
        }
    }

    fn point(vals: &[f64]) -> BlockPoint {
        BlockPoint::new(vals.iter().map(|&v| Vector::from_slice(&[v])).collect())
    }

    #[test]
    fn picard_with_degenerate_parameters() {
        // alpha = 0, rho = 1, all blocks active: x^{k+1} = T(x^k)
        let t = ConstMap {
            c: vec![Vector::from_slice(&[3.0]), Vector::from_slice(&[-1.0])],
        };
        let sched = InertialSchedule::unvalidated(0.0, 1.0);
        let st = KMState::new(point(&[0.0, 0.0]));
        let next = km_step(&t, &st, &sched, &[0, 1]);
        assert_eq!(next.x_curr, point(&[3.0, -1.0]));
    }

    #[test]
    fn identity_operator_keeps_inertia_only() {
        let t = IdentityOp { blocks: 2 };
        let sched = InertialSchedule::unvalidated(0.5, 0.7);
        let mut st = KMState::new(point(&[1.0, 2.0]));
        st.x_prev = point(&[0.0, 0.0]);
        st.k = 2; // inertia active
        let next = km_step(&t, &st, &sched, &[0]);
        // w = x + 0.5(x - x_prev); T = id so every block ends at w
        assert_eq!(next.x_curr, point(&[1.5, 3.0]));
    }

    #[test]
    fn constant_map_partial_activation() {
        // T = const c, alpha = 0, rho = 0.5, only block 0 active from 0
        let t = ConstMap {
            c: vec![Vector::from_slice(&[4.0]), Vector::from_slice(&[4.0])],
        };
        let sched = InertialSchedule::unvalidated(0.0, 0.5);
        let st = KMState::new(point(&[0.0, 0.0]));
        let next = km_step(&t, &st, &sched, &[0]);
        assert_eq!(next.x_curr, point(&[2.0, 0.0]));
    }

    #[test]
    fn residual_of_fixed_point_is_zero() {
        let t = ConstMap {
            c: vec![Vector::from_slice(&[3.0])],
        };
        assert_eq!(fixed_point_residual(&t, &point(&[3.0])), 0.0);
        let id = IdentityOp { blocks: 1 };
        assert_eq!(fixed_point_residual(&id, &point(&[123.0])), 0.0);
        // constant map from 0: residual is ||c||
        assert_eq!(fixed_point_residual(&t, &point(&[0.0])), 3.0);
    }

    #[test]
    fn translation_map_never_converges() {
        struct Translate;
        impl BlockOperator for Translate {
            fn num_blocks(&self) -> usize {
                1
            }
            fn apply_block(&self, _j: usize, w: &BlockPoint) -> Vector {
                w.block(0).add_scaled(1.0, &Vector::from_slice(&[1.0]))
            }
        }
        let mut sampler = CoordinateSampler::always_full(1, 1);
        let sched = InertialSchedule::unvalidated(0.0, 1.0);
        let out = run(
            &Translate,
            &mut sampler,
            &sched,
            StopRule {
                max_iters: 100,
                residual_tol: 1e-10,
            },
            point(&[0.0]),
            None,
            None,
        );
        assert_eq!(out.status, RunStatus::MaxIters);
        assert!(out.final_residual > 0.5);
    }
}
