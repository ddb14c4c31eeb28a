//! Graph model and the two distributed consensus solvers — the
//! synchronous per-edge-dual iteration and its asynchronous randomized
//! counterpart — run inside a deterministic simulated network.

mod graph;

pub use graph::{build_graph, graph_from_edges, AgentGraph, GraphKind};

use crate::error::{Error, Result};
use crate::km::{CoordinateSampler, InertialSchedule, RunStatus, StopRule};
use crate::linops::{BlockVector, DiagonalMap, Vector};
use crate::minibatch::BatchedProblem;
use crate::pd::StepCertificate;
use crate::trace::Trace;

/// Distribution over agent subsets that wake up at a tick; identical
/// machinery to the coordinate sampler, with the same coverage rule.
pub type ActivationSchedule = CoordinateSampler;

/// Which dual update to use on the edge difference term: the derivation
/// carries the inverse dual step, the displayed algorithm omits it. Both
/// solvers accept either so the pair stays comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualUpdateVariant {
    /// y <- eta + Psi^{-1}(xi_n - xi_m)/2 (follows the derivation; default)
    Derivation,
    /// y <- eta + (xi_n - xi_m)/2 (as the algorithm box prints)
    Printed,
}

/// Per-edge dual pairs: slot 2e holds the lower endpoint's copy, slot
/// 2e+1 the higher endpoint's.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDuals {
    slots: Vec<Vector>,
}

impl EdgeDuals {
    pub fn zeros(num_edges: usize, q: usize) -> Self {
        EdgeDuals {
            slots: (0..2 * num_edges).map(|_| Vector::zeros(q)).collect(),
        }
    }

    pub fn num_edges(&self) -> usize {
        self.slots.len() / 2
    }

    pub fn slot(&self, idx: usize) -> &Vector {
        &self.slots[idx]
    }

    pub fn slot_mut(&mut self, idx: usize) -> &mut Vector {
        &mut self.slots[idx]
    }

    /// max over edges of || y(n) + y(m) ||: zero under antisymmetry.
    pub fn antisymmetry_violation(&self) -> f64 {
        (0..self.num_edges())
            .map(|e| self.slots[2 * e].add(&self.slots[2 * e + 1]).norm())
            .fold(0.0, f64::max)
    }

    fn extrapolate(&self, prev: &EdgeDuals, alpha: f64) -> EdgeDuals {
        if alpha == 0.0 {
            return self.clone();
        }
        EdgeDuals {
            slots: self
                .slots
                .iter()
                .zip(prev.slots.iter())
                .map(|(c, p)| c.add_scaled(alpha, &c.sub(p)))
                .collect(),
        }
    }

    fn distance_sq(&self, other: &EdgeDuals) -> f64 {
        self.slots
            .iter()
            .zip(other.slots.iter())
            .map(|(a, b)| a.sub(b).norm_sq())
            .sum()
    }
}

/// Per-node primal copies plus per-edge dual pairs, with previous values
/// for the inertial extrapolation.
#[derive(Debug, Clone)]
pub struct DistState {
    pub x_prev: BlockVector,
    pub x_curr: BlockVector,
    pub y_prev: EdgeDuals,
    pub y_curr: EdgeDuals,
    pub k: u64,
}

impl DistState {
    pub fn zeros(graph: &AgentGraph, q: usize) -> Self {
        let x = BlockVector::zeros(graph.num_nodes(), q);
        let y = EdgeDuals::zeros(graph.num_edges(), q);
        DistState {
            x_prev: x.clone(),
            x_curr: x,
            y_prev: y.clone(),
            y_curr: y,
            k: 1,
        }
    }
}

/// max_n || x_n - mean || of the current primal copies.
pub fn consensus_error(st: &DistState) -> f64 {
    st.x_curr.consensus_error()
}

/// Header of the distributed-solver CSV trace rows.
pub const DIST_TRACE_HEADER: &str = "k,active_set,objective,consensus_error,residual";

#[derive(Debug)]
pub struct DistOutcome {
    pub status: RunStatus,
    pub state: DistState,
    pub objective_at_mean: f64,
    pub consensus_error: f64,
    pub residual: f64,
    pub iterations: u64,
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

/// Shared solver internals: problem, graph, steps, schedule.
struct DistCore<'a> {
    bp: &'a BatchedProblem,
    graph: &'a AgentGraph,
    t: DiagonalMap,
    psi: DiagonalMap,
    sched: InertialSchedule,
    variant: DualUpdateVariant,
    /// T scaled by 1/d_n per node: the prox weight of agent n.
    node_weights: Vec<DiagonalMap>,
}

impl<'a> DistCore<'a> {
    fn new(
        bp: &'a BatchedProblem,
        graph: &'a AgentGraph,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
        variant: DualUpdateVariant,
    ) -> Result<Self> {
        if bp.num_batches() != graph.num_nodes() {
            return Err(Error::DimensionMismatch {
                context: "distributed problem",
                expected: graph.num_nodes(),
                got: bp.num_batches(),
            });
        }
        if t.dim() != bp.dim() || psi.dim() != bp.dim() {
            return Err(Error::DimensionMismatch {
                context: "distributed steps",
                expected: bp.dim(),
                got: t.dim().max(psi.dim()),
            });
        }
        let node_weights = graph
            .degrees()
            .iter()
            .map(|&d| DiagonalMap::new(t.entries().iter().map(|tj| tj / d as f64).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DistCore {
            bp,
            graph,
            t,
            psi,
            sched,
            variant,
            node_weights,
        })
    }

    fn edge_delta(&self, xi_n: &Vector, xi_m: &Vector) -> Vector {
        match self.variant {
            DualUpdateVariant::Derivation => self.psi.apply_inv(&xi_n.sub(xi_m)).scale(0.5),
            DualUpdateVariant::Printed => xi_n.sub(xi_m).scale(0.5),
        }
    }

    /// (I - T Psi^{-1}) xi_n - (T/d_n) grad + (T/d_n) gather, then the
    /// degree-scaled prox of g_n.
    fn agent_primal(&self, n: usize, xi_n: &Vector, grad: &Vector, gather: &Vector) -> Vector {
        let w = &self.node_weights[n];
        let arg = xi_n
            .sub(&self.t.apply(&self.psi.apply_inv(xi_n)))
            .sub(&w.apply(grad))
            .add(&w.apply(gather));
        self.bp.batch(n).g.prox(w, &arg)
    }
}

/// Synchronous distributed solver: at every tick each agent refreshes its
/// owned edge duals from the extrapolated neighbor values and takes a
/// degree-scaled prox step. Requires antisymmetric initial edge duals.
pub struct DistPadmmSolver<'a> {
    core: DistCore<'a>,
    pub certificate: StepCertificate,
}

impl<'a> DistPadmmSolver<'a> {
    pub fn new(
        bp: &'a BatchedProblem,
        graph: &'a AgentGraph,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
    ) -> Result<Self> {
        Self::with_variant(bp, graph, t, psi, sched, DualUpdateVariant::Derivation)
    }

    pub fn with_variant(
        bp: &'a BatchedProblem,
        graph: &'a AgentGraph,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
        variant: DualUpdateVariant,
    ) -> Result<Self> {
        let certificate = super::pd::validate_step_sizes(
            bp.cocoercivity_diag(),
            &crate::linops::IdentityMap::new(bp.dim()),
            &crate::pd::StepSizes::AdmmDiagonal {
                t: t.clone(),
                psi: psi.clone(),
            },
        )?;
        let core = DistCore::new(bp, graph, t, psi, sched, variant)?;
        Ok(DistPadmmSolver { core, certificate })
    }

    fn check_start(&self, st: &DistState) -> Result<()> {
        let v = st
            .y_curr
            .antisymmetry_violation()
            .max(st.y_prev.antisymmetry_violation());
        if v > 1e-12 {
            return Err(Error::InvalidState(format!(
                "synchronous distributed iteration needs antisymmetric initial edge duals \
                 (violation {v})"
            )));
        }
        Ok(())
    }

    /// Full update of all agents from the extrapolated snapshot.
    pub fn step(&self, st: &DistState) -> Result<DistState> {
        if st.k == 1 {
            self.check_start(st)?;
        }
        let c = &self.core;
        let alpha_k = c.sched.alpha_at(st.k);
        let rho = c.sched.rho();
        let xi = extrapolate_blocks(&st.x_curr, &st.x_prev, alpha_k);
        let eta = st.y_curr.extrapolate(&st.y_prev, alpha_k);
        let mut y_next = eta.clone();
        let mut x_next = xi.clone();
        for n in 0..c.graph.num_nodes() {
            let xi_n = xi.block(n);
            let mut gather = Vector::zeros(c.bp.dim());
            for inc in c.graph.incidences(n) {
                let xi_m = xi.block(inc.neighbor);
                let delta = c.edge_delta(xi_n, xi_m);
                let ytil = eta.slot(inc.own_slot).add(&delta);
                *y_next.slot_mut(inc.own_slot) = eta.slot(inc.own_slot).relax_toward(rho, &ytil);
                gather = gather.add(&c.psi.apply_inv(xi_m).sub(eta.slot(inc.own_slot)));
            }
            let grad = c.bp.batch(n).f.grad(xi_n);
            let xtil = c.agent_primal(n, xi_n, &grad, &gather);
            *x_next.block_mut(n) = xi_n.relax_toward(rho, &xtil);
        }
        Ok(DistState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: x_next,
            y_curr: y_next,
            k: st.k + 1,
        })
    }

    /// Distance between the state and its full no-inertia update.
    pub fn full_residual(&self, st: &DistState) -> f64 {
        let c = &self.core;
        let xi = &st.x_curr;
        let eta = &st.y_curr;
        let mut acc = 0.0;
        for n in 0..c.graph.num_nodes() {
            let xi_n = xi.block(n);
            let mut gather = Vector::zeros(c.bp.dim());
            for inc in c.graph.incidences(n) {
                let xi_m = xi.block(inc.neighbor);
                let delta = c.edge_delta(xi_n, xi_m);
                let ytil = eta.slot(inc.own_slot).add(&delta);
                acc += ytil.sub(eta.slot(inc.own_slot)).norm_sq();
                gather = gather.add(&c.psi.apply_inv(xi_m).sub(eta.slot(inc.own_slot)));
            }
            let grad = c.bp.batch(n).f.grad(xi_n);
            let xtil = c.agent_primal(n, xi_n, &grad, &gather);
            acc += xtil.sub(xi_n).norm_sq();
        }
        acc.sqrt()
    }

    pub fn solve(
        &self,
        st0: DistState,
        stop: StopRule,
        mut trace: Option<&mut Trace>,
    ) -> Result<DistOutcome> {
        let mut st = st0;
        let all: Vec<usize> = (0..self.core.graph.num_nodes()).collect();
        for iter in 1..=stop.max_iters {
            let next = self.step(&st)?;
            let step_res = (next.x_curr.sub(&next.x_prev).norm_sq()
                + next.y_curr.distance_sq(&next.y_prev))
            .sqrt();
            st = next;
            if let Some(tr) = trace.as_deref_mut() {
                push_dist_row(tr, self.core.bp, &st, &all, step_res);
            }
            if step_res <= stop.residual_tol || iter % 100 == 0 {
                let full = self.full_residual(&st);
                if full <= stop.residual_tol {
                    return Ok(outcome(self.core.bp, RunStatus::Converged, st, full, iter));
                }
            }
        }
        let full = self.full_residual(&st);
        let status = if full <= stop.residual_tol {
            RunStatus::Converged
        } else {
            RunStatus::MaxIters
        };
        Ok(outcome(self.core.bp, status, st, full, stop.max_iters))
    }
}

/// Asynchronous randomized solver: a drawn subset of agents refreshes
/// their owned edge duals from both endpoint copies and takes the prox
/// step; everyone else carries the extrapolated values over. Messages
/// from a tick are visible to neighbors at the next tick.
pub struct PdapdsSolver<'a> {
    core: DistCore<'a>,
    pub certificate: StepCertificate,
}

impl<'a> PdapdsSolver<'a> {
    pub fn new(
        bp: &'a BatchedProblem,
        graph: &'a AgentGraph,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
    ) -> Result<Self> {
        Self::with_variant(bp, graph, t, psi, sched, DualUpdateVariant::Derivation)
    }

    pub fn with_variant(
        bp: &'a BatchedProblem,
        graph: &'a AgentGraph,
        t: DiagonalMap,
        psi: DiagonalMap,
        sched: InertialSchedule,
        variant: DualUpdateVariant,
    ) -> Result<Self> {
        let certificate = super::pd::validate_step_sizes(
            bp.cocoercivity_diag(),
            &crate::linops::IdentityMap::new(bp.dim()),
            &crate::pd::StepSizes::AdmmDiagonal {
                t: t.clone(),
                psi: psi.clone(),
            },
        )?;
        let core = DistCore::new(bp, graph, t, psi, sched, variant)?;
        Ok(PdapdsSolver { core, certificate })
    }

    /// One tick with an explicit active set.
    pub fn step_with_active(&self, st: &DistState, active: &[usize]) -> DistState {
        let c = &self.core;
        let alpha_k = c.sched.alpha_at(st.k);
        let rho = c.sched.rho();
        let xi = extrapolate_blocks(&st.x_curr, &st.x_prev, alpha_k);
        let eta = st.y_curr.extrapolate(&st.y_prev, alpha_k);
        // carry-over defaults: extrapolated values everywhere
        let mut x_next = xi.clone();
        let mut y_next = eta.clone();
        for &n in active {
            let xi_n = xi.block(n);
            let mut gather = Vector::zeros(c.bp.dim());
            for inc in c.graph.incidences(n) {
                let xi_m = xi.block(inc.neighbor);
                let own = eta.slot(inc.own_slot);
                let other = eta.slot(inc.other_slot);
                let delta = c.edge_delta(xi_n, xi_m);
                let ytil = own.sub(other).scale(0.5).add(&delta);
                *y_next.slot_mut(inc.own_slot) = own.relax_toward(rho, &ytil);
                // neighbor term enters with the neighbor's own dual copy
                gather = gather.add(&c.psi.apply_inv(xi_m).add(other));
            }
            let grad = c.bp.batch(n).f.grad(xi_n);
            let xtil = c.agent_primal(n, xi_n, &grad, &gather);
            *x_next.block_mut(n) = xi_n.relax_toward(rho, &xtil);
        }
        DistState {
            x_prev: st.x_curr.clone(),
            y_prev: st.y_curr.clone(),
            x_curr: x_next,
            y_curr: y_next,
            k: st.k + 1,
        }
    }

    pub fn step(&self, activation: &mut ActivationSchedule, st: &DistState) -> DistState {
        let active = activation.draw().to_vec();
        self.step_with_active(st, &active)
    }

    /// Distance between the state and its all-agents update under this
    /// solver's map.
    pub fn full_residual(&self, st: &DistState) -> f64 {
        let c = &self.core;
        let xi = &st.x_curr;
        let eta = &st.y_curr;
        let mut acc = 0.0;
        for n in 0..c.graph.num_nodes() {
            let xi_n = xi.block(n);
            let mut gather = Vector::zeros(c.bp.dim());
            for inc in c.graph.incidences(n) {
                let xi_m = xi.block(inc.neighbor);
                let own = eta.slot(inc.own_slot);
                let other = eta.slot(inc.other_slot);
                let delta = c.edge_delta(xi_n, xi_m);
                let ytil = own.sub(other).scale(0.5).add(&delta);
                acc += ytil.sub(own).norm_sq();
                gather = gather.add(&c.psi.apply_inv(xi_m).add(other));
            }
            let grad = c.bp.batch(n).f.grad(xi_n);
            let xtil = c.agent_primal(n, xi_n, &grad, &gather);
            acc += xtil.sub(xi_n).norm_sq();
        }
        acc.sqrt()
    }

    pub fn solve(
        &self,
        activation: &mut ActivationSchedule,
        st0: DistState,
        stop: StopRule,
        mut trace: Option<&mut Trace>,
    ) -> Result<DistOutcome> {
        if activation.num_blocks() != self.core.graph.num_nodes() {
            return Err(Error::InvalidSampler(format!(
                "activation covers {} agents, graph has {}",
                activation.num_blocks(),
                self.core.graph.num_nodes()
            )));
        }
        let mut st = st0;
        for iter in 1..=stop.max_iters {
            let active = activation.draw().to_vec();
            let next = self.step_with_active(&st, &active);
            let step_res = (next.x_curr.sub(&next.x_prev).norm_sq()
                + next.y_curr.distance_sq(&next.y_prev))
            .sqrt();
            st = next;
            if let Some(tr) = trace.as_deref_mut() {
                push_dist_row(tr, self.core.bp, &st, &active, step_res);
            }
            if step_res <= stop.residual_tol || iter % 100 == 0 {
                let full = self.full_residual(&st);
                if full <= stop.residual_tol {
                    return Ok(outcome(self.core.bp, RunStatus::Converged, st, full, iter));
                }
            }
        }
        let full = self.full_residual(&st);
        let status = if full <= stop.residual_tol {
            RunStatus::Converged
        } else {
            RunStatus::MaxIters
        };
        Ok(outcome(self.core.bp, status, st, full, stop.max_iters))
    }
}

fn push_dist_row(
    tr: &mut Trace,
    bp: &BatchedProblem,
    st: &DistState,
    active: &[usize],
    residual: f64,
) {
    let mean = st.x_curr.mean_block();
    let set = active
        .iter()
        .map(|n| (n + 1).to_string())
        .collect::<Vec<_>>()
        .join("|");
    tr.push_row(format!(
        "{},{},{},{},{}",
        st.k,
        set,
        bp.objective_at(&mean),
        st.x_curr.consensus_error(),
        residual
    ));
}

fn outcome(
    bp: &BatchedProblem,
    status: RunStatus,
    st: DistState,
    residual: f64,
    iterations: u64,
) -> DistOutcome {
    let mean = st.x_curr.mean_block();
    DistOutcome {
        status,
        objective_at_mean: bp.objective_at(&mean),
        consensus_error: st.x_curr.consensus_error(),
        residual,
        iterations,
        state: st,
    }
}
