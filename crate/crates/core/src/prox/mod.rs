//! Proximity operators, projections, smooth-loss oracles, and
//! cocoercivity-bound estimation, used as plug-in oracles by all solvers.

mod logistic;

pub use logistic::{cocoercivity_diag_logistic, logistic_oracle, LogisticLoss};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linops::{operator_norm_sq, BlockVector, DiagonalMap, LinearMap, Vector};

/// Proximity operator of a convex function g in a diagonal metric:
/// prox(W, v) = argmin_w g(w) + 1/2 ||w - v||^2_{W^{-1}}.
///
/// Every implementation is firmly nonexpansive in the W^{-1} inner
/// product; the property suite probes this on random pairs.
pub trait ProxOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn prox(&self, w: &DiagonalMap, v: &Vector) -> Vector;
    /// Function value at v, for logging. Indicators report 0.
    fn value(&self, v: &Vector) -> f64;
    /// True for the zero function; lets solvers check the h = 0 special
    /// cases they require.
    fn is_zero(&self) -> bool {
        false
    }
}

/// Differentiable convex loss with a cocoercive gradient:
/// <grad(x) - grad(y), x - y> >= ||grad(x) - grad(y)||^2_{E^{-1}}.
pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn grad(&self, x: &Vector) -> Vector;
    fn cocoercivity_diag(&self) -> &DiagonalMap;
}

/// Componentwise soft threshold: argmin_w lambda*||w||_1 + 1/2||w-v||^2_{W^{-1}},
/// which thresholds coordinate j at lambda * W_jj.
pub fn prox_l1(w: &DiagonalMap, v: &Vector, lambda: f64) -> Result<Vector> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be nonnegative, got {lambda}"),
        });
    }
    if w.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            context: "prox_l1",
            expected: w.dim(),
            got: v.dim(),
        });
    }
    let out: Vec<f64> = v
        .iter()
        .zip(w.entries().iter())
        .map(|(&vj, &wj)| {
            let t = lambda * wj;
            vj.signum() * (vj.abs() - t).max(0.0)
        })
        .collect();
    Ok(Vector::from_slice(&out))
}

/// Replace every block by the block average: the orthogonal projection
/// onto the consensus subspace.
pub fn project_consensus(x: &BlockVector) -> BlockVector {
    let mean = x.mean_block();
    BlockVector::replicate(x.num_blocks(), mean)
}

/// Projection of a pair onto {(x, -x)}: ((a-b)/2, (b-a)/2).
pub fn project_pair_anticonsensus(p: (&Vector, &Vector)) -> Result<(Vector, Vector)> {
    let (a, b) = p;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "project_pair_anticonsensus",
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let half_diff = a.sub(b).scale(0.5);
    let neg = half_diff.scale(-1.0);
    Ok((half_diff, neg))
}

/// prox of the conjugate in a diagonal metric via the Moreau identity:
/// prox_{Sigma h*}(y) = y - Sigma · prox_h(Sigma^{-1}-metric, Sigma^{-1} y).
pub fn prox_conjugate(prox_h: &dyn ProxOracle, sigma: &DiagonalMap, y: &Vector) -> Vector {
    let sigma_inv = sigma.inverse();
    let inner = prox_h.prox(&sigma_inv, &sigma_inv.apply(y));
    y.sub(&sigma.apply(&inner))
}

/// g = 0: the prox is the identity.
#[derive(Debug, Clone)]
pub struct ZeroProx {
    dim: usize,
}

impl ZeroProx {
    pub fn new(dim: usize) -> Self {
        ZeroProx { dim }
    }
}

impl ProxOracle for ZeroProx {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox(&self, _w: &DiagonalMap, v: &Vector) -> Vector {
        v.clone()
    }

    fn value(&self, _v: &Vector) -> f64 {
        0.0
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// g = lambda * ||.||_1.
#[derive(Debug, Clone)]
pub struct L1Prox {
    dim: usize,
    lambda: f64,
}

impl L1Prox {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be nonnegative, got {lambda}"),
            });
        }
        Ok(L1Prox { dim, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl ProxOracle for L1Prox {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox(&self, w: &DiagonalMap, v: &Vector) -> Vector {
        prox_l1(w, v, self.lambda).expect("validated at construction")
    }

    fn value(&self, v: &Vector) -> f64 {
        self.lambda * v.iter().map(|x| x.abs()).sum::<f64>()
    }
}

/// Indicator of the single point {target}; the prox is the constant map.
#[derive(Debug, Clone)]
pub struct PointProx {
    target: Vector,
}

impl PointProx {
    pub fn new(target: Vector) -> Self {
        PointProx { target }
    }
}

impl ProxOracle for PointProx {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn prox(&self, _w: &DiagonalMap, _v: &Vector) -> Vector {
        self.target.clone()
    }

    fn value(&self, _v: &Vector) -> f64 {
        0.0
    }
}

/// h(y) = sum over pairs of the indicator of {(x, x)}; the W-metric prox
/// replaces each pair by its W^{-1}-weighted average.
#[derive(Debug, Clone)]
pub struct PairConsensusProx {
    pairs: usize,
    q: usize,
}

impl PairConsensusProx {
    pub fn new(pairs: usize, q: usize) -> Self {
        PairConsensusProx { pairs, q }
    }
}

impl ProxOracle for PairConsensusProx {
    fn dim(&self) -> usize {
        2 * self.pairs * self.q
    }

    fn prox(&self, w: &DiagonalMap, v: &Vector) -> Vector {
        assert_eq!(v.dim(), self.dim());
        assert_eq!(w.dim(), self.dim());
        let mut out = vec![0.0; v.dim()];
        for p in 0..self.pairs {
            let base = 2 * p * self.q;
            for k in 0..self.q {
                let ia = base + k;
                let ib = base + self.q + k;
                let (a, b) = (v.get(ia), v.get(ib));
                let (wa, wb) = (w.get(ia), w.get(ib));
                // minimize (c-a)^2/(2 wa) + (c-b)^2/(2 wb)
                let c = (a / wa + b / wb) / (1.0 / wa + 1.0 / wb);
                out[ia] = c;
                out[ib] = c;
            }
        }
        Vector::from_slice(&out)
    }

    fn value(&self, _v: &Vector) -> f64 {
        0.0
    }
}

/// f = 1/2 ||Ax - b||^2 with cocoercivity bound ||A||^2 I.
pub struct QuadraticLoss {
    a: Arc<dyn LinearMap>,
    b: Vector,
    coco: DiagonalMap,
}

impl QuadraticLoss {
    pub fn new(a: Arc<dyn LinearMap>, b: Vector) -> Result<Self> {
        if b.dim() != a.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "QuadraticLoss",
                expected: a.out_dim(),
                got: b.dim(),
            });
        }
        let norm_sq = operator_norm_sq(a.as_ref(), 1e-9)?;
        let coco = DiagonalMap::uniform(a.in_dim(), norm_sq.max(f64::MIN_POSITIVE))?;
        Ok(QuadraticLoss { a, b, coco })
    }
}

impl SmoothOracle for QuadraticLoss {
    fn dim(&self) -> usize {
        self.a.in_dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.a.apply(x).sub(&self.b).norm_sq()
    }

    fn grad(&self, x: &Vector) -> Vector {
        self.a.adjoint_apply(&self.a.apply(x).sub(&self.b))
    }

    fn cocoercivity_diag(&self) -> &DiagonalMap {
        &self.coco
    }
}

/// f = weight/2 ||x - center||^2.
pub struct PointQuadratic {
    center: Vector,
    weight: f64,
    coco: DiagonalMap,
}

impl PointQuadratic {
    pub fn new(center: Vector, weight: f64) -> Result<Self> {
        if weight <= 0.0 || !weight.is_finite() {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: format!("must be positive, got {weight}"),
            });
        }
        let coco = DiagonalMap::uniform(center.dim(), weight)?;
        Ok(PointQuadratic {
            center,
            weight,
            coco,
        })
    }
}

impl SmoothOracle for PointQuadratic {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.weight * x.sub(&self.center).norm_sq()
    }

    fn grad(&self, x: &Vector) -> Vector {
        x.sub(&self.center).scale(self.weight)
    }

    fn cocoercivity_diag(&self) -> &DiagonalMap {
        &self.coco
    }
}

/// c * f for a positive constant c; the cocoercivity diagonal scales by c.
pub struct ScaledSmooth {
    inner: Box<dyn SmoothOracle>,
    scale: f64,
    coco: DiagonalMap,
}

impl ScaledSmooth {
    pub fn new(inner: Box<dyn SmoothOracle>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be positive, got {scale}"),
            });
        }
        let coco = DiagonalMap::new(
            inner
                .cocoercivity_diag()
                .entries()
                .iter()
                .map(|e| e * scale)
                .collect(),
        )?;
        Ok(ScaledSmooth { inner, scale, coco })
    }
}

impl SmoothOracle for ScaledSmooth {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.scale * self.inner.value(x)
    }

    fn grad(&self, x: &Vector) -> Vector {
        self.inner.grad(x).scale(self.scale)
    }

    fn cocoercivity_diag(&self) -> &DiagonalMap {
        &self.coco
    }
}

/// f = 0. Carries a unit cocoercivity diagonal, which bounds the zero
/// gradient and keeps derived step sizes finite.
pub struct ZeroSmooth {
    dim: usize,
    coco: DiagonalMap,
}

impl ZeroSmooth {
    pub fn new(dim: usize) -> Self {
        ZeroSmooth {
            dim,
            coco: DiagonalMap::identity(dim),
        }
    }
}

impl SmoothOracle for ZeroSmooth {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }

    fn grad(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.dim)
    }

    fn cocoercivity_diag(&self) -> &DiagonalMap {
        &self.coco
    }
}
