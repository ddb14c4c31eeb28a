use crate::error::{Error, Result};
use crate::linops::{LinearMap, Vector};
use crate::prox::{ProxOracle, SmoothOracle};

/// The composite problem min f(x) + g(x) + h(Dx), carried as plug-in
/// oracles: gradient of f with its cocoercivity diagonal, prox of g,
/// prox of h, and the coupling map D.
pub struct CompositeProblem {
    pub f: Box<dyn SmoothOracle>,
    pub g: Box<dyn ProxOracle>,
    pub h: Box<dyn ProxOracle>,
    pub d: Box<dyn LinearMap>,
}

impl CompositeProblem {
    pub fn new(
        f: Box<dyn SmoothOracle>,
        g: Box<dyn ProxOracle>,
        h: Box<dyn ProxOracle>,
        d: Box<dyn LinearMap>,
    ) -> Result<Self> {
        let q = d.in_dim();
        if f.dim() != q {
            return Err(Error::DimensionMismatch {
                context: "CompositeProblem f",
                expected: q,
                got: f.dim(),
            });
        }
        if g.dim() != q {
            return Err(Error::DimensionMismatch {
                context: "CompositeProblem g",
                expected: q,
                got: g.dim(),
            });
        }
        if h.dim() != d.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "CompositeProblem h",
                expected: d.out_dim(),
                got: h.dim(),
            });
        }
        if f.cocoercivity_diag().dim() != q {
            return Err(Error::DimensionMismatch {
                context: "CompositeProblem cocoercivity diag",
                expected: q,
                got: f.cocoercivity_diag().dim(),
            });
        }
        Ok(CompositeProblem { f, g, h, d })
    }

    pub fn primal_dim(&self) -> usize {
        self.d.in_dim()
    }

    pub fn dual_dim(&self) -> usize {
        self.d.out_dim()
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        self.f.value(x) + self.g.value(x) + self.h.value(&self.d.apply(x))
    }

    /// Scalar cocoercivity bound: the largest entry of the diagonal E.
    pub fn lipschitz_scalar(&self) -> f64 {
        self.f.cocoercivity_diag().max_entry()
    }
}

/// Current and previous primal/dual iterates, as the inertial updates
/// need both.
#[derive(Debug, Clone)]
pub struct PrimalDualState {
    pub x_prev: Vector,
    pub x_curr: Vector,
    pub y_prev: Vector,
    pub y_curr: Vector,
    pub k: u64,
}

impl PrimalDualState {
    pub fn new(x0: Vector, y0: Vector) -> Self {
        PrimalDualState {
            x_prev: x0.clone(),
            x_curr: x0,
            y_prev: y0.clone(),
            y_curr: y0,
            k: 1,
        }
    }

    pub fn zeros(primal_dim: usize, dual_dim: usize) -> Self {
        Self::new(Vector::zeros(primal_dim), Vector::zeros(dual_dim))
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.x_curr.is_finite() && self.y_curr.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("PrimalDualState"))
        }
    }
}
