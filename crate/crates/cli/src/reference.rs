//! Reference oracle: a plain proximal-gradient loop at step 1/l, run to
//! tight tolerance. This is the independent yardstick every solver's
//! final objective is compared against — it shares the oracle library
//! with the solvers but none of their step code.

use proxsplit::linops::{DiagonalMap, Vector};
use proxsplit::prox::{prox_l1, SmoothOracle};

use crate::CliError;

pub struct ReferenceSolution {
    pub x: Vector,
    pub objective: f64,
    pub iterations: u64,
}

/// Minimize f(x) + lambda ||x||_1 by iterating the soft-thresholded
/// gradient step until the iterate moves less than `tol`.
pub fn reference_solve(
    f: &dyn SmoothOracle,
    lambda: f64,
    tol: f64,
    max_iters: u64,
) -> Result<ReferenceSolution, CliError> {
    let l = f.cocoercivity_diag().max_entry();
    let tau = 1.0 / l;
    let w = DiagonalMap::uniform(f.dim(), tau).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut x = Vector::zeros(f.dim());
    for iter in 1..=max_iters {
        let grad = f.grad(&x);
        let next = prox_l1(&w, &x.sub(&w.apply(&grad)), lambda)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let moved = next.sub(&x).norm();
        x = next;
        if moved <= tol {
            let objective = f.value(&x) + lambda * x.iter().map(|v| v.abs()).sum::<f64>();
            return Ok(ReferenceSolution {
                x,
                objective,
                iterations: iter,
            });
        }
    }
    Err(CliError::Solver(format!(
        "reference solve did not reach tol {tol} within {max_iters} iterations"
    )))
}
