//! Vectors, block vectors, diagonal maps, sparse linear operators, the
//! graph edge-replication operator, and the norm/metric utilities shared
//! by every solver.

mod diag;
mod edge;
mod sparse;
mod vector;

pub use diag::DiagonalMap;
pub use edge::EdgeOperator;
pub use sparse::{DiagSandwich, IdentityMap, SparseMatrix, ZeroMap};
pub use vector::{BlockVector, Vector};

use crate::error::{Error, Result};

/// A linear map between finite-dimensional Euclidean spaces, with its
/// adjoint and entry access for the absolute-power sums the diagonal
/// preconditioner needs.
pub trait LinearMap: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: &Vector) -> Vector;
    fn adjoint_apply(&self, y: &Vector) -> Vector;
    /// Nonzero entries as (row, col, value).
    fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_>;

    /// The diagonal of D*D when D*D is exactly diagonal, else None.
    /// Identity-like maps and the edge operator qualify.
    fn gram_diag(&self) -> Option<Vec<f64>> {
        None
    }
}

/// D* y with a dimension check.
pub fn apply_adjoint(d: &dyn LinearMap, y: &Vector) -> Result<Vector> {
    if y.dim() != d.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "apply_adjoint",
            expected: d.out_dim(),
            got: y.dim(),
        });
    }
    Ok(d.adjoint_apply(y))
}

/// Row sums of |D_ij|^s and column sums of |D_ij|^{2-s}, for s in [0, 2].
///
/// Only stored nonzeros contribute, which realizes the 0^0 = 0 convention
/// for the exponent-zero cases.
pub fn power_sums(d: &dyn LinearMap, s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("must lie in [0, 2], got {s}"),
        });
    }
    let mut row_sums = vec![0.0; d.out_dim()];
    let mut col_sums = vec![0.0; d.in_dim()];
    for (i, j, v) in d.entries() {
        if v == 0.0 {
            continue;
        }
        let a = v.abs();
        row_sums[i] += a.powf(s);
        col_sums[j] += a.powf(2.0 - s);
    }
    Ok((row_sums, col_sums))
}

const POWER_ITER_CAP: usize = 1000;

/// Squared operator norm of M via power iteration on M*M.
///
/// Deterministic: starts from the normalized all-ones vector and falls
/// back to a fixed pseudorandom vector if the iterate collapses into the
/// kernel. Stops when the Rayleigh quotient changes by less than `tol`
/// relative; errors past the 1000-iteration cap with the best estimate.
pub fn operator_norm_sq(m: &dyn LinearMap, tol: f64) -> Result<f64> {
    operator_norm_sq_capped(m, tol, POWER_ITER_CAP)
}

/// [`operator_norm_sq`] with an explicit iteration budget, for validator
/// checks on operators whose spectrum clusters near the top.
pub fn operator_norm_sq_capped(m: &dyn LinearMap, tol: f64, cap: usize) -> Result<f64> {
    let n = m.in_dim();
    if n == 0 || m.out_dim() == 0 {
        return Ok(0.0);
    }
    let mut start = 0u64;
    'restart: loop {
        let mut v = if start == 0 {
            Vector::from_slice(&vec![1.0 / (n as f64).sqrt(); n])
        } else {
            // splitmix64 stream, fixed seeds: deterministic restarts
            let mut state = 0x9e3779b97f4a7c15u64.wrapping_mul(start);
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                state = state.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                z ^= z >> 31;
                data.push((z >> 11) as f64 / (1u64 << 52) as f64 - 0.5);
            }
            let v = Vector::from_slice(&data);
            let nrm = v.norm();
            v.scale(1.0 / nrm)
        };
        let mut lambda = 0.0;
        for _iter in 0..cap {
            let mv = m.apply(&v);
            let new_lambda = mv.norm_sq();
            if new_lambda == 0.0 {
                if start >= 2 {
                    // three independent starts annihilated: treat as zero map
                    return Ok(0.0);
                }
                start += 1;
                continue 'restart;
            }
            if (new_lambda - lambda).abs() <= tol * new_lambda.max(f64::MIN_POSITIVE) {
                return Ok(new_lambda);
            }
            lambda = new_lambda;
            let w = m.adjoint_apply(&mv);
            let wn = w.norm();
            if wn == 0.0 {
                if start >= 2 {
                    return Ok(0.0);
                }
                start += 1;
                continue 'restart;
            }
            v = w.scale(1.0 / wn);
        }
        return Err(Error::PowerIterationStalled {
            iters: cap,
            best: lambda,
        });
    }
}

/// <z1, P z2> for the block metric P = [[1/tau, D*], [D, 1/sigma]] on
/// primal-dual pairs.
pub fn p_inner(
    z1: (&Vector, &Vector),
    z2: (&Vector, &Vector),
    tau: f64,
    sigma: f64,
    d: &dyn LinearMap,
) -> Result<f64> {
    let (x1, y1) = z1;
    let (x2, y2) = z2;
    if x1.dim() != x2.dim() || x1.dim() != d.in_dim() {
        return Err(Error::DimensionMismatch {
            context: "p_inner primal",
            expected: d.in_dim(),
            got: x1.dim(),
        });
    }
    if y1.dim() != y2.dim() || y1.dim() != d.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "p_inner dual",
            expected: d.out_dim(),
            got: y1.dim(),
        });
    }
    Ok(x1.dot(x2) / tau + x1.dot(&d.adjoint_apply(y2)) + y1.dot(&d.apply(x2)) + y1.dot(y2) / sigma)
}
