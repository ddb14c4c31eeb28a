use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linops::{operator_norm_sq, DiagonalMap, LinearMap, Vector};
use crate::prox::SmoothOracle;

/// log(1 + exp(u)) without overflow. Past |u| = 30 the neglected branch
/// is below 1e-13, so the asymptotic form takes over.
#[inline]
pub(crate) fn log1p_exp(u: f64) -> f64 {
    if u > 30.0 {
        u + (-u).exp().ln_1p()
    } else if u < -30.0 {
        u.exp()
    } else {
        u.exp().ln_1p()
    }
}

/// 1 / (1 + exp(-u)) without overflow.
#[inline]
pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic loss and its gradient at x:
/// value = (1/m) sum_i log(1 + exp(-y_i a_i^T x)),
/// grad  = (1/m) sum_i -y_i a_i sigmoid(-y_i a_i^T x).
pub fn logistic_oracle(a: &dyn LinearMap, labels: &[f64], x: &Vector) -> Result<(f64, Vector)> {
    if labels.len() != a.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "logistic_oracle labels",
            expected: a.out_dim(),
            got: labels.len(),
        });
    }
    if x.dim() != a.in_dim() {
        return Err(Error::DimensionMismatch {
            context: "logistic_oracle x",
            expected: a.in_dim(),
            got: x.dim(),
        });
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidParameter {
            name: "labels",
            reason: "labels must be +1 or -1".into(),
        });
    }
    let m = labels.len() as f64;
    let scores = a.apply(x);
    let mut value = 0.0;
    let mut coeffs = vec![0.0; labels.len()];
    for (i, (&y, s)) in labels.iter().zip(scores.iter()).enumerate() {
        let margin = y * s;
        value += log1p_exp(-margin);
        coeffs[i] = -y * sigmoid(-margin) / m;
    }
    let grad = a.adjoint_apply(&Vector::from_slice(&coeffs));
    Ok((value / m, grad))
}

/// Cocoercivity diagonal for the mean logistic loss: E = L I with
/// L = ||A||^2 / (4m), from the 1/4 bound on the logistic curvature.
pub fn cocoercivity_diag_logistic(a: &dyn LinearMap, m: usize) -> Result<DiagonalMap> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "sample count must be positive".into(),
        });
    }
    let norm_sq = operator_norm_sq(a, 1e-9)?;
    let l = (norm_sq / (4.0 * m as f64)).max(f64::MIN_POSITIVE);
    DiagonalMap::uniform(a.in_dim(), l)
}

/// Mean logistic loss as a smooth oracle over a fixed dataset.
pub struct LogisticLoss {
    a: Arc<dyn LinearMap>,
    labels: Vec<f64>,
    coco: DiagonalMap,
}

impl LogisticLoss {
    pub fn new(a: Arc<dyn LinearMap>, labels: Vec<f64>) -> Result<Self> {
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidParameter {
                name: "labels",
                reason: "labels must be +1 or -1".into(),
            });
        }
        if labels.len() != a.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "LogisticLoss",
                expected: a.out_dim(),
                got: labels.len(),
            });
        }
        let coco = cocoercivity_diag_logistic(a.as_ref(), labels.len())?;
        Ok(LogisticLoss { a, labels, coco })
    }

    pub fn sample_count(&self) -> usize {
        self.labels.len()
    }
}

impl SmoothOracle for LogisticLoss {
    fn dim(&self) -> usize {
        self.a.in_dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        logistic_oracle(self.a.as_ref(), &self.labels, x)
            .expect("validated at construction")
            .0
    }

    fn grad(&self, x: &Vector) -> Vector {
        logistic_oracle(self.a.as_ref(), &self.labels, x)
            .expect("validated at construction")
            .1
    }

    fn cocoercivity_diag(&self) -> &DiagonalMap {
        &self.coco
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{IdentityMap, SparseMatrix};

    #[test]
    fn value_at_zero_is_log_two() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let labels = [1.0, -1.0];
        let (v, g) = logistic_oracle(&a, &labels, &Vector::zeros(2)).unwrap();
        assert!((v - 2.0_f64.ln()).abs() < 1e-15);
        // grad at 0 = -(1/m) sum y_i a_i / 2
        let samples = [(1.0, [1.0, 2.0]), (-1.0, [-1.0, 0.5])];
        let expected: Vec<f64> = (0..2)
            .map(|j| -samples.iter().map(|(y, a)| y * a[j]).sum::<f64>() / 2.0 / 2.0)
            .collect();
        for (gi, ei) in g.iter().zip(expected.iter()) {
            assert!((gi - ei).abs() < 1e-15);
        }
    }

    #[test]
    fn value_monotone_to_zero_for_separable_sample() {
        let a = SparseMatrix::from_dense(&[vec![1.0]]).unwrap();
        let labels = [1.0];
        let mut last = f64::MAX;
        for t in [0.0, 1.0, 10.0, 100.0, 700.0] {
            let (v, _) = logistic_oracle(&a, &labels, &Vector::from_slice(&[t])).unwrap();
            assert!(v.is_finite());
            assert!(v <= last);
            last = v;
        }
        assert!(last < 1e-200);
    }

    #[test]
    fn stable_for_large_negative_margin() {
        let a = SparseMatrix::from_dense(&[vec![1.0]]).unwrap();
        let labels = [1.0];
        let (v, g) = logistic_oracle(&a, &labels, &Vector::from_slice(&[-700.0])).unwrap();
        assert!(v.is_finite());
        assert!((v - 700.0).abs() < 1e-9);
        assert!((g.get(0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_labels() {
        let a = SparseMatrix::from_dense(&[vec![1.0]]).unwrap();
        assert!(logistic_oracle(&a, &[0.5], &Vector::zeros(1)).is_err());
    }

    #[test]
    fn scalar_lipschitz_constant() {
        // A = [2], m = 1: L = 4/4 = 1
        let a = SparseMatrix::from_dense(&[vec![2.0]]).unwrap();
        let e = cocoercivity_diag_logistic(&a, 1).unwrap();
        assert!((e.get(0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_lipschitz_constant() {
        let q = 5;
        let a = IdentityMap::new(q);
        let e = cocoercivity_diag_logistic(&a, q).unwrap();
        for j in 0..q {
            assert!((e.get(j) - 1.0 / (4.0 * q as f64)).abs() < 1e-12);
        }
    }
}
