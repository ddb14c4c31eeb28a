use crate::error::{Error, Result};
use crate::linops::Vector;

/// Positive diagonal map, used for per-coordinate step sizes and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMap {
    diag: Vec<f64>,
}

impl DiagonalMap {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "diag",
                reason: "diagonal entries must be finite and strictly positive".into(),
            });
        }
        Ok(DiagonalMap { diag })
    }

    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn identity(dim: usize) -> Self {
        DiagonalMap {
            diag: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn max_entry(&self) -> f64 {
        self.diag.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.diag.iter().cloned().fold(f64::MAX, f64::min)
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim(), "DiagonalMap::apply dimension mismatch");
        Vector::from_slice(
            &x.iter()
                .zip(self.diag.iter())
                .map(|(v, d)| d * v)
                .collect::<Vec<_>>(),
        )
    }

    pub fn apply_inv(&self, x: &Vector) -> Vector {
        assert_eq!(
            x.dim(),
            self.dim(),
            "DiagonalMap::apply_inv dimension mismatch"
        );
        Vector::from_slice(
            &x.iter()
                .zip(self.diag.iter())
                .map(|(v, d)| v / d)
                .collect::<Vec<_>>(),
        )
    }

    pub fn inverse(&self) -> DiagonalMap {
        DiagonalMap {
            diag: self.diag.iter().map(|d| 1.0 / d).collect(),
        }
    }

    pub fn sqrt(&self) -> DiagonalMap {
        DiagonalMap {
            diag: self.diag.iter().map(|d| d.sqrt()).collect(),
        }
    }

    /// Weighted inner product <x, W^{-1} y>.
    pub fn inv_weighted_dot(&self, x: &Vector, y: &Vector) -> f64 {
        assert_eq!(x.dim(), self.dim());
        assert_eq!(y.dim(), self.dim());
        x.iter()
            .zip(y.iter())
            .zip(self.diag.iter())
            .map(|((a, b), d)| a * b / d)
            .sum()
    }
}
