use crate::error::{Error, Result};

/// Dense vector in a finite-dimensional Euclidean space.
///
/// Entries are required to stay finite; construction checks, arithmetic
/// preserves finiteness for finite inputs, and the solvers re-check at
/// their state boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Vector::new"));
        }
        Ok(Vector { data })
    }

    /// Construction from values already known to be finite.
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Vector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: vec![0.0; dim],
        }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        assert!(s.iter().all(|v| v.is_finite()), "nonfinite entry");
        Vector { data: s.to_vec() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        Vector::from_raw(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        Vector::from_raw(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector::from_raw(self.data.iter().map(|v| s * v).collect())
    }

    /// self + s * other
    pub fn add_scaled(&self, s: f64, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "add_scaled: dimension mismatch");
        Vector::from_raw(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// (1 - t) * self + t * other, elementwise in that order.
    pub fn relax_toward(&self, t: f64, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "relax_toward: dimension mismatch");
        Vector::from_raw(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }
}

/// Ordered list of same-dimension blocks, one per batch/agent copy.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<Vector>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Vector>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter {
                name: "blocks",
                reason: "a block vector needs at least one block".into(),
            });
        }
        let q = blocks[0].dim();
        for b in &blocks {
            if b.dim() != q {
                return Err(Error::DimensionMismatch {
                    context: "BlockVector::new",
                    expected: q,
                    got: b.dim(),
                });
            }
        }
        Ok(BlockVector { blocks })
    }

    pub fn zeros(n: usize, q: usize) -> Self {
        BlockVector {
            blocks: (0..n).map(|_| Vector::zeros(q)).collect(),
        }
    }

    /// n copies of the same block.
    pub fn replicate(n: usize, block: Vector) -> Self {
        assert!(n >= 1);
        BlockVector {
            blocks: (0..n).map(|_| block.clone()).collect(),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    pub fn block(&self, n: usize) -> &Vector {
        &self.blocks[n]
    }

    pub fn block_mut(&mut self, n: usize) -> &mut Vector {
        &mut self.blocks[n]
    }

    pub fn blocks(&self) -> &[Vector] {
        &self.blocks
    }

    /// max_n || x_n - mean ||: zero exactly when all blocks agree.
    pub fn consensus_error(&self) -> f64 {
        let mean = self.mean_block();
        self.blocks
            .iter()
            .map(|b| b.sub(&mean).norm())
            .fold(0.0, f64::max)
    }

    /// Blockwise average.
    pub fn mean_block(&self) -> Vector {
        let q = self.block_dim();
        let mut acc = vec![0.0; q];
        for b in &self.blocks {
            for (a, v) in acc.iter_mut().zip(b.iter()) {
                *a += v;
            }
        }
        let inv = 1.0 / self.blocks.len() as f64;
        Vector::from_raw(acc.into_iter().map(|v| v * inv).collect())
    }

    /// Concatenate blocks into one flat vector.
    pub fn flatten(&self) -> Vector {
        let mut data = Vec::with_capacity(self.num_blocks() * self.block_dim());
        for b in &self.blocks {
            data.extend_from_slice(b.as_slice());
        }
        Vector::from_raw(data)
    }

    pub fn from_flat(v: &Vector, n: usize) -> Self {
        assert_eq!(v.dim() % n, 0, "flat vector not divisible into {n} blocks");
        let q = v.dim() / n;
        let blocks = (0..n)
            .map(|i| Vector::from_slice(&v.as_slice()[i * q..(i + 1) * q]))
            .collect();
        BlockVector { blocks }
    }

    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_sq()).sum()
    }

    pub fn sub(&self, other: &BlockVector) -> BlockVector {
        assert_eq!(self.num_blocks(), other.num_blocks());
        BlockVector {
            blocks: self
                .blocks
                .iter()
                .zip(other.blocks.iter())
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_rejects_nan() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Vector::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn block_vector_requires_uniform_dims() {
        let ok = BlockVector::new(vec![Vector::zeros(3), Vector::zeros(3)]);
        assert!(ok.is_ok());
        let bad = BlockVector::new(vec![Vector::zeros(3), Vector::zeros(2)]);
        assert!(bad.is_err());
        assert!(BlockVector::new(vec![]).is_err());
    }

    #[test]
    fn mean_block_averages() {
        let bv = BlockVector::new(vec![
            Vector::from_slice(&[1.0, 4.0]),
            Vector::from_slice(&[3.0, 0.0]),
        ])
        .unwrap();
        let m = bv.mean_block();
        assert_eq!(m.as_slice(), &[2.0, 2.0]);
    }

    #[test]
    fn flatten_roundtrip() {
        let bv = BlockVector::new(vec![
            Vector::from_slice(&[1.0, 2.0]),
            Vector::from_slice(&[3.0, 4.0]),
        ])
        .unwrap();
        let flat = bv.flatten();
        assert_eq!(flat.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        let back = BlockVector::from_flat(&flat, 2);
        assert_eq!(back, bv);
    }
}
