use crate::error::{Error, Result};
use crate::linops::{DiagonalMap, LinearMap, Vector};

/// Sparse matrix stored row-compressed, with a column-compressed index
/// built at construction. Row sums feed the dual step sizes and column
/// sums the primal ones, so both orientations are kept.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    // CSR
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    // CSC mirror (indices into `values`)
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    csc_val: Vec<f64>,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets. Explicit zeros are dropped,
    /// duplicate positions are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidParameter {
                    name: "triplets",
                    reason: format!("entry ({i},{j}) outside {rows}x{cols}"),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("SparseMatrix::from_triplets"));
            }
        }
        let mut cells: std::collections::BTreeMap<(usize, usize), f64> =
            std::collections::BTreeMap::new();
        for &(i, j, v) in triplets {
            *cells.entry((i, j)).or_insert(0.0) += v;
        }
        cells.retain(|_, v| *v != 0.0);

        let nnz = cells.len();
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (&(i, j), &v) in &cells {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }

        // column-major mirror
        let mut by_col: Vec<(usize, usize, f64)> =
            cells.iter().map(|(&(i, j), &v)| (j, i, v)).collect();
        by_col.sort_unstable_by_key(|&(j, i, _)| (j, i));
        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(nnz);
        let mut csc_val = Vec::with_capacity(nnz);
        for &(j, i, v) in &by_col {
            col_ptr[j + 1] += 1;
            row_idx.push(i);
            csc_val.push(v);
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }

        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            col_ptr,
            row_idx,
            csc_val,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::InvalidParameter {
                    name: "rows",
                    reason: "ragged dense input".into(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(r, c, &triplets)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries of row i as (col, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(self.values[lo..hi].iter())
            .map(|(&j, &v)| (j, v))
    }

    /// Nonzero entries of column j as (row, value).
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        self.row_idx[lo..hi]
            .iter()
            .zip(self.csc_val[lo..hi].iter())
            .map(|(&i, &v)| (i, v))
    }
}

impl LinearMap for SparseMatrix {
    fn in_dim(&self) -> usize {
        self.cols
    }

    fn out_dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.cols, "SparseMatrix::apply dimension mismatch");
        let xs = x.as_slice();
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * xs[self.col_idx[k]];
            }
            out[i] = acc;
        }
        Vector::from_slice(&out)
    }

    fn adjoint_apply(&self, y: &Vector) -> Vector {
        assert_eq!(
            y.dim(),
            self.rows,
            "SparseMatrix::adjoint_apply dimension mismatch"
        );
        let ys = y.as_slice();
        let mut out = vec![0.0; self.cols];
        for j in 0..self.cols {
            let mut acc = 0.0;
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.csc_val[k] * ys[self.row_idx[k]];
            }
            out[j] = acc;
        }
        Vector::from_slice(&out)
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        Box::new((0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |k| (i, self.col_idx[k], self.values[k]))
        }))
    }

    fn gram_diag(&self) -> Option<Vec<f64>> {
        // D*D is diagonal iff no two distinct columns share a row.
        let mut owner = vec![usize::MAX; self.rows];
        let mut diag = vec![0.0; self.cols];
        for j in 0..self.cols {
            for (i, v) in self.col(j) {
                if owner[i] != usize::MAX && owner[i] != j {
                    return None;
                }
                owner[i] = j;
                diag[j] += v * v;
            }
        }
        Some(diag)
    }
}

/// Identity on a space of the given dimension.
#[derive(Debug, Clone)]
pub struct IdentityMap {
    dim: usize,
}

impl IdentityMap {
    pub fn new(dim: usize) -> Self {
        IdentityMap { dim }
    }
}

impl LinearMap for IdentityMap {
    fn in_dim(&self) -> usize {
        self.dim
    }

    fn out_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim);
        x.clone()
    }

    fn adjoint_apply(&self, y: &Vector) -> Vector {
        assert_eq!(y.dim(), self.dim);
        y.clone()
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        Box::new((0..self.dim).map(|i| (i, i, 1.0)))
    }

    fn gram_diag(&self) -> Option<Vec<f64>> {
        Some(vec![1.0; self.dim])
    }
}

/// The zero map between spaces of the given dimensions. Used when the
/// composite term h(Dx) is absent.
#[derive(Debug, Clone)]
pub struct ZeroMap {
    in_dim: usize,
    out_dim: usize,
}

impl ZeroMap {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        ZeroMap { in_dim, out_dim }
    }
}

impl LinearMap for ZeroMap {
    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.in_dim);
        Vector::zeros(self.out_dim)
    }

    fn adjoint_apply(&self, y: &Vector) -> Vector {
        assert_eq!(y.dim(), self.out_dim);
        Vector::zeros(self.in_dim)
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        Box::new(std::iter::empty())
    }

    fn gram_diag(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.in_dim])
    }
}

/// L · D · R for diagonal L, R — the scaled operator whose norm the
/// preconditioner certificate bounds.
pub struct DiagSandwich<'a> {
    pub left: DiagonalMap,
    pub inner: &'a dyn LinearMap,
    pub right: DiagonalMap,
}

impl<'a> DiagSandwich<'a> {
    pub fn new(left: DiagonalMap, inner: &'a dyn LinearMap, right: DiagonalMap) -> Self {
        assert_eq!(left.dim(), inner.out_dim());
        assert_eq!(right.dim(), inner.in_dim());
        DiagSandwich { left, inner, right }
    }
}

impl LinearMap for DiagSandwich<'_> {
    fn in_dim(&self) -> usize {
        self.inner.in_dim()
    }

    fn out_dim(&self) -> usize {
        self.inner.out_dim()
    }

    fn apply(&self, x: &Vector) -> Vector {
        self.left.apply(&self.inner.apply(&self.right.apply(x)))
    }

    fn adjoint_apply(&self, y: &Vector) -> Vector {
        self.right
            .apply(&self.inner.adjoint_apply(&self.left.apply(y)))
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        Box::new(
            self.inner
                .entries()
                .map(move |(i, j, v)| (i, j, self.left.get(i) * v * self.right.get(j))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_and_csc_agree() {
        let m = SparseMatrix::from_dense(&[vec![1.0, -2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(m.nnz(), 3);
        let x = Vector::from_slice(&[1.0, 1.0]);
        assert_eq!(m.apply(&x).as_slice(), &[-1.0, 3.0]);
        let y = Vector::from_slice(&[1.0, 1.0]);
        assert_eq!(m.adjoint_apply(&y).as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let m = SparseMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.apply(&Vector::from_slice(&[1.0])).as_slice(), &[3.0]);
    }

    #[test]
    fn explicit_zeros_dropped() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 0.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn gram_diag_detects_structure() {
        // identity-like: columns hit disjoint rows
        let m = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(m.gram_diag(), Some(vec![4.0, 9.0]));
        // shared row between two columns: not diagonal
        let m2 = SparseMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(m2.gram_diag(), None);
    }

    #[test]
    fn out_of_bounds_triplet_rejected() {
        assert!(SparseMatrix::from_triplets(1, 1, &[(0, 1, 1.0)]).is_err());
    }
}
