//! Dense linear-algebra oracles used by the test suites.
//!
//! Everything here is deliberately naive: dense storage, textbook
//! algorithms, no shortcuts shared with the solver crates. Tests compare
//! the optimized sparse/iterative code paths against these.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        DenseMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// A^T A, the Gram matrix.
    pub fn gram(&self) -> DenseMatrix {
        self.transpose().matmul(self)
    }

    /// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
    /// sorted ascending. Panics if the matrix is not square.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(
            self.rows, self.cols,
            "sym_eigenvalues needs a square matrix"
        );
        let n = self.rows;
        let mut a = self.clone();
        // enforce symmetry of the working copy against rounding in callers
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a.get(i, j) + a.get(j, i));
                a.set(i, j, s);
                a.set(j, i, s);
            }
        }
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.get(i, j) * a.get(i, j);
                }
            }
            if off.sqrt() < 1e-13 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }

    /// Largest eigenvalue of A^T A, i.e. the squared spectral norm of A.
    pub fn spectral_norm_sq(&self) -> f64 {
        let eig = self.gram().sym_eigenvalues();
        *eig.last().unwrap()
    }

    /// Solve A x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut aug = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if aug.get(r, col).abs() > aug.get(piv, col).abs() {
                    piv = r;
                }
            }
            if aug.get(piv, col).abs() < 1e-14 {
                panic!("singular matrix in dense solve");
            }
            if piv != col {
                for j in 0..n {
                    let tmp = aug.get(col, j);
                    aug.set(col, j, aug.get(piv, j));
                    aug.set(piv, j, tmp);
                }
                rhs.swap(col, piv);
            }
            for r in (col + 1)..n {
                let factor = aug.get(r, col) / aug.get(col, col);
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = aug.get(r, j) - factor * aug.get(col, j);
                    aug.set(r, j, v);
                }
                rhs[r] -= factor * rhs[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for j in (row + 1)..n {
                acc -= aug.get(row, j) * x[j];
            }
            x[row] = acc / aug.get(row, row);
        }
        x
    }
}

/// Central finite-difference gradient of a scalar function.
pub fn central_diff_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (f(&xp) - f(&xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    g
}

/// Small deterministic generator for probe vectors (splitmix64), so test
/// oracles do not depend on the solver crates' RNG choices.
pub struct ProbeRng {
    state: u64,
}

impl ProbeRng {
    pub fn new(seed: u64) -> Self {
        ProbeRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_f64()).collect()
    }
}
