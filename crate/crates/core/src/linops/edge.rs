use crate::linops::{LinearMap, Vector};

/// Edge-replication operator of a graph: stacks the pair (x_n, x_m) for
/// every edge {n, m} with n < m, each node block of dimension `q`.
///
/// Its adjoint gathers each node's incident edge slots, so D*D scales
/// node n by its degree d_n.
#[derive(Debug, Clone)]
pub struct EdgeOperator {
    num_nodes: usize,
    q: usize,
    /// canonically ordered edges, n < m, 0-indexed
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
}

impl EdgeOperator {
    pub fn new(num_nodes: usize, q: usize, edges: Vec<(usize, usize)>) -> Self {
        assert!(q >= 1);
        let mut degrees = vec![0usize; num_nodes];
        for &(n, m) in &edges {
            assert!(
                n < m && m < num_nodes,
                "edges must be canonical and in range"
            );
            degrees[n] += 1;
            degrees[m] += 1;
        }
        EdgeOperator {
            num_nodes,
            q,
            edges,
            degrees,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

impl LinearMap for EdgeOperator {
    fn in_dim(&self) -> usize {
        self.num_nodes * self.q
    }

    fn out_dim(&self) -> usize {
        2 * self.edges.len() * self.q
    }

    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(
            x.dim(),
            self.in_dim(),
            "EdgeOperator::apply dimension mismatch"
        );
        let xs = x.as_slice();
        let mut out = vec![0.0; self.out_dim()];
        for (e, &(n, m)) in self.edges.iter().enumerate() {
            let base = 2 * e * self.q;
            out[base..base + self.q].copy_from_slice(&xs[n * self.q..(n + 1) * self.q]);
            out[base + self.q..base + 2 * self.q]
                .copy_from_slice(&xs[m * self.q..(m + 1) * self.q]);
        }
        Vector::from_slice(&out)
    }

    fn adjoint_apply(&self, y: &Vector) -> Vector {
        assert_eq!(
            y.dim(),
            self.out_dim(),
            "EdgeOperator::adjoint_apply dimension mismatch"
        );
        let ys = y.as_slice();
        let mut out = vec![0.0; self.in_dim()];
        for (e, &(n, m)) in self.edges.iter().enumerate() {
            let base = 2 * e * self.q;
            for k in 0..self.q {
                out[n * self.q + k] += ys[base + k];
                out[m * self.q + k] += ys[base + self.q + k];
            }
        }
        Vector::from_slice(&out)
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        let q = self.q;
        Box::new(self.edges.iter().enumerate().flat_map(move |(e, &(n, m))| {
            let base = 2 * e * q;
            (0..q)
                .map(move |k| (base + k, n * q + k, 1.0))
                .chain((0..q).map(move |k| (base + q + k, m * q + k, 1.0)))
        }))
    }

    fn gram_diag(&self) -> Option<Vec<f64>> {
        let mut diag = vec![0.0; self.in_dim()];
        for (n, &d) in self.degrees.iter().enumerate() {
            for k in 0..self.q {
                diag[n * self.q + k] = d as f64;
            }
        }
        Some(diag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_apply_and_adjoint() {
        // two nodes, one edge, q = 1
        let d = EdgeOperator::new(2, 1, vec![(0, 1)]);
        let x = Vector::from_slice(&[5.0, 7.0]);
        assert_eq!(d.apply(&x).as_slice(), &[5.0, 7.0]);
        // each node receives exactly its own edge slot
        let y = Vector::from_slice(&[1.0, 2.0]);
        assert_eq!(d.adjoint_apply(&y).as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn degree_identity_exact() {
        // triangle on 3 nodes, q = 2
        let d = EdgeOperator::new(3, 2, vec![(0, 1), (0, 2), (1, 2)]);
        let x = Vector::from_slice(&[1.0, -1.0, 2.0, 0.5, -3.0, 4.0]);
        let gathered = d.adjoint_apply(&d.apply(&x));
        for n in 0..3 {
            for k in 0..2 {
                assert_eq!(gathered.get(n * 2 + k), 2.0 * x.get(n * 2 + k));
            }
        }
        assert_eq!(d.gram_diag(), Some(vec![2.0; 6]));
    }
}
