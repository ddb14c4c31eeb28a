use crate::error::{Error, Result};
use crate::linops::EdgeOperator;

/// Incidence of one node on one edge: the edge index, the neighbor, the
/// dual slot this node owns (2e for the lower endpoint, 2e+1 for the
/// higher), and the neighbor's slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub neighbor: usize,
    pub own_slot: usize,
    pub other_slot: usize,
}

/// Undirected connected graph with canonically ordered edges (n < m) and
/// per-node degree/incidence tables.
#[derive(Debug, Clone)]
pub struct AgentGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    incidences: Vec<Vec<Incidence>>,
    degrees: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Ring,
    Path,
    Complete,
}

/// Standard topologies on N >= 2 nodes.
pub fn build_graph(kind: GraphKind, n: usize) -> Result<AgentGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("need at least 2 agents, got {n}"),
        });
    }
    let mut edges = Vec::new();
    match kind {
        GraphKind::Path => {
            for i in 0..n - 1 {
                edges.push((i, i + 1));
            }
        }
        GraphKind::Ring => {
            for i in 0..n - 1 {
                edges.push((i, i + 1));
            }
            edges.push((0, n - 1));
        }
        GraphKind::Complete => {
            for i in 0..n {
                for j in (i + 1)..n {
                    edges.push((i, j));
                }
            }
        }
    }
    graph_from_edges(n, &edges)
}

/// Graph from an explicit 0-indexed edge list. Edges are canonicalized,
/// deduplicated, and checked against self loops and disconnection.
pub fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<AgentGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "graph needs at least one node".into(),
        });
    }
    let mut canonical: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a == b {
            return Err(Error::DisconnectedGraph(format!(
                "self loop at node {}: the network model forbids self loops",
                a + 1
            )));
        }
        if a >= n || b >= n {
            return Err(Error::InvalidParameter {
                name: "edges",
                reason: format!("edge ({}, {}) outside 1..={n}", a + 1, b + 1),
            });
        }
        canonical.push((a.min(b), a.max(b)));
    }
    canonical.sort_unstable();
    canonical.dedup();

    // connectivity sweep
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &canonical {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    if count != n {
        let isolated = seen.iter().position(|s| !s).unwrap();
        return Err(Error::DisconnectedGraph(format!(
            "node {} is unreachable: the network model requires a connected graph",
            isolated + 1
        )));
    }

    let mut incidences = vec![Vec::new(); n];
    let mut degrees = vec![0usize; n];
    for (e, &(a, b)) in canonical.iter().enumerate() {
        incidences[a].push(Incidence {
            edge: e,
            neighbor: b,
            own_slot: 2 * e,
            other_slot: 2 * e + 1,
        });
        incidences[b].push(Incidence {
            edge: e,
            neighbor: a,
            own_slot: 2 * e + 1,
            other_slot: 2 * e,
        });
        degrees[a] += 1;
        degrees[b] += 1;
    }
    Ok(AgentGraph {
        num_nodes: n,
        edges: canonical,
        incidences,
        degrees,
    })
}

impl AgentGraph {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn incidences(&self, node: usize) -> &[Incidence] {
        &self.incidences[node]
    }

    /// The edge-replication operator of this graph on node blocks of
    /// dimension q.
    pub fn edge_operator(&self, q: usize) -> EdgeOperator {
        EdgeOperator::new(self.num_nodes, q, self.edges.clone())
    }
}
