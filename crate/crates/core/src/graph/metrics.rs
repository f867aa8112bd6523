use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::matrix::TransitionMatrix;
use super::validate::strongly_connected;

/// Combinatorial summary of the support graph of `P` (self-loops ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub n: usize,
    /// Off-diagonal arcs of the support.
    pub arc_count: usize,
    /// Undirected edges |E|; present only when the support is symmetric.
    pub edge_count: Option<usize>,
    /// Largest out-degree (the degree, for undirected graphs).
    pub max_degree: usize,
    /// Diameter of the underlying undirected support.
    pub diameter: usize,
    /// Largest directed eccentricity; `None` if not strongly connected.
    pub directed_diameter: Option<usize>,
    pub is_undirected: bool,
    pub is_simple_random_walk: bool,
    pub is_eulerian: bool,
    /// Detailed balance against the computed stationary distribution;
    /// `None` when no stationary distribution could be computed.
    pub is_reversible: Option<bool>,
}

fn bfs_eccentricity(adj: &[Vec<usize>], src: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    let mut reached = 1;
    let mut far = 0;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                far = far.max(dist[u]);
                reached += 1;
                queue.push_back(u);
            }
        }
    }
    (reached == adj.len()).then_some(far)
}

fn diameter_of(adj: &[Vec<usize>]) -> Option<usize> {
    (0..adj.len()).map(|v| bfs_eccentricity(adj, v)).try_fold(0, |acc, e| e.map(|e| acc.max(e)))
}

pub fn metrics(p: &TransitionMatrix) -> GraphMetrics {
    let n = p.n();
    let support = p.support();
    let arc_count: usize = support.iter().map(Vec::len).sum();
    let is_undirected = p.has_symmetric_support();
    let mut undirected = vec![Vec::new(); n];
    for (v, outs) in support.iter().enumerate() {
        for &u in outs {
            undirected[v].push(u);
            undirected[u].push(v);
        }
    }
    for row in &mut undirected {
        row.sort_unstable();
        row.dedup();
    }
    let mut indeg = vec![0usize; n];
    for outs in &support {
        for &u in outs {
            indeg[u] += 1;
        }
    }
    let connected = strongly_connected(p);
    let is_eulerian = connected && (0..n).all(|v| indeg[v] == support[v].len());
    let is_reversible = crate::spectral::stationary(p).ok().map(|pi| {
        p.arcs().all(|(v, u, w)| {
            let lhs = pi.pi[v] * w;
            let rhs = pi.pi[u] * p.entry(u, v);
            (lhs - rhs).abs() <= 1e-10 * lhs.max(rhs)
        })
    });
    GraphMetrics {
        n,
        arc_count,
        edge_count: is_undirected.then_some(arc_count / 2),
        max_degree: support.iter().map(Vec::len).max().unwrap_or(0),
        diameter: diameter_of(&undirected).unwrap_or(usize::MAX),
        directed_diameter: if connected { diameter_of(&support) } else { None },
        is_undirected,
        is_simple_random_walk: p.is_simple_random_walk(),
        is_eulerian,
        is_reversible,
    }
}
