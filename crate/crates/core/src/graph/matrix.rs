use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Row-stochastic tolerance used by the checked constructors.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Sparse row-stochastic matrix in compressed-row form. Row entries are
/// sorted by target and strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
    label: String,
}

impl TransitionMatrix {
    /// Builds a matrix and rejects anything that is not row-stochastic.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if n == 0 {
            return invalid("matrix needs n >= 1");
        }
        if rows.len() != n {
            return invalid(format!("expected {n} rows, got {}", rows.len()));
        }
        let m = Self::from_rows_unchecked(n, rows);
        let report = crate::graph::validate(&m);
        if let Some(msg) = report.stochasticity_error() {
            return Err(Error::NotStochastic(msg));
        }
        Ok(m)
    }

    /// Builds a matrix without checking stochasticity; `validate` reports
    /// any defects. Zero entries are dropped, rows are sorted by target.
    pub fn from_rows_unchecked(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        offsets.push(0);
        for mut row in rows.into_iter().take(n) {
            row.retain(|&(_, p)| p != 0.0);
            row.sort_by_key(|&(u, _)| u);
            for (u, p) in row {
                targets.push(u);
                probs.push(p);
            }
            offsets.push(targets.len());
        }
        while offsets.len() < n + 1 {
            offsets.push(targets.len());
        }
        Self { n, offsets, targets, probs, label: String::new() }
    }

    /// Simple random walk on a graph given by its edges. Undirected edges are
    /// inserted in both directions; repeated edges are an error.
    pub fn simple_random_walk(n: usize, edges: &[(usize, usize)], directed: bool) -> Result<Self> {
        if n == 0 {
            return invalid("graph needs n >= 1");
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            adj[u].push(v);
            if !directed && u != v {
                adj[v].push(u);
            }
        }
        let mut rows = Vec::with_capacity(n);
        for (v, mut out) in adj.into_iter().enumerate() {
            out.sort_unstable();
            if out.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("repeated edge at vertex {v}"));
            }
            if out.is_empty() {
                return invalid(format!("vertex {v} has no out-edges"));
            }
            let p = 1.0 / out.len() as f64;
            rows.push(out.into_iter().map(|u| (u, p)).collect());
        }
        Self::from_rows(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Targets and probabilities of row `v`.
    #[inline]
    pub fn row(&self, v: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.offsets[v], self.offsets[v + 1]);
        (&self.targets[a..b], &self.probs[a..b])
    }

    pub fn row_entries(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (t, p) = self.row(v);
        t.iter().copied().zip(p.iter().copied())
    }

    pub fn entry(&self, v: usize, u: usize) -> f64 {
        let (t, p) = self.row(v);
        match t.binary_search(&u) {
            Ok(i) => p[i],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// All stored entries as `(row, column, probability)`.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |v| self.row_entries(v).map(move |(u, p)| (v, u, p)))
    }

    /// `(P f)(v)` for every `v`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(f, &mut out);
        out
    }

    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            let (t, p) = self.row(v);
            *o = t.iter().zip(p).map(|(&u, &w)| w * f[u]).sum();
        }
    }

    /// Row vector times matrix, `mu P`.
    pub fn apply_left(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (v, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let (t, p) = self.row(v);
            for (&u, &w) in t.iter().zip(p) {
                out[u] += m * w;
            }
        }
        out
    }

    /// Lazy version `delta I + (1 - delta) P`.
    pub fn lazy(&self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("laziness delta must lie in (0, 1), got {delta}"));
        }
        let rows = (0..self.n)
            .map(|v| {
                let mut row: Vec<(usize, f64)> =
                    self.row_entries(v).map(|(u, p)| (u, (1.0 - delta) * p)).collect();
                match row.iter_mut().find(|(u, _)| *u == v) {
                    Some(e) => e.1 += delta,
                    None => row.push((v, delta)),
                }
                row
            })
            .collect();
        let label = format!("lazy:{delta}:{}", self.label);
        Ok(Self::from_rows(self.n, rows)?.with_label(label))
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (v, u, p) in self.arcs() {
            d[v][u] += p;
        }
        d
    }

    /// Off-diagonal support as adjacency lists (arcs `v -> u`, `u != v`).
    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|v| self.row(v).0.iter().copied().filter(|&u| u != v).collect())
            .collect()
    }

    /// True when the off-diagonal support is symmetric.
    pub fn has_symmetric_support(&self) -> bool {
        self.arcs()
            .filter(|&(v, u, _)| v != u)
            .all(|(v, u, _)| self.entry(u, v) > 0.0)
    }

    /// True when every row is uniform over its targets (a simple random walk).
    pub fn is_simple_random_walk(&self) -> bool {
        (0..self.n).all(|v| {
            let (_, p) = self.row(v);
            let d = p.len() as f64;
            p.iter().all(|&x| (x - 1.0 / d).abs() <= 1e-15)
        })
    }
}
