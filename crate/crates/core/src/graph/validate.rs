use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::matrix::{TransitionMatrix, ROW_SUM_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSumViolation {
    pub vertex: usize,
    pub sum: f64,
}

/// Structural audit of a transition matrix. Defects are collected, never
/// thrown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub row_sum_violations: Vec<RowSumViolation>,
    /// `(row, column)` of negative entries.
    pub negative_entries: Vec<(usize, usize)>,
    /// `(row, column)` of repeated targets within a row.
    pub duplicate_targets: Vec<(usize, usize)>,
    /// `(row, column)` of targets outside `0..n`.
    pub out_of_range: Vec<(usize, usize)>,
    pub strongly_connected: bool,
    /// Period of the chain; only meaningful when strongly connected.
    pub period: Option<usize>,
    pub aperiodic: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.stochasticity_error().is_none() && self.strongly_connected
    }

    pub fn violation_count(&self) -> usize {
        self.row_sum_violations.len()
            + self.negative_entries.len()
            + self.duplicate_targets.len()
            + self.out_of_range.len()
            + usize::from(!self.strongly_connected)
    }

    pub(crate) fn stochasticity_error(&self) -> Option<String> {
        if let Some(&(v, u)) = self.out_of_range.first() {
            return Some(format!("row {v} targets vertex {u} outside 0..{}", self.n));
        }
        if let Some(&(v, u)) = self.negative_entries.first() {
            return Some(format!("negative entry at ({v}, {u})"));
        }
        if let Some(&(v, u)) = self.duplicate_targets.first() {
            return Some(format!("duplicate target {u} in row {v}"));
        }
        self.row_sum_violations
            .first()
            .map(|r| format!("row {} sums to {}", r.vertex, r.sum))
    }
}

pub fn validate(p: &TransitionMatrix) -> ValidationReport {
    let n = p.n();
    let mut report = ValidationReport {
        n,
        row_sum_violations: Vec::new(),
        negative_entries: Vec::new(),
        duplicate_targets: Vec::new(),
        out_of_range: Vec::new(),
        strongly_connected: false,
        period: None,
        aperiodic: false,
    };
    for v in 0..n {
        let (t, w) = p.row(v);
        let mut sum = 0.0;
        for (i, (&u, &x)) in t.iter().zip(w).enumerate() {
            if u >= n {
                report.out_of_range.push((v, u));
            }
            if x < 0.0 || !x.is_finite() {
                report.negative_entries.push((v, u));
            }
            if i > 0 && t[i - 1] == u {
                report.duplicate_targets.push((v, u));
            }
            sum += x;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            report.row_sum_violations.push(RowSumViolation { vertex: v, sum });
        }
    }
    if report.out_of_range.is_empty() {
        report.strongly_connected = strongly_connected(p);
        if report.strongly_connected {
            let d = period(p);
            report.period = Some(d);
            report.aperiodic = d == 1;
        }
    }
    report
}

fn reach_all(adj: &[Vec<usize>], from: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == adj.len()
}

/// Forward and backward reachability from vertex 0 (Kosaraju's criterion for
/// a single component).
pub fn strongly_connected(p: &TransitionMatrix) -> bool {
    let n = p.n();
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for (v, u, w) in p.arcs() {
        if w > 0.0 {
            fwd[v].push(u);
            bwd[u].push(v);
        }
    }
    reach_all(&fwd, 0) && reach_all(&bwd, 0)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a strongly connected chain: gcd over arcs of
/// `level(v) + 1 - level(u)` for BFS levels from vertex 0.
pub fn period(p: &TransitionMatrix) -> usize {
    let n = p.n();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &u in p.row(v).0 {
            if level[u] == usize::MAX {
                level[u] = level[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let mut g = 0;
    for (v, u, _) in p.arcs() {
        let (lv, lu) = (level[v] as i64, level[u] as i64);
        g = gcd(g, (lv + 1 - lu).unsigned_abs() as usize);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, GraphSpec};

    #[test]
    fn odd_cycle_is_aperiodic_even_cycle_has_period_two() {
        let r = validate(&build(&GraphSpec::Cycle { n: 5 }).unwrap());
        assert!(r.is_valid());
        assert!(r.strongly_connected);
        assert!(r.aperiodic);
        assert_eq!(r.violation_count(), 0);
        let r = validate(&build(&GraphSpec::Cycle { n: 6 }).unwrap());
        assert_eq!(r.period, Some(2));
        let r = validate(&build(&GraphSpec::DirectedCycle { n: 7 }).unwrap());
        assert_eq!(r.period, Some(7));
    }

    #[test]
    fn row_sum_defect_is_reported_at_its_vertex() {
        let m = TransitionMatrix::from_rows_unchecked(
            3,
            vec![vec![(1, 0.5), (2, 0.5)], vec![(0, 0.9)], vec![(0, 0.5), (1, 0.5)]],
        );
        let r = validate(&m);
        assert_eq!(r.row_sum_violations.len(), 1);
        assert_eq!(r.row_sum_violations[0].vertex, 1);
        assert!((r.row_sum_violations[0].sum - 0.9).abs() < 1e-15);
        assert!(!r.is_valid());
    }

    #[test]
    fn disjoint_cycles_are_not_strongly_connected() {
        let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
        let m = TransitionMatrix::from_rows_unchecked(
            6,
            (0..6)
                .map(|v| {
                    edges
                        .iter()
                        .flat_map(|&(a, b)| [(a, b), (b, a)])
                        .filter(|&(a, _)| a == v)
                        .map(|(_, b)| (b, 0.5))
                        .collect()
                })
                .collect(),
        );
        let r = validate(&m);
        assert!(r.row_sum_violations.is_empty());
        assert!(!r.strongly_connected);
        assert!(!r.is_valid());
    }
}
