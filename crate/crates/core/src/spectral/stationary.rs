use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;

/// Stationary tolerance: `||pi P - pi||_1` must fall below this.
pub const STATIONARY_TOL: f64 = 1e-10;
const POWER_ITERATION_CAP: usize = 1_000_000;
const DIRECT_SOLVE_MAX_N: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub pi_min: f64,
    pub pi_max: f64,
}

impl StationaryDistribution {
    fn from_vec(pi: Vec<f64>) -> Self {
        let pi_min = pi.iter().copied().fold(f64::INFINITY, f64::min);
        let pi_max = pi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { pi, pi_min, pi_max }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

/// `||mu P - mu||_1`.
pub fn stationarity_residual(p: &TransitionMatrix, mu: &[f64]) -> f64 {
    p.apply_left(mu).iter().zip(mu).map(|(a, b)| (a - b).abs()).sum()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Out-degree weights are exactly stationary for a simple random walk on an
/// undirected graph or an Eulerian digraph.
fn degree_candidate(p: &TransitionMatrix) -> Option<Vec<f64>> {
    if !p.is_simple_random_walk() {
        return None;
    }
    let mut indeg = vec![0usize; p.n()];
    for (_, u, _) in p.arcs() {
        indeg[u] += 1;
    }
    (0..p.n())
        .all(|v| indeg[v] == p.out_degree(v))
        .then(|| normalize((0..p.n()).map(|v| p.out_degree(v) as f64).collect()))
}

/// Power iteration on the averaged operator `(I + P) / 2`, which shares the
/// stationary law of `P` and is aperiodic.
fn power_iteration(p: &TransitionMatrix) -> Option<Vec<f64>> {
    let n = p.n();
    let mut mu = vec![1.0 / n as f64; n];
    let budget = (POWER_ITERATION_CAP as f64 * 2e4 / p.nnz().max(1) as f64) as usize;
    for it in 0..POWER_ITERATION_CAP.min(budget.max(10_000)) {
        let next = p.apply_left(&mu);
        if it % 32 == 0 && next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum::<f64>() < 1e-13 {
            return Some(normalize(next));
        }
        mu.iter_mut().zip(&next).for_each(|(m, x)| *m = 0.5 * (*m + x));
    }
    None
}

fn direct_solve(p: &TransitionMatrix) -> Option<Vec<f64>> {
    let n = p.n();
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (v, u, w) in p.arcs() {
        a[(u, v)] += w;
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    Some(x.iter().copied().collect())
}

/// Stationary distribution of a strongly connected chain.
pub fn stationary(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let accept = |pi: Vec<f64>| -> Option<Vec<f64>> {
        (pi.iter().all(|&x| x > 0.0) && stationarity_residual(p, &pi) < STATIONARY_TOL).then_some(pi)
    };
    if let Some(pi) = degree_candidate(p).and_then(accept) {
        return Ok(StationaryDistribution::from_vec(pi));
    }
    if let Some(pi) = power_iteration(p).and_then(accept) {
        return Ok(StationaryDistribution::from_vec(pi));
    }
    if p.n() <= DIRECT_SOLVE_MAX_N {
        if let Some(pi) = direct_solve(p).map(normalize).and_then(accept) {
            return Ok(StationaryDistribution::from_vec(pi));
        }
    }
    Err(Error::NonConvergence { what: "stationary distribution", iterations: POWER_ITERATION_CAP })
}
