//! Effective resistance with unit edge resistances on the support of an
//! undirected chain.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;

const EXHAUSTIVE_MAX_N: usize = 512;
const SAMPLED_SOURCES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceReport {
    pub r_max: f64,
    pub argmax: (usize, usize),
    /// False when `r_max` is a lower bound from sampled pairs.
    pub exhaustive: bool,
    pub pairs_checked: usize,
}

fn undirected_support(p: &TransitionMatrix) -> Result<Vec<Vec<usize>>> {
    if !p.has_symmetric_support() {
        return Err(Error::DirectedInput);
    }
    Ok(p.support())
}

/// Solves `L x = b` (graph Laplacian, `b` summing to zero) by conjugate
/// gradients on the complement of the constants.
fn laplacian_solve(adj: &[Vec<usize>], b: &[f64]) -> Result<Vec<f64>> {
    let n = adj.len();
    let lap = |x: &[f64], out: &mut [f64]| {
        for v in 0..n {
            out[v] = adj[v].len() as f64 * x[v] - adj[v].iter().map(|&u| x[u]).sum::<f64>();
        }
    };
    let center = |x: &mut [f64]| {
        let m = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= m);
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    center(&mut r);
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let target = 1e-26 * rr.max(f64::MIN_POSITIVE);
    let mut ld = vec![0.0; n];
    let cap = 20 * n + 1000;
    for _ in 0..cap {
        if rr <= target {
            return Ok(x);
        }
        lap(&d, &mut ld);
        let a = rr / dot(&d, &ld);
        x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += a * di);
        r.iter_mut().zip(&ld).for_each(|(ri, li)| *ri -= a * li);
        center(&mut r);
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        d.iter_mut().zip(&r).for_each(|(di, ri)| *di = ri + beta * *di);
    }
    Err(Error::NonConvergence { what: "laplacian conjugate gradient", iterations: cap })
}

fn resistance_on(adj: &[Vec<usize>], v: usize, w: usize) -> Result<f64> {
    if v == w {
        return Ok(0.0);
    }
    let mut b = vec![0.0; adj.len()];
    b[v] = 1.0;
    b[w] = -1.0;
    let x = laplacian_solve(adj, &b)?;
    Ok(x[v] - x[w])
}

/// `R(v <-> w)`.
pub fn effective_resistance(p: &TransitionMatrix, v: usize, w: usize) -> Result<f64> {
    let adj = undirected_support(p)?;
    if v >= adj.len() || w >= adj.len() {
        return Err(Error::InvalidParameter(format!("vertex out of range for n = {}", adj.len())));
    }
    resistance_on(&adj, v, w)
}

/// Full resistance matrix from the inverse of the grounded Laplacian.
pub fn resistance_matrix(p: &TransitionMatrix) -> Result<Vec<Vec<f64>>> {
    let adj = undirected_support(p)?;
    let n = adj.len();
    if n == 1 {
        return Ok(vec![vec![0.0]]);
    }
    let k = n - 1;
    let mut lap = DMatrix::<f64>::zeros(k, k);
    for v in 0..k {
        lap[(v, v)] = adj[v].len() as f64;
        for &u in &adj[v] {
            if u < k {
                lap[(v, u)] -= 1.0;
            }
        }
    }
    let chol = lap
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("graph is disconnected".into()))?;
    let g = chol.inverse();
    let at = |i: usize, j: usize| if i < k && j < k { g[(i, j)] } else { 0.0 };
    Ok((0..n).map(|i| (0..n).map(|j| at(i, i) + at(j, j) - 2.0 * at(i, j)).collect()).collect())
}

fn bfs_far(adj: &[Vec<usize>], s: usize) -> usize {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[s] = 0;
    let mut queue = std::collections::VecDeque::from([s]);
    let mut last = s;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    last
}

/// Maximum effective resistance: exhaustive up to 512 vertices, otherwise a
/// lower bound from single-source solves at BFS-extremal sources.
pub fn r_max(p: &TransitionMatrix) -> Result<ResistanceReport> {
    let n = p.n();
    if n <= EXHAUSTIVE_MAX_N {
        let r = resistance_matrix(p)?;
        let mut best = (0.0, (0, 0));
        for (i, row) in r.iter().enumerate() {
            for (j, &x) in row.iter().enumerate().skip(i + 1) {
                if x > best.0 {
                    best = (x, (i, j));
                }
            }
        }
        return Ok(ResistanceReport { r_max: best.0, argmax: best.1, exhaustive: true, pairs_checked: n * (n - 1) / 2 });
    }
    let adj = undirected_support(p)?;
    let mut sources = vec![bfs_far(&adj, 0)];
    let mut prev = sources[0];
    for i in 1..SAMPLED_SOURCES {
        let s = if i % 2 == 1 { bfs_far(&adj, prev) } else { (i * 7919) % n };
        prev = s;
        if !sources.contains(&s) {
            sources.push(s);
        }
    }
    let mut best = (0.0, (0, 0));
    let mut pairs = 0;
    for &s in &sources {
        let t = bfs_far(&adj, s);
        if s != t {
            let r = resistance_on(&adj, s, t)?;
            pairs += 1;
            if r > best.0 {
                best = (r, (s.min(t), s.max(t)));
            }
        }
    }
    Ok(ResistanceReport { r_max: best.0, argmax: best.1, exhaustive: false, pairs_checked: pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, metrics, GraphSpec};

    #[test]
    fn series_and_parallel() {
        let path = build(&GraphSpec::Path { n: 11 }).unwrap();
        assert!((effective_resistance(&path, 0, 10).unwrap() - 10.0).abs() < 1e-9);
        let cyc = build(&GraphSpec::Cycle { n: 12 }).unwrap();
        assert!((effective_resistance(&cyc, 0, 6).unwrap() - 3.0).abs() < 1e-9);
        let rm = r_max(&cyc).unwrap();
        assert!(rm.exhaustive);
        assert!((rm.r_max - 3.0).abs() < 1e-9);
    }

    #[test]
    fn dense_and_iterative_agree() {
        let p = build(&GraphSpec::StarPathStar { leaves: 4 }).unwrap();
        let r = resistance_matrix(&p).unwrap();
        for (v, w) in [(0, 4), (5, 12), (1, 9), (3, 3)] {
            assert!((r[v][w] - effective_resistance(&p, v, w).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn hypercube_r_max_is_antipodal_layer_sum() {
        // Distance layers are equipotential: layer k has C(l, k) vertices and
        // k C(l, k) edges back to layer k - 1, all in series.
        for l in 1..=7u32 {
            let p = build(&GraphSpec::Hypercube { dim: l }).unwrap();
            let mut binom = 1.0;
            let mut layered = 0.0;
            for k in 1..=l {
                binom = binom * (l - k + 1) as f64 / k as f64;
                layered += 1.0 / (k as f64 * binom);
            }
            let rm = r_max(&p).unwrap();
            assert!((rm.r_max - layered).abs() < 1e-9, "l={l}: {} vs {layered}", rm.r_max);
            assert_eq!(rm.argmax.0 ^ rm.argmax.1, (1 << l) - 1);
            assert!(rm.r_max <= metrics(&p).diameter as f64 + 1e-9);
        }
    }

    #[test]
    fn resistance_is_a_metric() {
        let p = build(&GraphSpec::LeafyLine { leaves: vec![2, 3] }).unwrap();
        let r = resistance_matrix(&p).unwrap();
        let n = p.n();
        for a in 0..n {
            for b in 0..n {
                assert!((r[a][b] - r[b][a]).abs() < 1e-12);
                for c in 0..n {
                    assert!(r[a][c] <= r[a][b] + r[b][c] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn directed_input_rejected() {
        let p = build(&GraphSpec::DirectedCycle { n: 5 }).unwrap();
        assert!(matches!(effective_resistance(&p, 0, 1), Err(Error::DirectedInput)));
        assert!(matches!(r_max(&p), Err(Error::DirectedInput)));
    }

    #[test]
    fn sampled_bound_on_long_path_finds_endpoints() {
        let p = build(&GraphSpec::Path { n: 600 }).unwrap();
        let rm = r_max(&p).unwrap();
        assert!(!rm.exhaustive);
        assert!((rm.r_max - 599.0).abs() < 1e-6);
    }
}
