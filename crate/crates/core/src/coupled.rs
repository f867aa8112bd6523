//! Several walkers driven by one set of vertex clocks: when `v` rings, every
//! walker at `v` takes an independent step from row `v`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::TransitionMatrix;
use crate::rng::{derive_seed, rng_from_seed, ClockStream, Lane};
use crate::stats::{ols_slope, Proportion};

pub const DEFAULT_ALPHA0: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledWalkState {
    pub positions: Vec<usize>,
    pub steps: Vec<u64>,
    pub time: f64,
}

impl CoupledWalkState {
    pub fn all_coincide(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] == w[1])
    }
}

/// Lebesgue measure of `{s <= t : X_i(s) = X_j(s)}` for each pair `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingOccupancy {
    d: usize,
    pairs: Vec<f64>,
}

impl MeetingOccupancy {
    fn new(d: usize) -> Self {
        Self { d, pairs: vec![0.0; d * (d - 1) / 2] }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.d - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return f64::NAN;
        }
        self.pairs[self.index(i, j)]
    }

    fn accumulate(&mut self, positions: &[usize], dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let mut k = 0;
        for i in 0..self.d {
            for j in i + 1..self.d {
                if positions[i] == positions[j] {
                    self.pairs[k] += dt;
                }
                k += 1;
            }
        }
    }
}

fn step(p: &TransitionMatrix, v: usize, rng: &mut ChaCha8Rng) -> usize {
    let (targets, probs) = p.row(v);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (&w, &x) in targets.iter().zip(probs) {
        acc += x;
        if u < acc {
            return w;
        }
    }
    *targets.last().expect("non-empty row")
}

/// Runs walkers from `starts` up to time `t`.
pub fn simulate_coupled(
    p: &TransitionMatrix,
    starts: &[usize],
    t: f64,
    clock_seed: u64,
    walk_seed: u64,
) -> Result<(CoupledWalkState, MeetingOccupancy)> {
    let d = starts.len();
    if d < 2 {
        return invalid(format!("need at least 2 walkers, got {d}"));
    }
    if let Some(&v) = starts.iter().find(|&&v| v >= p.n()) {
        return invalid(format!("start {v} out of range for n = {}", p.n()));
    }
    if !(t >= 0.0) {
        return invalid(format!("t must be non-negative, got {t}"));
    }
    let mut state = CoupledWalkState { positions: starts.to_vec(), steps: vec![0; d], time: 0.0 };
    let mut occ = MeetingOccupancy::new(d);
    let mut rng = rng_from_seed(walk_seed);
    for (time, v) in ClockStream::new(p.n(), clock_seed) {
        if time > t {
            break;
        }
        occ.accumulate(&state.positions, time - state.time);
        state.time = time;
        for i in 0..d {
            if state.positions[i] == v {
                state.positions[i] = step(p, v, &mut rng);
                state.steps[i] += 1;
            }
        }
    }
    occ.accumulate(&state.positions, t - state.time);
    state.time = t;
    Ok((state, occ))
}

/// Cumulative transition rows for sampling walker jumps by bisection.
pub struct JumpSampler<'a> {
    p: &'a TransitionMatrix,
    cumulative: Vec<Vec<f64>>,
}

impl<'a> JumpSampler<'a> {
    pub fn new(p: &'a TransitionMatrix) -> Self {
        let cumulative = (0..p.n())
            .map(|v| {
                let mut acc = 0.0;
                p.row(v).1.iter().map(|&x| {
                    acc += x;
                    acc
                }).collect()
            })
            .collect();
        Self { p, cumulative }
    }

    pub fn jump(&self, v: usize, rng: &mut ChaCha8Rng) -> usize {
        let targets = self.p.row(v).0;
        let cum = &self.cumulative[v];
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        targets[cum.partition_point(|&c| c <= u).min(targets.len() - 1)]
    }

    /// Position at time `t` of a single walker from `start`. A lone walker
    /// jumps at the ring times of its current vertex, so it holds for Exp(1)
    /// times and needs no other clocks.
    pub fn position_at(&self, start: usize, t: f64, walk_seed: u64) -> Result<usize> {
        if start >= self.p.n() {
            return invalid(format!("start {start} out of range for n = {}", self.p.n()));
        }
        if !(t >= 0.0) {
            return invalid(format!("t must be non-negative, got {t}"));
        }
        let mut rng = rng_from_seed(walk_seed);
        let (mut v, mut time) = (start, 0.0);
        loop {
            let hold: f64 = Exp1.sample(&mut rng);
            time += hold;
            if time > t {
                return Ok(v);
            }
            v = self.jump(v, &mut rng);
        }
    }
}

fn replica_seeds(base_seed: u64, r: u64) -> (u64, u64) {
    (derive_seed(base_seed, r, Lane::Clock), derive_seed(base_seed, r, Lane::Walk))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceEstimate {
    pub d: usize,
    pub t: f64,
    #[serde(flatten)]
    pub probability: Proportion,
    /// Number of replicas in which all walkers sit at each vertex.
    pub per_vertex: Vec<usize>,
}

/// Empirical `P(X_1(t) = ... = X_d(t))` for walkers started at `origin`.
pub fn coincidence_probability(
    p: &TransitionMatrix,
    origin: usize,
    d: usize,
    t: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<CoincidenceEstimate> {
    if replicas < 2 {
        return invalid(format!("need at least 2 replicas, got {replicas}"));
    }
    let starts = vec![origin; d];
    let finals: Vec<CoupledWalkState> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let (c, w) = replica_seeds(base_seed, r);
            simulate_coupled(p, &starts, t, c, w).map(|x| x.0)
        })
        .collect::<Result<_>>()?;
    let mut per_vertex = vec![0; p.n()];
    for s in finals.iter().filter(|s| s.all_coincide()) {
        per_vertex[s.positions[0]] += 1;
    }
    let hits = per_vertex.iter().sum();
    Ok(CoincidenceEstimate { d, t, probability: Proportion::new(hits, replicas), per_vertex })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingTailPoint {
    pub k: f64,
    pub threshold: f64,
    #[serde(flatten)]
    pub tail: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingTail {
    pub t: f64,
    pub alpha0: f64,
    pub points: Vec<MeetingTailPoint>,
    /// Slope of `log tail` against `k` over points with a positive tail.
    pub log_tail_slope: f64,
    #[serde(skip)]
    pub occupancies: Vec<f64>,
}

/// Empirical `P(|A_{1,2} & [0,t]| >= k t^{1 - alpha0})` over a grid of `k`.
pub fn meeting_tail(
    p: &TransitionMatrix,
    starts: (usize, usize),
    t: f64,
    ks: &[f64],
    alpha0: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<MeetingTail> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return invalid(format!("alpha0 must lie in (0, 1), got {alpha0}"));
    }
    if replicas < 2 {
        return invalid(format!("need at least 2 replicas, got {replicas}"));
    }
    let occupancies: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let (c, w) = replica_seeds(base_seed, r);
            simulate_coupled(p, &[starts.0, starts.1], t, c, w).map(|x| x.1.get(0, 1))
        })
        .collect::<Result<_>>()?;
    let scale = t.powf(1.0 - alpha0);
    let points: Vec<MeetingTailPoint> = ks
        .iter()
        .map(|&k| {
            let threshold = k * scale;
            let hits = occupancies.iter().filter(|&&a| a >= threshold).count();
            MeetingTailPoint { k, threshold, tail: Proportion::new(hits, replicas) }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        points.iter().filter(|pt| pt.tail.estimate > 0.0).map(|pt| (pt.k, pt.tail.estimate.ln())).unzip();
    let log_tail_slope = if xs.len() >= 2 { ols_slope(&xs, &ys) } else { f64::NAN };
    Ok(MeetingTail { t, alpha0, points, log_tail_slope, occupancies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, GraphSpec};
    use crate::spectral::heat_kernel_row;
    use nalgebra::DMatrix;

    /// Oracle: generator of the joint chain of `d` walkers on a small graph,
    /// exponentiated densely. Returns `P(all coincide at t)`.
    fn joint_chain_coincidence(p: &TransitionMatrix, origin: usize, d: u32, t: f64) -> f64 {
        let n = p.n();
        let size = n.pow(d);
        let decode = |mut x: usize| {
            (0..d)
                .map(|_| {
                    let v = x % n;
                    x /= n;
                    v
                })
                .collect::<Vec<_>>()
        };
        let encode = |pos: &[usize]| pos.iter().rev().fold(0, |acc, &v| acc * n + v);
        let dense = p.to_dense();
        let mut q = DMatrix::<f64>::zeros(size, size);
        for x in 0..size {
            let pos = decode(x);
            for v in 0..n {
                // Ring at v: each walker at v moves independently.
                let movers: Vec<usize> = (0..d as usize).filter(|&i| pos[i] == v).collect();
                if movers.is_empty() {
                    continue;
                }
                let mut outcomes = vec![(pos.clone(), 1.0)];
                for &i in &movers {
                    let mut next = Vec::new();
                    for (pp, w) in &outcomes {
                        for u in 0..n {
                            if dense[v][u] > 0.0 {
                                let mut np = pp.clone();
                                np[i] = u;
                                next.push((np, w * dense[v][u]));
                            }
                        }
                    }
                    outcomes = next;
                }
                for (np, w) in outcomes {
                    q[(x, encode(&np))] += w;
                }
                q[(x, x)] -= 1.0;
            }
        }
        let e = (q * t).exp();
        let start = encode(&vec![origin; d as usize]);
        (0..n).map(|v| e[(start, encode(&vec![v; d as usize]))]).sum()
    }

    #[test]
    fn two_state_joint_chain_value() {
        // Both walkers always sit together when started together on K2.
        let p = build(&GraphSpec::Complete { n: 2 }).unwrap();
        assert!((joint_chain_coincidence(&p, 0, 2, 1.0) - 1.0).abs() < 1e-12);
        let (s, occ) = simulate_coupled(&p, &[0, 0], 1.0, 3, 4).unwrap();
        assert!(s.all_coincide());
        assert!((occ.get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn directed_cycle_walkers_never_separate() {
        let p = build(&GraphSpec::DirectedCycle { n: 7 }).unwrap();
        let (s, occ) = simulate_coupled(&p, &[3, 3, 3], 25.0, 1, 2).unwrap();
        assert!(s.all_coincide());
        assert!(s.steps.windows(2).all(|w| w[0] == w[1]));
        assert!((occ.get(0, 2) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn time_zero() {
        let p = build(&GraphSpec::Cycle { n: 9 }).unwrap();
        let (s, occ) = simulate_coupled(&p, &[4, 4], 0.0, 1, 2).unwrap();
        assert!(s.all_coincide());
        assert_eq!(occ.get(0, 1), 0.0);
        let c = coincidence_probability(&p, 4, 3, 0.0, 10, 0).unwrap();
        assert_eq!(c.probability.estimate, 1.0);
        assert!(simulate_coupled(&p, &[4], 1.0, 1, 2).is_err());
    }

    #[test]
    fn lazy_cycle_coincidence_matches_joint_chain() {
        let p = build(&GraphSpec::Lazy { delta: 0.5, inner: Box::new(GraphSpec::Cycle { n: 4 }) }).unwrap();
        for d in [2u32, 3] {
            let exact = joint_chain_coincidence(&p, 0, d, 1.5);
            let est = coincidence_probability(&p, 0, d as usize, 1.5, 20_000, 5).unwrap();
            assert!((est.probability.estimate - exact).abs() < 3.0 * est.probability.stderr + 1e-3, "d={d}");
        }
    }

    #[test]
    fn marginals_follow_the_heat_kernel() {
        let p = build(&GraphSpec::Cycle { n: 6 }).unwrap();
        let t = 2.0;
        let reps = 20_000;
        let mut counts = vec![0usize; 6];
        for r in 0..reps {
            let (c, w) = replica_seeds(9, r);
            let (s, _) = simulate_coupled(&p, &[0, 0], t, c, w).unwrap();
            counts[s.positions[1]] += 1;
        }
        let kernel = heat_kernel_row(&p, 0, t).unwrap();
        for v in 0..6 {
            let est = Proportion::new(counts[v], reps as usize);
            assert!((est.estimate - kernel[v]).abs() < 3.5 * est.stderr.max(1e-3));
        }
    }

    #[test]
    fn occupancy_matches_grid_integral() {
        let p = build(&GraphSpec::Cycle { n: 5 }).unwrap();
        let t = 10.0;
        let (_, occ) = simulate_coupled(&p, &[0, 2], t, 21, 22).unwrap();
        let h = 1e-3;
        let mut integral = 0.0;
        for k in 0..(t / h) as usize {
            let (s, _) = simulate_coupled(&p, &[0, 2], (k as f64 + 0.5) * h, 21, 22).unwrap();
            if s.positions[0] == s.positions[1] {
                integral += h;
            }
        }
        let (s, _) = simulate_coupled(&p, &[0, 2], t, 21, 22).unwrap();
        let changes: u64 = s.steps.iter().sum();
        assert!((integral - occ.get(0, 1)).abs() <= changes as f64 * h, "{integral} vs {}", occ.get(0, 1));
    }

    #[test]
    fn meeting_tail_edges() {
        let p = build(&GraphSpec::Cycle { n: 16 }).unwrap();
        let t: f64 = 16.0;
        let scale = t.powf(1.0 - DEFAULT_ALPHA0);
        let mt = meeting_tail(&p, (0, 0), t, &[1e-9, t / scale * 1.01], DEFAULT_ALPHA0, 50, 3).unwrap();
        assert_eq!(mt.points[0].tail.estimate, 1.0);
        assert_eq!(mt.points[1].tail.estimate, 0.0);
        assert!(meeting_tail(&p, (0, 0), t, &[1.0], 1.0, 50, 3).is_err());
    }
    #[test]
    fn single_walker_matches_heat_kernel() {
        let p = build(&GraphSpec::Cycle { n: 6 }).unwrap();
        let t = 1.5;
        let kernel = crate::spectral::heat_kernel_row(&p, 0, t).unwrap();
        let reps = 40_000;
        let mut counts = vec![0usize; 6];
        let sampler = JumpSampler::new(&p);
        for r in 0..reps {
            counts[sampler.position_at(0, t, derive_seed(5, r, Lane::Walk)).unwrap()] += 1;
        }
        for v in 0..6 {
            let prop = Proportion::new(counts[v], reps as usize);
            assert!((prop.estimate - kernel[v]).abs() < 4.0 * prop.stderr + 1e-3, "{v}: {} vs {}", prop.estimate, kernel[v]);
        }
    }

}
