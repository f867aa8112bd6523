//! Mass fragmentation driven by the vertex clocks, and its exact duality
//! with the averaging dynamics on a shared event log.
//!
//! A unit of mass starts at the origin. When `v` rings, the mass sitting at
//! `v` is split along row `v` of the transition matrix. Run on the
//! time-reversed rings of `(t - s, t]`, the resulting mass vector gives the
//! weights that express `f_t(origin)` in terms of `f_{t-s}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{replay, EventLog, Simulation};
use crate::error::{invalid, Error, Result};
use crate::graph::TransitionMatrix;
use crate::rng::{derive_seed, ClockStream, Lane};
use crate::stats::{log_log_slope, MeanEstimate, Proportion};

pub const DUALITY_TOL: f64 = 1e-9;

/// Dense mass vector; no mass is ever dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentationState {
    origin: usize,
    mass: Vec<f64>,
    time: f64,
}

impl FragmentationState {
    pub fn new(n: usize, origin: usize) -> Self {
        assert!(origin < n, "origin {origin} out of range for n = {n}");
        let mut mass = vec![0.0; n];
        mass[origin] = 1.0;
        Self { origin, mass, time: 0.0 }
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `sum_v m(v)^d`.
    pub fn moment(&self, d: u32) -> f64 {
        self.mass.iter().filter(|&&m| m > 0.0).map(|m| m.powi(d as i32)).sum()
    }

    pub fn max_mass(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::max)
    }

    pub fn ring(&mut self, p: &TransitionMatrix, v: usize, time: f64) {
        self.time = time;
        let m = self.mass[v];
        if m == 0.0 {
            return;
        }
        self.mass[v] = 0.0;
        for (u, w) in p.row_entries(v) {
            self.mass[u] += w * m;
        }
    }
}

pub fn frag_ring(mut state: FragmentationState, p: &TransitionMatrix, v: usize) -> FragmentationState {
    let t = state.time;
    state.ring(p, v, t);
    state
}

/// Fragmentation from `origin` under the clock stream of `clock_seed` up to time `t`.
pub fn simulate_fragmentation(p: &TransitionMatrix, origin: usize, t: f64, clock_seed: u64) -> Result<FragmentationState> {
    let mut runs = fragmentation_path(p, origin, &[t], clock_seed)?;
    Ok(runs.pop().expect("one sample"))
}

/// Snapshots of one fragmentation trajectory at increasing times.
pub fn fragmentation_path(p: &TransitionMatrix, origin: usize, times: &[f64], clock_seed: u64) -> Result<Vec<FragmentationState>> {
    if origin >= p.n() {
        return invalid(format!("origin {origin} out of range for n = {}", p.n()));
    }
    if times.iter().any(|&t| !(t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("times must be non-negative and non-decreasing");
    }
    let mut state = FragmentationState::new(p.n(), origin);
    let mut clock = ClockStream::new(p.n(), clock_seed).peekable();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while let Some(&(time, v)) = clock.peek() {
            if time > t {
                break;
            }
            state.ring(p, v, time);
            clock.next();
        }
        let mut snap = state.clone();
        snap.time = t;
        out.push(snap);
    }
    Ok(out)
}

/// Fragmentation along the rings of `log` in `(t - s, t]`, taken in reverse
/// time order.
pub fn reversed_fragmentation(p: &TransitionMatrix, origin: usize, log: &EventLog, t: f64, s: f64) -> FragmentationState {
    let mut state = FragmentationState::new(p.n(), origin);
    for &(time, v) in log.window(t - s, t).iter().rev() {
        state.ring(p, v, t - time);
    }
    state.time = s;
    state
}

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < 2 {
        return invalid(format!("need at least 2 replicas, got {replicas}"));
    }
    Ok(())
}

fn sample_paths(
    p: &TransitionMatrix,
    origin: usize,
    times: &[f64],
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<Vec<FragmentationState>>> {
    check_replicas(replicas)?;
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| fragmentation_path(p, origin, times, derive_seed(base_seed, r, Lane::Clock)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub d: u32,
    pub replicas: usize,
    pub points: Vec<MomentPoint>,
    /// Least-squares slope of `log mean` against `log t` over `t > 0`.
    pub slope: f64,
}

/// Monte Carlo `E[sum_v m_t(v)^d]` on a time grid, one estimate per `d`
/// from shared trajectories.
pub fn moments(
    p: &TransitionMatrix,
    origin: usize,
    times: &[f64],
    ds: &[u32],
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if ds.contains(&0) {
        return invalid("moment order must be >= 1");
    }
    let paths = sample_paths(p, origin, times, replicas, base_seed)?;
    Ok(ds
        .iter()
        .map(|&d| {
            let points: Vec<MomentPoint> = times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let xs: Vec<f64> = paths.iter().map(|path| path[i].moment(d)).collect();
                    let e = MeanEstimate::from_samples(&xs);
                    MomentPoint { t, mean: e.mean, stderr: e.stderr }
                })
                .collect();
            let (ts, ms): (Vec<f64>, Vec<f64>) = points.iter().map(|pt| (pt.t, pt.mean)).unzip();
            MomentEstimate { d, replicas, points, slope: log_log_slope(&ts, &ms) }
        })
        .collect())
}

/// Componentwise Monte Carlo mean of `m_t` with standard errors.
pub fn mean_mass(p: &TransitionMatrix, origin: usize, t: f64, replicas: usize, base_seed: u64) -> Result<Vec<MeanEstimate>> {
    let paths = sample_paths(p, origin, &[t], replicas, base_seed)?;
    Ok((0..p.n())
        .map(|v| MeanEstimate::from_samples(&paths.iter().map(|path| path[0].mass[v]).collect::<Vec<_>>()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    #[serde(flatten)]
    pub tail: Proportion,
}

/// Empirical `P(max_v m_t(v) >= eps)` along a time grid.
pub fn max_mass_tail(
    p: &TransitionMatrix,
    origin: usize,
    times: &[f64],
    eps: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<TailPoint>> {
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let paths = sample_paths(p, origin, times, replicas, base_seed)?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let hits = paths.iter().filter(|path| path[i].max_mass() >= eps).count();
            TailPoint { t, tail: Proportion::new(hits, replicas) }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub t: f64,
    pub s: f64,
    pub events: usize,
    /// `f_t(o)` from the forward dynamics, per origin.
    pub forward: Vec<f64>,
    /// `sum_v m(o, v) f_{t-s}(v)` from the reversed fragmentation, per origin.
    pub dual: Vec<f64>,
    pub max_difference: f64,
    pub worst_origin: usize,
}

/// Checks the duality on one event log for every origin.
pub fn duality_on_log(p: &TransitionMatrix, f0: &[f64], log: &EventLog, t: f64, s: f64) -> Result<DualityReport> {
    if !(0.0..=t).contains(&s) {
        return invalid(format!("need 0 <= s <= t, got s = {s}, t = {t}"));
    }
    if f0.len() != p.n() {
        return invalid(format!("opinion vector has length {}, graph has {} vertices", f0.len(), p.n()));
    }
    let forward = replay(p, f0, log, t);
    let earlier = replay(p, f0, log, t - s);
    let dual: Vec<f64> = (0..p.n())
        .map(|o| {
            let m = reversed_fragmentation(p, o, log, t, s);
            m.mass.iter().zip(&earlier).map(|(a, b)| a * b).sum()
        })
        .collect();
    let (worst_origin, max_difference) = forward
        .iter()
        .zip(&dual)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |best, (o, d)| if d > best.1 { (o, d) } else { best });
    let report = DualityReport { t, s, events: log.window(0.0, t).len(), forward, dual, max_difference, worst_origin };
    if max_difference > DUALITY_TOL {
        return Err(Error::DualityMismatch { origin: worst_origin, difference: max_difference });
    }
    Ok(report)
}

/// Generates the rings of `[0, t]` from `clock_seed` and checks the duality.
pub fn duality_check(p: &TransitionMatrix, f0: &[f64], t: f64, s: f64, clock_seed: u64) -> Result<DualityReport> {
    if !(t >= 0.0) {
        return invalid(format!("t must be non-negative, got {t}"));
    }
    let mut sim = Simulation::new(p, f0.to_vec(), clock_seed).recording();
    sim.advance_to(t);
    let log = sim.take_log().expect("recording enabled");
    duality_on_log(p, f0, &log, t, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, GraphSpec};
    use proptest::prelude::*;

    #[test]
    fn first_ring_at_origin_spreads_along_the_row() {
        let p = build(&GraphSpec::StarPathStar { leaves: 3 }).unwrap();
        let s = frag_ring(FragmentationState::new(p.n(), 0), &p, 0);
        for v in 0..p.n() {
            assert_eq!(s.mass()[v], p.entry(0, v));
        }
        let s2 = frag_ring(s.clone(), &p, 7);
        assert_eq!(s2, s);
    }

    #[test]
    fn two_state_single_ring() {
        let p = build(&GraphSpec::Complete { n: 2 }).unwrap();
        let s = frag_ring(FragmentationState::new(2, 0), &p, 0);
        assert_eq!(s.mass(), &[0.0, 1.0]);
        let z = simulate_fragmentation(&p, 1, 0.0, 4).unwrap();
        assert_eq!(z.mass(), &[0.0, 1.0]);
    }

    #[test]
    fn two_state_duality_by_hand() {
        // One ring at vertex 0 inside (t - s, t]: f_t(0) = f_{t-s}(1).
        let p = build(&GraphSpec::Complete { n: 2 }).unwrap();
        let log: EventLog = [(0.4, 1), (1.5, 0)].into_iter().collect();
        let f0 = [0.2, 0.9];
        let r = duality_on_log(&p, &f0, &log, 2.0, 1.0).unwrap();
        // f_1 = (0.2, 0.2) after the ring at 1; then vertex 0 copies vertex 1.
        assert_eq!(r.forward, vec![0.2, 0.2]);
        let m = reversed_fragmentation(&p, 0, &log, 2.0, 1.0);
        assert_eq!(m.mass(), &[0.0, 1.0]);
        assert_eq!(r.max_difference, 0.0);
    }

    #[test]
    fn mismatch_is_reported_with_origin() {
        // A defective row (sum 2) breaks the identity because the forward
        // update is clamped to the range of the averaged values.
        let p = TransitionMatrix::from_rows_unchecked(2, vec![vec![(1, 2.0)], vec![(0, 1.0)]]);
        let log: EventLog = [(0.5, 0)].into_iter().collect();
        match duality_on_log(&p, &[0.2, 0.9], &log, 1.0, 1.0) {
            Err(Error::DualityMismatch { origin: 0, difference }) => assert!((difference - 0.9).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn spec() -> impl Strategy<Value = GraphSpec> {
        prop_oneof![
            Just(GraphSpec::Cycle { n: 16 }),
            Just(GraphSpec::Hypercube { dim: 3 }),
            Just(GraphSpec::DriftDigraph { half_width: 4 }),
            Just(GraphSpec::Lazy { delta: 0.3, inner: Box::new(GraphSpec::DirectedCycle { n: 5 }) }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn duality_holds_pathwise(g in spec(), seed in any::<u64>(), t in 0.0f64..20.0, frac in 0.0f64..=1.0) {
            let p = build(&g).unwrap();
            let f0: Vec<f64> = (0..p.n()).map(|v| ((v * 7 + 3) % 5) as f64 - 2.0).collect();
            let r = duality_check(&p, &f0, t, frac * t, seed).unwrap();
            prop_assert!(r.max_difference < DUALITY_TOL);
        }

        #[test]
        fn mass_is_conserved_and_moments_order(g in spec(), seed in any::<u64>(), t in 0.0f64..40.0) {
            let p = build(&g).unwrap();
            let s = simulate_fragmentation(&p, 0, t, seed).unwrap();
            prop_assert!((s.total() - 1.0).abs() < 1e-12);
            prop_assert!(s.mass().iter().all(|&m| m >= 0.0));
            prop_assert_eq!(s.moment(1), s.total());
            for d in 1..5 {
                prop_assert!(s.moment(d + 1) <= s.moment(d) + 1e-15);
            }
        }
    }

    #[test]
    fn long_run_mass_drift_is_negligible() {
        let p = build(&GraphSpec::Hypercube { dim: 6 }).unwrap();
        let s = simulate_fragmentation(&p, 0, 1e6 / 64.0, 17).unwrap();
        assert!((s.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_moments_and_tails() {
        let p = build(&GraphSpec::Cycle { n: 10 }).unwrap();
        let m = moments(&p, 0, &[0.0, 1.0, 4.0], &[1, 2], 20, 1).unwrap();
        assert!(m[0].points.iter().all(|pt| (pt.mean - 1.0).abs() < 1e-12));
        assert_eq!(m[1].points[0].mean, 1.0);
        let tail = max_mass_tail(&p, 0, &[0.0, 2.0], 1.5, 20, 1).unwrap();
        assert!(tail.iter().all(|pt| pt.tail.estimate == 0.0));
        let tail = max_mass_tail(&p, 0, &[0.0], 1.0, 20, 1).unwrap();
        assert_eq!(tail[0].tail.estimate, 1.0);
        assert!(moments(&p, 0, &[1.0], &[0], 20, 1).is_err());
    }
}
