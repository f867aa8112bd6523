//! `e^{t(P - I)}` via Poisson-weighted powers of `P`.

use crate::error::{invalid, Result};
use crate::graph::TransitionMatrix;

/// Relative Poisson mass discarded on each side of the mode.
const TAIL: f64 = 1e-14;

/// Poisson(t) weights on `first..first + weights.len()`, normalized over the
/// retained window; the discarded mass is below `2e-14`.
#[derive(Debug, Clone)]
pub struct PoissonWindow {
    pub first: usize,
    pub weights: Vec<f64>,
}

impl PoissonWindow {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return invalid(format!("time must be finite and >= 0, got {t}"));
        }
        if t == 0.0 {
            return Ok(Self { first: 0, weights: vec![1.0] });
        }
        let mode = t.floor() as usize;
        // Unnormalized weights relative to the mode, grown outward; each side
        // is cut once a geometric bound on its remainder is negligible.
        let mut right = vec![1.0];
        let mut sum = 1.0;
        let mut k = mode;
        loop {
            let ratio = t / (k + 1) as f64;
            let next = right[right.len() - 1] * ratio;
            right.push(next);
            sum += next;
            k += 1;
            let r = t / (k + 1) as f64;
            if r < 1.0 && next / (1.0 - r) < TAIL * sum {
                break;
            }
        }
        let mut left = Vec::new();
        let mut w = 1.0;
        let mut k = mode;
        while k > 0 {
            w *= k as f64 / t;
            k -= 1;
            left.push(w);
            sum += w;
            let r = k as f64 / t;
            if r < 1.0 && w * r / (1.0 - r) < TAIL * sum {
                break;
            }
        }
        let first = mode - left.len();
        let mut weights: Vec<f64> = left.into_iter().rev().chain(right).collect();
        weights.iter_mut().for_each(|x| *x /= sum);
        Ok(Self { first, weights })
    }

    pub fn last(&self) -> usize {
        self.first + self.weights.len() - 1
    }
}

fn accumulate(t: f64, v0: &[f64], mut step: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Vec<f64>> {
    let window = PoissonWindow::new(t)?;
    let mut v = v0.to_vec();
    for _ in 0..window.first {
        v = step(&v);
    }
    let mut out = vec![0.0; v.len()];
    for (i, &w) in window.weights.iter().enumerate() {
        if i > 0 {
            v = step(&v);
        }
        out.iter_mut().zip(&v).for_each(|(o, x)| *o += w * x);
    }
    Ok(out)
}

/// `E f_t = e^{t(P - I)} f_0`.
pub fn expected_opinions(p: &TransitionMatrix, f0: &[f64], t: f64) -> Result<Vec<f64>> {
    if f0.len() != p.n() {
        return invalid(format!("opinion vector has length {}, expected {}", f0.len(), p.n()));
    }
    accumulate(t, f0, |f| p.apply(f))
}

/// Row `o` of `e^{t(P - I)}`: the law at time `t` of the rate-1
/// continuous-time walk started at `o`.
pub fn heat_kernel_row(p: &TransitionMatrix, o: usize, t: f64) -> Result<Vec<f64>> {
    if o >= p.n() {
        return invalid(format!("vertex {o} out of range for n = {}", p.n()));
    }
    let mut mu = vec![0.0; p.n()];
    mu[o] = 1.0;
    accumulate(t, &mu, |m| p.apply_left(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, GraphSpec};
    use crate::spectral::{spectral_gaps, stationary};
    use nalgebra::DMatrix;

    fn poisson_pmf(t: f64, k: usize) -> f64 {
        let mut lg = 0.0;
        for j in 1..=k {
            lg += (j as f64).ln();
        }
        (-t + k as f64 * t.ln() - lg).exp()
    }

    #[test]
    fn window_matches_pmf_and_has_tiny_tail() {
        for t in [0.3, 1.0, 7.5, 120.0, 4000.0] {
            let w = PoissonWindow::new(t).unwrap();
            let covered: f64 = (w.first..=w.last()).map(|k| poisson_pmf(t, k)).sum();
            // The log-space oracle itself loses about |ln pmf| * eps per term.
            let oracle_err = 1e-15 * t.max(1.0) * (w.weights.len() as f64);
            assert!(1.0 - covered < 1e-12 + oracle_err, "t={t}: tail {}", 1.0 - covered);
            for (i, &x) in w.weights.iter().enumerate() {
                assert!((x - poisson_pmf(t, w.first + i)).abs() < 1e-12 + oracle_err);
            }
            assert!(w.last() as f64 <= t + 12.0 * t.sqrt() + 40.0);
        }
    }

    #[test]
    fn time_zero_is_identity_and_negative_rejected() {
        let p = build(&GraphSpec::Cycle { n: 5 }).unwrap();
        let f = vec![0.1, 0.7, -2.0, 3.0, 0.0];
        assert_eq!(expected_opinions(&p, &f, 0.0).unwrap(), f);
        assert!(expected_opinions(&p, &f, -1.0).is_err());
    }

    #[test]
    fn two_state_closed_form() {
        let p = build(&GraphSpec::Complete { n: 2 }).unwrap();
        for t in [0.1, 1.0, 3.0] {
            let f = expected_opinions(&p, &[0.0, 1.0], t).unwrap();
            assert!((f[0] - 0.5 * (1.0 - (-2.0 * t).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_decays_exponentially() {
        let p = build(&GraphSpec::Cycle { n: 16 }).unwrap();
        let pi = stationary(&p).unwrap();
        let r = spectral_gaps(&p, &pi).unwrap();
        let t = 5.0;
        let f = expected_opinions(&p, &r.second_eigenvector, t).unwrap();
        for (a, b) in f.iter().zip(&r.second_eigenvector) {
            assert!((a - (-r.gamma * t).exp() * b).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_dense_exponential_and_semigroup() {
        let p = build(&GraphSpec::DriftDigraph { half_width: 6 }).unwrap();
        let n = p.n();
        let d = p.to_dense();
        let q = DMatrix::from_fn(n, n, |i, j| d[i][j] - if i == j { 1.0 } else { 0.0 });
        let f0: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        for t in [0.5, 4.0, 30.0] {
            let e = (q.clone() * t).exp();
            let dense = &e * nalgebra::DVector::from_column_slice(&f0);
            let got = expected_opinions(&p, &f0, t).unwrap();
            for i in 0..n {
                assert!((dense[i] - got[i]).abs() < 1e-9);
            }
        }
        let once = expected_opinions(&p, &f0, 7.0).unwrap();
        let twice = expected_opinions(&p, &expected_opinions(&p, &f0, 3.0).unwrap(), 4.0).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_row_is_a_distribution() {
        let p = build(&GraphSpec::StarPathStar { leaves: 6 }).unwrap();
        let row = heat_kernel_row(&p, 0, 12.0).unwrap();
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&x| x >= 0.0));
    }
}
