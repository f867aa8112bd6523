use serde::{Deserialize, Serialize};

use super::adjoint::is_reversible;
use super::lanczos::largest_deflated;
use super::stationary::StationaryDistribution;
use crate::error::Result;
use crate::graph::TransitionMatrix;

const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_MAX_ITER: usize = 3000;
const LANCZOS_SEED: u64 = 0x5eed_1a9c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Second eigenvalue of `(P + P*) / 2`.
    pub lambda2_sym: f64,
    /// `1 - lambda2_sym`.
    pub gamma: f64,
    /// Second eigenvalue of `P* P`.
    pub lambda2_star: f64,
    /// `1 - lambda2_star`.
    pub gamma_star: f64,
    /// `(1 - pi_min) gamma_star + 2 pi_min gamma`.
    pub gamma_hat: f64,
    pub pi_min: f64,
    pub reversible: bool,
    /// Right eigenvector of `(P + P*) / 2` for `lambda2_sym`, normalized in
    /// `l2(pi)`.
    #[serde(skip)]
    pub second_eigenvector: Vec<f64>,
}

/// `B = D^{1/2} P D^{-1/2}` applied to `x`, and its transpose.
struct Conjugated<'a> {
    p: &'a TransitionMatrix,
    sqrt_pi: Vec<f64>,
}

impl Conjugated<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            let (t, w) = self.p.row(v);
            *o = self.sqrt_pi[v] * t.iter().zip(w).map(|(&u, &a)| a * x[u] / self.sqrt_pi[u]).sum::<f64>();
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for v in 0..x.len() {
            let (t, w) = self.p.row(v);
            let xv = self.sqrt_pi[v] * x[v];
            for (&u, &a) in t.iter().zip(w) {
                out[u] += a * xv / self.sqrt_pi[u];
            }
        }
    }
}

/// Second eigenvalue of `(P + P*) / 2` with its `pi`-normalized eigenvector.
pub fn lambda2_symmetrized(p: &TransitionMatrix, pi: &[f64]) -> Result<(f64, Vec<f64>)> {
    let b = Conjugated { p, sqrt_pi: pi.iter().map(|x| x.sqrt()).collect() };
    let n = p.n();
    let op = |x: &[f64], out: &mut [f64]| {
        let mut t = vec![0.0; n];
        b.apply(x, out);
        b.apply_transpose(x, &mut t);
        out.iter_mut().zip(&t).for_each(|(o, ti)| *o = 0.5 * (*o + ti));
    };
    let e = largest_deflated(n, op, &b.sqrt_pi, LANCZOS_TOL, LANCZOS_MAX_ITER, LANCZOS_SEED)?;
    let vector = e.vector.iter().zip(&b.sqrt_pi).map(|(x, s)| x / s).collect();
    Ok((e.value, vector))
}

/// Second eigenvalue of `P* P`.
pub fn lambda2_star_product(p: &TransitionMatrix, pi: &[f64]) -> Result<f64> {
    let b = Conjugated { p, sqrt_pi: pi.iter().map(|x| x.sqrt()).collect() };
    let n = p.n();
    let op = |x: &[f64], out: &mut [f64]| {
        let mut t = vec![0.0; n];
        b.apply(x, &mut t);
        b.apply_transpose(&t, out);
    };
    Ok(largest_deflated(n, op, &b.sqrt_pi, LANCZOS_TOL, LANCZOS_MAX_ITER, LANCZOS_SEED)?.value)
}

pub fn gamma_hat(gamma: f64, gamma_star: f64, pi_min: f64) -> f64 {
    (1.0 - pi_min) * gamma_star + 2.0 * pi_min * gamma
}

pub fn spectral_gaps(p: &TransitionMatrix, pi: &StationaryDistribution) -> Result<SpectralReport> {
    let (lambda2_sym, second_eigenvector) = lambda2_symmetrized(p, &pi.pi)?;
    let lambda2_star = lambda2_star_product(p, &pi.pi)?;
    let gamma = 1.0 - lambda2_sym;
    let gamma_star = 1.0 - lambda2_star;
    Ok(SpectralReport {
        lambda2_sym,
        gamma,
        lambda2_star,
        gamma_star,
        gamma_hat: gamma_hat(gamma, gamma_star, pi.pi_min),
        pi_min: pi.pi_min,
        reversible: is_reversible(p, &pi.pi, 1e-10),
        second_eigenvector,
    })
}
