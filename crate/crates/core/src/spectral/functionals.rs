//! Mean, variance, energy and their instantaneous drifts under one rate-1
//! clock per vertex.

use serde::{Deserialize, Serialize};

use super::adjoint::star_product;
use crate::graph::TransitionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpinionSummary {
    pub mean: f64,
    pub variance: f64,
    pub energy: f64,
    pub osc: f64,
}

pub fn mean(pi: &[f64], f: &[f64]) -> f64 {
    pi.iter().zip(f).map(|(p, x)| p * x).sum()
}

pub fn variance(pi: &[f64], f: &[f64]) -> f64 {
    let m = mean(pi, f);
    pi.iter().zip(f).map(|(p, x)| p * (x - m) * (x - m)).sum()
}

pub fn norm_sq(pi: &[f64], f: &[f64]) -> f64 {
    pi.iter().zip(f).map(|(p, x)| p * x * x).sum()
}

/// `(1/2) sum_{v,w} pi(v) P(v,w) (f(v) - f(w))^2`.
pub fn energy(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> f64 {
    0.5 * p.arcs().map(|(v, w, x)| pi[v] * x * (f[v] - f[w]).powi(2)).sum::<f64>()
}

pub fn osc(f: &[f64]) -> f64 {
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if f.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub fn summarize(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> OpinionSummary {
    OpinionSummary { mean: mean(pi, f), variance: variance(pi, f), energy: energy(p, pi, f), osc: osc(f) }
}

/// `||(I - P) f||_pi^2`.
pub fn residual_norm_sq(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> f64 {
    let pf = p.apply(f);
    pi.iter().zip(f).zip(&pf).map(|((w, a), b)| w * (a - b).powi(2)).sum()
}

fn in_arcs(p: &TransitionMatrix) -> Vec<Vec<(usize, f64)>> {
    let mut inc = vec![Vec::new(); p.n()];
    for (u, v, x) in p.arcs() {
        inc[v].push((u, x));
    }
    inc
}

/// Energy change when `f(v)` alone is replaced by `g`.
fn local_energy_change(p: &TransitionMatrix, inc: &[Vec<(usize, f64)>], pi: &[f64], f: &[f64], v: usize, g: f64) -> f64 {
    let fv = f[v];
    let out: f64 = p
        .row_entries(v)
        .filter(|&(u, _)| u != v)
        .map(|(u, x)| pi[v] * x * ((g - f[u]).powi(2) - (fv - f[u]).powi(2)))
        .sum();
    let inn: f64 = inc[v]
        .iter()
        .filter(|&&(u, _)| u != v)
        .map(|&(u, x)| pi[u] * x * ((f[u] - g).powi(2) - (f[u] - fv).powi(2)))
        .sum();
    0.5 * (out + inn)
}

/// Exact drift of the energy: every vertex rings at rate 1, so the drift is
/// `sum_v [E(f^v) - E(f)]` where `f^v` updates `f(v)` to `(P f)(v)`.
pub fn energy_drift(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> f64 {
    let inc = in_arcs(p);
    let pf = p.apply(f);
    (0..p.n()).map(|v| local_energy_change(p, &inc, pi, f, v, pf[v])).sum()
}

/// Drift of `M^2`, with the sandwich `pi_min ||(I-P)f||^2 <= D(M^2) <= pi_max ||(I-P)f||^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSquareDrift {
    pub drift: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn mean_square_drift(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> MeanSquareDrift {
    let pf = p.apply(f);
    let m = mean(pi, f);
    let drift = (0..p.n()).map(|v| (m + pi[v] * (pf[v] - f[v])).powi(2) - m * m).sum();
    let r = residual_norm_sq(p, pi, f);
    let (lo, hi) = pi.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    MeanSquareDrift { drift, lower: lo * r, upper: hi * r }
}

/// Exact drift of `||f||_pi^2`.
pub fn norm_sq_drift(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> f64 {
    let pf = p.apply(f);
    (0..p.n()).map(|v| pi[v] * (pf[v] * pf[v] - f[v] * f[v])).sum()
}

/// `E_{P*P}(f)`.
pub fn star_energy(p: &TransitionMatrix, pi: &[f64], f: &[f64]) -> f64 {
    energy(&star_product(p, pi), pi, f)
}
