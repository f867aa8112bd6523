//! Symmetric Lanczos with full reorthogonalization, used for the top of the
//! spectrum on the orthogonal complement of a known unit vector.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub(crate) fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let radius = |i: usize| {
        (if i > 0 { beta[i - 1].abs() } else { 0.0 }) + (if i + 1 < k { beta[i].abs() } else { 0.0 })
    };
    let mut lo = (0..k).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift I) y = b` for symmetric tridiagonal `T` by LU with
/// partial pivoting (the LAPACK `gttrf`/`gttrs` scheme).
fn tridiagonal_solve(alpha: &[f64], beta: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let tiny = f64::EPSILON * alpha.iter().map(|a| a.abs()).fold(1.0, f64::max);
    let mut d: Vec<f64> = alpha.iter().map(|a| a - shift).collect();
    let mut dl: Vec<f64> = beta[..k - 1].to_vec();
    let mut du: Vec<f64> = beta[..k - 1].to_vec();
    let mut du2 = vec![0.0; k.saturating_sub(2)];
    let mut swapped = vec![false; k];
    for i in 0..k.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let m = dl[i] / d[i];
            dl[i] = m;
            d[i + 1] -= m * du[i];
        } else {
            let m = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = m;
            let t = du[i];
            du[i] = d[i + 1];
            d[i + 1] = t - m * d[i + 1];
            if i + 2 < k {
                du2[i] = du[i + 1];
                du[i + 1] *= -m;
            }
            swapped[i] = true;
        }
    }
    if d[k - 1] == 0.0 {
        d[k - 1] = tiny;
    }
    let mut y = b.to_vec();
    for i in 0..k.saturating_sub(1) {
        if swapped[i] {
            let t = y[i];
            y[i] = y[i + 1];
            y[i + 1] = t - dl[i] * y[i];
        } else {
            y[i + 1] -= dl[i] * y[i];
        }
    }
    for i in (0..k).rev() {
        let mut s = y[i];
        if i + 1 < k {
            s -= du[i] * y[i + 1];
        }
        if i + 2 < k {
            s -= du2[i] * y[i + 2];
        }
        y[i] = s / d[i];
    }
    y
}

/// Unit eigenvector of the tridiagonal for an (accurate) eigenvalue.
pub(crate) fn tridiagonal_eigenvector(alpha: &[f64], beta: &[f64], value: f64) -> Vec<f64> {
    let k = alpha.len();
    let mut y = vec![1.0; k];
    let shift = value + 1e-14 * value.abs().max(1.0);
    for _ in 0..3 {
        y = tridiagonal_solve(alpha, beta, shift, &y);
        let s = norm(&y);
        y.iter_mut().for_each(|x| *x /= s);
    }
    y
}

/// Largest eigenpair of the symmetric operator `apply` restricted to the
/// orthogonal complement of the unit vector `deflate`.
pub fn largest_deflated(
    n: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    deflate: &[f64],
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Eigenpair> {
    let dim = n.saturating_sub(1);
    if dim == 0 {
        return Err(Error::InvalidParameter("spectral gap needs at least two vertices".into()));
    }
    let project = |w: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for _ in 0..2 {
            let c = dot(deflate, w);
            axpy(w, -c, deflate);
            for q in basis {
                let c = dot(q, w);
                axpy(w, -c, q);
            }
        }
    };
    let mut rng = rng_from_seed(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut q, &[]);
    let s = norm(&q);
    q.iter_mut().for_each(|x| *x /= s);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let cap = max_iter.min(dim);
    for j in 0..cap {
        apply(&q, &mut w);
        let a = dot(&q, &w);
        alpha.push(a);
        basis.push(std::mem::take(&mut q));
        let mut r = w.clone();
        project(&mut r, &basis);
        let b = norm(&r);
        let theta = tridiagonal_max_eigenvalue(&alpha, &beta);
        let y = tridiagonal_eigenvector(&alpha, &beta, theta);
        let residual = b * y[y.len() - 1].abs();
        let exhausted = b <= 1e-13 || j + 1 == cap;
        if residual <= tol || exhausted {
            if residual > tol && j + 1 < dim {
                return Err(Error::NonConvergence { what: "lanczos", iterations: j + 1 });
            }
            let mut vector = vec![0.0; n];
            for (yi, qi) in y.iter().zip(&basis) {
                axpy(&mut vector, *yi, qi);
            }
            return Ok(Eigenpair { value: theta, vector, residual, iterations: j + 1 });
        }
        beta.push(b);
        q = r.into_iter().map(|x| x / b).collect();
    }
    unreachable!("loop returns on its last iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    #[test]
    fn bisection_matches_dense_eigen() {
        let alpha = [2.0, -1.0, 0.5, 3.0, 1.0];
        let beta = [1.0, 0.3, -2.0, 0.7];
        let mut m = DMatrix::zeros(5, 5);
        for i in 0..5 {
            m[(i, i)] = alpha[i];
            if i < 4 {
                m[(i, i + 1)] = beta[i];
                m[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(m.clone());
        let top = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let theta = tridiagonal_max_eigenvalue(&alpha, &beta);
        assert!((theta - top).abs() < 1e-13);
        let y = tridiagonal_eigenvector(&alpha, &beta, theta);
        let my = &m * DMatrix::from_column_slice(5, 1, &y);
        for i in 0..5 {
            assert!((my[i] - theta * y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn deflated_top_of_path_laplacian_like_operator() {
        // Symmetric random-walk operator on a 6-cycle: eigenvalues cos(2 pi k / 6).
        let n = 6;
        let apply = |x: &[f64], out: &mut [f64]| {
            for v in 0..n {
                out[v] = 0.5 * (x[(v + 1) % n] + x[(v + n - 1) % n]);
            }
        };
        let u: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
        let e = largest_deflated(n, apply, &u, 1e-12, 100, 7).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
        assert!(e.vector.iter().sum::<f64>().abs() < 1e-10);
    }
}
