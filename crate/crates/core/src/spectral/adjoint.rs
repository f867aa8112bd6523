//! Time reversal and the derived chains built from it.

use crate::graph::TransitionMatrix;

fn merged(n: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> TransitionMatrix {
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (v, u, w) in entries {
        rows[v].push((u, w));
    }
    for row in &mut rows {
        row.sort_by_key(|&(u, _)| u);
        row.dedup_by(|later, kept| {
            if later.0 == kept.0 {
                kept.1 += later.1;
                true
            } else {
                false
            }
        });
    }
    TransitionMatrix::from_rows_unchecked(n, rows)
}

/// `P*(v, w) = pi(w) P(w, v) / pi(v)`.
pub fn reversal(p: &TransitionMatrix, pi: &[f64]) -> TransitionMatrix {
    merged(p.n(), p.arcs().map(|(w, v, x)| (v, w, pi[w] * x / pi[v])))
        .with_label(format!("reversal:{}", p.label()))
}

/// `(P + P*) / 2`.
pub fn symmetrize(p: &TransitionMatrix, pi: &[f64]) -> TransitionMatrix {
    let rev = reversal(p, pi);
    merged(p.n(), p.arcs().chain(rev.arcs()).map(|(v, u, x)| (v, u, 0.5 * x)))
        .with_label(format!("additive-reversibilization:{}", p.label()))
}

/// `P* P`: one reversed step followed by one forward step.
pub fn star_product(p: &TransitionMatrix, pi: &[f64]) -> TransitionMatrix {
    let rev = reversal(p, pi);
    let entries = rev.arcs().flat_map(|(v, w, a)| p.row_entries(w).map(move |(u, b)| (v, u, a * b)));
    let entries: Vec<_> = entries.collect();
    merged(p.n(), entries.into_iter()).with_label(format!("multiplicative-reversibilization:{}", p.label()))
}

/// Detailed balance `pi(v) P(v,w) = pi(w) P(w,v)` to relative tolerance.
pub fn is_reversible(p: &TransitionMatrix, pi: &[f64], rel_tol: f64) -> bool {
    p.arcs().all(|(v, w, x)| {
        let a = pi[v] * x;
        let b = pi[w] * p.entry(w, v);
        (a - b).abs() <= rel_tol * a.max(b)
    })
}
