//! Networks: construction, validation, serialization and combinatorial
//! metrics of row-stochastic transition matrices.

pub mod io;
mod matrix;
mod metrics;
mod spec;
mod validate;

pub use matrix::{TransitionMatrix, ROW_SUM_TOL};
pub use metrics::{metrics, GraphMetrics};
pub use spec::{build, drift_index, GraphSpec};
pub use validate::{period, strongly_connected, validate, RowSumViolation, ValidationReport};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn any_spec() -> impl Strategy<Value = GraphSpec> {
        prop_oneof![
            (3usize..40).prop_map(|n| GraphSpec::Cycle { n }),
            (2usize..40).prop_map(|n| GraphSpec::Path { n }),
            (2usize..20).prop_map(|n| GraphSpec::Complete { n }),
            (1u32..7).prop_map(|dim| GraphSpec::Hypercube { dim }),
            (2usize..20).prop_map(|leaves| GraphSpec::StarPathStar { leaves }),
            (2usize..30).prop_map(|n| GraphSpec::DirectedCycle { n }),
            (4usize..15).prop_map(|half_width| GraphSpec::DriftDigraph { half_width }),
            (1usize..30).prop_map(|radius| GraphSpec::Line { radius }),
            prop::collection::vec(0usize..6, 2..5).prop_map(|leaves| GraphSpec::LeafyLine { leaves }),
        ]
    }

    /// In/out-degree balance computed straight from the arc multiset.
    fn balanced_by_arc_multiset(p: &TransitionMatrix) -> bool {
        let mut balance = vec![0i64; p.n()];
        for (v, u, _) in p.arcs() {
            if v != u {
                balance[v] += 1;
                balance[u] -= 1;
            }
        }
        balance.iter().all(|&b| b == 0)
    }

    proptest! {
        #[test]
        fn generated_matrices_validate_cleanly(spec in any_spec()) {
            let p = build(&spec).unwrap();
            let report = validate(&p);
            prop_assert_eq!(report.violation_count(), 0);
            prop_assert!(p.is_simple_random_walk());
            let m = metrics(&p);
            prop_assert_eq!(m.is_eulerian, balanced_by_arc_multiset(&p));
            if p.n() >= 2 {
                prop_assert!(m.diameter >= 1);
            }
        }

        #[test]
        fn lazy_half_dominates_diagonal(spec in any_spec()) {
            let p = build(&spec).unwrap();
            let l = p.lazy(0.5).unwrap();
            for v in 0..p.n() {
                prop_assert!(l.entry(v, v) >= 0.5);
            }
            prop_assert_eq!(validate(&l).violation_count(), 0);
        }
    }
}
