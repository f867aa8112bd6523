use crate::graph::TransitionMatrix;

/// Opinion vector with incrementally maintained extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    f: Vec<f64>,
    time: f64,
    events: u64,
    argmax: usize,
    argmin: usize,
}

fn arg_extreme(f: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &x) in f.iter().enumerate().skip(1) {
        if better(x, f[best]) {
            best = i;
        }
    }
    best
}

impl OpinionState {
    pub fn new(f: Vec<f64>) -> Self {
        assert!(!f.is_empty(), "opinion vector must be non-empty");
        let argmax = arg_extreme(&f, |a, b| a > b);
        let argmin = arg_extreme(&f, |a, b| a < b);
        Self { f, time: 0.0, events: 0, argmax, argmin }
    }

    pub fn opinions(&self) -> &[f64] {
        &self.f
    }

    pub fn into_opinions(self) -> Vec<f64> {
        self.f
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn max(&self) -> f64 {
        self.f[self.argmax]
    }

    pub fn min(&self) -> f64 {
        self.f[self.argmin]
    }

    pub fn osc(&self) -> f64 {
        self.max() - self.min()
    }

    /// Midpoint of the current range.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.max() + self.min())
    }

    /// Replaces `f(v)` with `(P f)(v)` and advances the clock to `time`.
    /// The new value is clamped to the range of the values it averages, so
    /// rounding can never push it outside that range.
    pub fn apply_ring(&mut self, p: &TransitionMatrix, v: usize, time: f64) {
        let (targets, probs) = p.row(v);
        let mut acc = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&u, &w) in targets.iter().zip(probs) {
            let x = self.f[u];
            acc += w * x;
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let new = acc.clamp(lo, hi);
        let old = std::mem::replace(&mut self.f[v], new);
        self.time = time;
        self.events += 1;
        if v == self.argmax && new < old {
            self.argmax = arg_extreme(&self.f, |a, b| a > b);
        }
        if v == self.argmin && new > old {
            self.argmin = arg_extreme(&self.f, |a, b| a < b);
        }
    }
}

/// Functional form of [`OpinionState::apply_ring`].
pub fn apply_ring(mut state: OpinionState, p: &TransitionMatrix, v: usize, time: f64) -> OpinionState {
    state.apply_ring(p, v, time);
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, GraphSpec};
    use proptest::prelude::*;

    #[test]
    fn single_rings() {
        let k2 = build(&GraphSpec::Complete { n: 2 }).unwrap();
        let s = apply_ring(OpinionState::new(vec![0.0, 1.0]), &k2, 0, 0.3);
        assert_eq!(s.opinions(), &[1.0, 1.0]);
        assert_eq!(s.osc(), 0.0);
        assert_eq!(s.time(), 0.3);

        let c4 = build(&GraphSpec::Cycle { n: 4 }).unwrap();
        let s = apply_ring(OpinionState::new(vec![0.0, 1.0, 0.0, 1.0]), &c4, 0, 1.0);
        assert_eq!(s.opinions(), &[1.0, 1.0, 0.0, 1.0]);

        let s = apply_ring(OpinionState::new(vec![0.7; 4]), &c4, 2, 1.0);
        assert_eq!(s.opinions(), &[0.7; 4]);
    }

    proptest! {
        #[test]
        fn extremes_track_a_full_rescan(
            f in proptest::collection::vec(-5.0f64..5.0, 9),
            rings in proptest::collection::vec(0usize..9, 1..200),
        ) {
            let p = build(&GraphSpec::DriftDigraph { half_width: 4 }).unwrap();
            let mut s = OpinionState::new(f);
            let (mut hi, mut lo) = (s.max(), s.min());
            for (i, v) in rings.into_iter().enumerate() {
                s.apply_ring(&p, v, i as f64);
                let max = s.opinions().iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = s.opinions().iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert_eq!(s.max(), max);
                prop_assert_eq!(s.min(), min);
                prop_assert!(max <= hi && min >= lo);
                hi = max;
                lo = min;
            }
        }
    }
}
