use serde::{Deserialize, Serialize};

use super::log::EventLog;
use super::state::OpinionState;
use crate::chain::Chain;
use crate::error::{invalid, Result};
use crate::graph::TransitionMatrix;
use crate::rng::ClockStream;
use crate::spectral::{self, OpinionSummary};

/// A single trajectory driven by a clock stream.
pub struct Simulation<'a> {
    p: &'a TransitionMatrix,
    state: OpinionState,
    clock: ClockStream,
    pending: Option<(f64, usize)>,
    log: Option<EventLog>,
}

impl<'a> Simulation<'a> {
    pub fn new(p: &'a TransitionMatrix, f0: Vec<f64>, clock_seed: u64) -> Self {
        assert_eq!(f0.len(), p.n(), "opinion vector length must match the graph");
        Self { p, state: OpinionState::new(f0), clock: ClockStream::new(p.n(), clock_seed), pending: None, log: None }
    }

    /// Records every applied ring.
    pub fn recording(mut self) -> Self {
        self.log = Some(EventLog::new());
        self
    }

    pub fn state(&self) -> &OpinionState {
        &self.state
    }

    pub fn take_log(&mut self) -> Option<EventLog> {
        self.log.take()
    }

    fn peek(&mut self) -> (f64, usize) {
        *self.pending.get_or_insert_with(|| self.clock.next_ring())
    }

    fn apply_pending(&mut self) {
        let (t, v) = self.pending.take().expect("peeked ring");
        self.state.apply_ring(self.p, v, t);
        if let Some(log) = &mut self.log {
            log.push(t, v);
        }
    }

    /// Applies the next ring if it arrives no later than `horizon`.
    pub fn step_within(&mut self, horizon: f64) -> Option<(f64, usize)> {
        let ring = self.peek();
        (ring.0 <= horizon).then(|| {
            self.apply_pending();
            ring
        })
    }

    /// Applies every ring up to and including time `t`.
    pub fn advance_to(&mut self, t: f64) {
        while self.step_within(t).is_some() {}
    }

    /// Runs until `osc <= eps` or the next ring would fall after `t_max`.
    pub fn run_to_consensus(&mut self, eps: f64, t_max: f64) -> Option<f64> {
        if self.state.osc() <= eps {
            return Some(self.state.time());
        }
        while let Some((t, _)) = self.step_within(t_max) {
            if self.state.osc() <= eps {
                return Some(t);
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    /// `None` when censored at `t_max`.
    pub tau: Option<f64>,
    /// Stationary mean of the opinions at the stopping time.
    pub consensus_value: f64,
    /// Midpoint of the opinion range at the stopping time.
    pub midpoint: f64,
    pub final_osc: f64,
    pub events: u64,
}

impl ConsensusResult {
    pub fn censored(&self) -> bool {
        self.tau.is_none()
    }
}

fn check_eps(eps: f64, t_max: f64) -> Result<()> {
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    if !(t_max > 0.0) {
        return invalid(format!("t_max must be positive, got {t_max}"));
    }
    Ok(())
}

/// Runs one trajectory from `f0` to `eps`-consensus.
pub fn simulate(chain: &Chain, f0: Vec<f64>, eps: f64, t_max: f64, clock_seed: u64) -> Result<ConsensusResult> {
    check_eps(eps, t_max)?;
    if f0.len() != chain.n() {
        return invalid(format!("opinion vector has length {}, graph has {} vertices", f0.len(), chain.n()));
    }
    let mut sim = Simulation::new(chain.matrix(), f0, clock_seed);
    let tau = sim.run_to_consensus(eps, t_max);
    let s = sim.state();
    Ok(ConsensusResult {
        tau,
        consensus_value: spectral::mean(chain.pi(), s.opinions()),
        midpoint: s.midpoint(),
        final_osc: s.osc(),
        events: s.events(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    #[serde(flatten)]
    pub summary: OpinionSummary,
}

/// Summaries of one trajectory at increasing sample times.
pub fn simulate_trace(chain: &Chain, f0: Vec<f64>, sample_times: &[f64], clock_seed: u64) -> Result<Vec<TracePoint>> {
    if sample_times.windows(2).any(|w| !(w[1] > w[0])) || sample_times.first().is_some_and(|&t| !(t >= 0.0)) {
        return invalid("sample times must be non-negative and strictly increasing");
    }
    let mut sim = Simulation::new(chain.matrix(), f0, clock_seed);
    Ok(sample_times
        .iter()
        .map(|&t| {
            sim.advance_to(t);
            TracePoint { t, summary: chain.summarize(sim.state().opinions()) }
        })
        .collect())
}

/// Replays the rings of `log` up to time `until` starting from `f0`.
pub fn replay(p: &TransitionMatrix, f0: &[f64], log: &EventLog, until: f64) -> Vec<f64> {
    let mut state = OpinionState::new(f0.to_vec());
    for &(t, v) in log.events() {
        if t > until {
            break;
        }
        state.apply_ring(p, v, t);
    }
    state.into_opinions()
}
