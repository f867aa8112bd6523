//! Replica-parallel Monte Carlo estimators over independent seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::init::{InitialOpinionSpec, InitialOpinions};
use super::simulate::{simulate, ConsensusResult, Simulation};
use crate::chain::Chain;
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, Lane};
use crate::stats::{variance_with_stderr, MeanEstimate, Proportion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRecord {
    pub replica: u64,
    pub clock_seed: u64,
    pub opinion_seed: u64,
    #[serde(flatten)]
    pub result: ConsensusResult,
}

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < 2 {
        return invalid(format!("need at least 2 replicas, got {replicas}"));
    }
    Ok(())
}

/// Runs `replicas` independent trajectories to `eps`-consensus. Results are
/// in replica order regardless of scheduling.
pub fn run_replicas(
    chain: &Chain,
    init: &InitialOpinionSpec,
    eps: f64,
    t_max: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<ReplicaRecord>> {
    let opinions = InitialOpinions::new(init, chain)?;
    (0..replicas as u64)
        .into_par_iter()
        .map(|replica| {
            let clock_seed = derive_seed(base_seed, replica, Lane::Clock);
            let opinion_seed = derive_seed(base_seed, replica, Lane::Opinion);
            let result = simulate(chain, opinions.draw(opinion_seed), eps, t_max, clock_seed)?;
            Ok(ReplicaRecord { replica, clock_seed, opinion_seed, result })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub eps: f64,
    pub t_max: f64,
    pub replicas: usize,
    pub completed: usize,
    pub censored: usize,
    /// Mean and standard error over completed runs.
    pub mean: f64,
    pub stderr: f64,
    pub all_censored: bool,
    #[serde(skip)]
    pub records: Vec<ReplicaRecord>,
}

impl TauEstimate {
    pub fn from_records(eps: f64, t_max: f64, records: Vec<ReplicaRecord>) -> Self {
        let taus: Vec<f64> = records.iter().filter_map(|r| r.result.tau).collect();
        let est = MeanEstimate::from_samples(&taus);
        Self {
            eps,
            t_max,
            replicas: records.len(),
            completed: taus.len(),
            censored: records.len() - taus.len(),
            mean: est.mean,
            stderr: est.stderr,
            all_censored: taus.is_empty(),
            records,
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.replicas as f64
    }

    /// Empirical `P(tau > t)` for `t <= t_max`; censored runs count as exceeding.
    pub fn survival(&self, t: f64) -> Proportion {
        let exceed = self.records.iter().filter(|r| r.result.tau.is_none_or(|x| x > t)).count();
        Proportion::new(exceed, self.replicas)
    }
}

pub fn estimate_tau(
    chain: &Chain,
    init: &InitialOpinionSpec,
    eps: f64,
    replicas: usize,
    t_max: f64,
    base_seed: u64,
) -> Result<TauEstimate> {
    check_replicas(replicas)?;
    let records = run_replicas(chain, init, eps, t_max, replicas, base_seed)?;
    Ok(TauEstimate::from_records(eps, t_max, records))
}

/// Sample law of the consensus value. Each replica runs to `osc <= stop_eps`
/// and reports the midpoint of the remaining range, which is within
/// `stop_eps / 2` of the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusVariance {
    pub stop_eps: f64,
    pub completed: usize,
    pub censored: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

pub fn estimate_consensus_variance(
    chain: &Chain,
    init: &InitialOpinionSpec,
    replicas: usize,
    stop_eps: f64,
    t_max: f64,
    base_seed: u64,
) -> Result<ConsensusVariance> {
    check_replicas(replicas)?;
    let records = run_replicas(chain, init, stop_eps, t_max, replicas, base_seed)?;
    let values: Vec<f64> = records.iter().filter(|r| !r.result.censored()).map(|r| r.result.midpoint).collect();
    let m = MeanEstimate::from_samples(&values);
    let (variance, variance_stderr) = variance_with_stderr(&values);
    Ok(ConsensusVariance {
        stop_eps,
        completed: values.len(),
        censored: records.len() - values.len(),
        mean: m.mean,
        mean_stderr: m.stderr,
        variance,
        variance_stderr,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub t: f64,
    #[serde(flatten)]
    pub tail: Proportion,
}

/// Empirical `P(|f_t(o) - mu| >= eps)` along a time grid for an iid start
/// with mean `mu`.
pub fn concentration_profile(
    chain: &Chain,
    init: &InitialOpinionSpec,
    origin: usize,
    times: &[f64],
    eps: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<ConcentrationPoint>> {
    let Some(mu) = init.iid_mean() else {
        return invalid(format!("concentration needs an iid initial law, got `{init}`"));
    };
    if origin >= chain.n() {
        return invalid(format!("origin {origin} out of range for n = {}", chain.n()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.first().is_some_and(|&t| !(t >= 0.0)) {
        return invalid("time grid must be non-negative and strictly increasing");
    }
    let opinions = InitialOpinions::new(init, chain)?;
    let hits: Vec<Vec<bool>> = (0..replicas as u64)
        .into_par_iter()
        .map(|replica| {
            let f0 = opinions.draw(derive_seed(base_seed, replica, Lane::Opinion));
            let mut sim = Simulation::new(chain.matrix(), f0, derive_seed(base_seed, replica, Lane::Clock));
            times
                .iter()
                .map(|&t| {
                    sim.advance_to(t);
                    (sim.state().opinions()[origin] - mu).abs() >= eps
                })
                .collect()
        })
        .collect();
    Ok(times
        .iter()
        .enumerate()
        .map(|(i, &t)| ConcentrationPoint { t, tail: Proportion::new(hits.iter().filter(|h| h[i]).count(), replicas) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSpec;

    #[test]
    fn estimates_are_deterministic_and_ordered() {
        let chain = Chain::from_spec(&GraphSpec::Cycle { n: 8 }).unwrap();
        let a = estimate_tau(&chain, &InitialOpinionSpec::Uniform, 0.1, 16, 1e4, 3).unwrap();
        let b = estimate_tau(&chain, &InitialOpinionSpec::Uniform, 0.1, 16, 1e4, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.records.iter().enumerate().all(|(i, r)| r.replica == i as u64));
        assert!(estimate_tau(&chain, &InitialOpinionSpec::Uniform, 0.1, 1, 1e4, 3).is_err());
    }

    #[test]
    fn all_censored_is_flagged() {
        let chain = Chain::from_spec(&GraphSpec::Path { n: 20 }).unwrap();
        let e = estimate_tau(&chain, &InitialOpinionSpec::Step { from: None }, 1e-3, 4, 0.1, 1).unwrap();
        assert!(e.all_censored);
        assert_eq!(e.censored, 4);
        assert!(e.mean.is_nan());
        assert_eq!(e.survival(0.05).estimate, 1.0);
    }

    #[test]
    fn consensus_stays_in_initial_range() {
        let chain = Chain::from_spec(&GraphSpec::StarPathStar { leaves: 3 }).unwrap();
        let v = estimate_consensus_variance(&chain, &InitialOpinionSpec::Uniform, 50, 1e-6, 1e6, 8).unwrap();
        assert_eq!(v.completed, 50);
        assert!(v.values.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn concentration_at_time_zero() {
        let chain = Chain::from_spec(&GraphSpec::Cycle { n: 16 }).unwrap();
        let prof = concentration_profile(&chain, &InitialOpinionSpec::Bernoulli { p: 0.5 }, 0, &[0.0, 50.0], 0.4, 40, 2)
            .unwrap();
        assert_eq!(prof[0].tail.estimate, 1.0);
        assert!(prof[1].tail.estimate < 1.0);
        assert!(concentration_profile(&chain, &InitialOpinionSpec::Step { from: None }, 0, &[1.0], 0.1, 4, 0).is_err());
    }
}
