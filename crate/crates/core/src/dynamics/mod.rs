//! Asynchronous averaging dynamics driven by unit-rate vertex clocks.

mod estimate;
mod init;
mod log;
mod simulate;
mod state;

pub use estimate::{
    concentration_profile, estimate_consensus_variance, estimate_tau, run_replicas, ConcentrationPoint,
    ConsensusVariance, ReplicaRecord, TauEstimate,
};
pub use init::{InitialOpinionSpec, InitialOpinions};
pub use log::EventLog;
pub use simulate::{replay, simulate, simulate_trace, ConsensusResult, Simulation, TracePoint};
pub use state::{apply_ring, OpinionState};
