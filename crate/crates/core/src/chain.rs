use crate::error::{Error, Result};
use crate::graph::{build, strongly_connected, GraphSpec, TransitionMatrix};
use crate::spectral::{self, OpinionSummary, SpectralReport, StationaryDistribution};

/// A strongly connected transition matrix together with its stationary law.
#[derive(Debug, Clone)]
pub struct Chain {
    p: TransitionMatrix,
    stationary: StationaryDistribution,
}

impl Chain {
    pub fn new(p: TransitionMatrix) -> Result<Self> {
        if !strongly_connected(&p) {
            return Err(Error::NotStronglyConnected);
        }
        let stationary = spectral::stationary(&p)?;
        Ok(Self { p, stationary })
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        Self::new(build(spec)?)
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn pi(&self) -> &[f64] {
        &self.stationary.pi
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.stationary
    }

    pub fn spectral(&self) -> Result<SpectralReport> {
        spectral::spectral_gaps(&self.p, &self.stationary)
    }

    pub fn summarize(&self, f: &[f64]) -> OpinionSummary {
        spectral::summarize(&self.p, self.pi(), f)
    }
}
