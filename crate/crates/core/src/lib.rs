pub mod bounds;
pub mod chain;
pub mod coupled;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fragmentation;
pub mod graph;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use chain::Chain;
pub use error::{Error, Result};
pub use graph::{GraphSpec, TransitionMatrix};
