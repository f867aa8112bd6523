//! Deterministic linear-algebra quantities of a chain.

mod adjoint;
mod functionals;
mod gaps;
pub mod lanczos;
mod resistance;
mod stationary;
mod uniformization;

pub use adjoint::{is_reversible, reversal, star_product, symmetrize};
pub use functionals::{
    energy, energy_drift, mean, mean_square_drift, norm_sq, norm_sq_drift, osc, residual_norm_sq, star_energy,
    summarize, variance, MeanSquareDrift, OpinionSummary,
};
pub use gaps::{gamma_hat, lambda2_star_product, lambda2_symmetrized, spectral_gaps, SpectralReport};
pub use resistance::{effective_resistance, r_max, resistance_matrix, ResistanceReport};
pub use stationary::{stationarity_residual, stationary, StationaryDistribution, STATIONARY_TOL};
pub use uniformization::{expected_opinions, heat_kernel_row, PoissonWindow};
