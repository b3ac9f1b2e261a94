//! Optimal spacing of two marine reserves under the competing pulls of
//! colonisation (favouring proximity) and shared catastrophes (favouring
//! separation).
//!
//! The occupancy of the pair is a three-state Markov chain over the number of
//! occupied reserves. [`model`] builds the per-stage matrices and composes
//! them, [`spectral`] turns a composed matrix into viability measures,
//! [`spacing`] searches over distance, and [`sim`] is a Monte Carlo check on
//! all of it. [`cli`] backs the `reserve-spacing` binary.

pub mod cli;
pub mod error;
pub mod model;
pub mod sim;
pub mod spacing;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{
    colonisation_matrix, compose, extinction_matrix, local_extinction_matrix, recruitment_matrix, step_distribution,
    Distance, ModelParams, ModelVariant, OccupancyDistribution, Stage, TransitionMatrix,
};
pub use sim::{
    estimate_stationary, estimate_survival, simulate_step, SimConfig, SimulationEstimate, StationaryEstimate,
};
pub use spacing::{objective, optimize_spacing, sweep, ObjectiveKind, ObjectiveSpec, SpacingOptimum};
pub use spectral::{
    second_eigenvalue, stationary_distribution, survival_probability, SpectralSummary, StationarySummary,
};
