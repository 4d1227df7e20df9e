//! Phase-transition thresholds of noisy compressed sensing for
//! discrete-continuous mixture priors.

pub mod algo_thresholds;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod gaussian_closedform;
pub mod random_matrix_lab;
pub mod replica;
pub mod scalar_channel;
pub mod special;
pub mod state_evolution;

pub use error::{Error, Result};
