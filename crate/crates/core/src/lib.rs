//! Exchangeable qubit priors, their de Finetti two-copy states, quantum discord
//! measures, and particle-based Bayesian state tomography.
//!
//! The modules build on each other bottom-up:
//!
//! * [`linalg`] – small dense complex matrices and a Jacobi eigensolver
//! * [`state`] – Bloch vectors, density matrices, POVMs, partial traces, entropy
//! * [`priors`] – weighted particle ensembles over the Bloch ball
//! * [`definetti`] – moments, one/two/N-copy exchangeable states, rank test
//! * [`discord`] – geometric (closed and variational) and entropic discord
//! * [`bayes`] – simulated measurements, Bayes updates, discord trajectories

pub mod bayes;
pub mod definetti;
pub mod discord;
pub mod error;
pub mod linalg;
pub mod priors;
pub mod rng;
pub mod sphere;
pub mod state;

pub use error::{Error, Result};
