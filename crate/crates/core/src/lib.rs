//! Repulsive Gaussian mixture models.
//!
//! The location vector of a finite Gaussian mixture gets an NRep prior: an
//! i.i.d. Gaussian baseline multiplied by a soft pairwise repulsion term.
//! This crate provides the density family and its normalizing constant, the
//! Metropolis-within-Gibbs sampler, prior calibration, and the metrics used
//! to compare density estimates.

pub mod calibration;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod repulsion;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
