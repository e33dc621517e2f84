//! Fit and parsimony metrics: LPML, grid MSE and L1 against a known density,
//! occupied components and the least-squares partition.

mod dahl;
mod distance;
mod grid;
mod lpml;
mod occupancy;

pub use dahl::{dahl_partition, PartitionSummary, DEFAULT_MAX_OBSERVATIONS};
pub use distance::{l1_distance, mse_against_truth};
pub use grid::{DensityGrid, Lattice};
pub use lpml::{cpo_lpml, log_mean_predictive, mixture_log_likelihoods, LpmlSummary};
pub use occupancy::{occupied_components, OccupancySummary};
