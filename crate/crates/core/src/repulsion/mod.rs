//! The NRep density family: repulsive component, log-density, interaction
//! graphs and the normalizing constant.

mod constant;
mod graph;
mod kernel;

pub use constant::{nrep_constant_exact, nrep_constant_mc, ConstantEstimate, ConstantMethod};
pub use graph::{
    all_pairs, enumerate_interaction_sets, laplacian_of, pair_count, InteractionSet,
    MAX_ENUMERATED_PAIRS,
};
pub use kernel::{
    c0_gaussian, log_repulsive_component, mahalanobis, nrep_log_density_unnormalized,
    repulsive_component, CoordinateBundle, NRepParams, COINCIDENT_DISTANCE,
};
pub(crate) use kernel::{log_pair_factor, mahalanobis_sq};
