//! Metropolis-within-Gibbs for the repulsive mixture, and the conjugate
//! Gibbs sampler for the i.i.d.-location baseline.

mod chain;
mod predictive;
mod types;
mod updates;

pub use chain::{initialize_state, run_chain, INIT_MIN_SEPARATION};
pub use predictive::{posterior_predictive, predictive_density_at};
pub use types::{ChainConfig, ChainState, Draw, MixtureParams, PosteriorDraws, SamplerMode};
pub use updates::{
    adapt_proposal, component_stats, location_conditional, membership_probabilities,
    theta_log_acceptance, update_lambda, update_pi, update_theta_conjugate, update_theta_mh,
    update_z, ComponentStats, Phase, ThetaSweep,
};
