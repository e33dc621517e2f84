//! Seedable random streams, SPD matrices and the distributions the samplers
//! draw from.

mod gamma;
mod gaussian;
mod rng;
mod sample;
mod spd;

pub use gamma::{gamma_cdf, gamma_quantile};
pub use gaussian::{mvn_log_pdf, Gaussian};
pub use rng::RngStream;
pub use sample::{
    sample_categorical, sample_dirichlet, sample_inverse_wishart, sample_mvn, standard_normal,
};
pub(crate) use sample::{categorical_unchecked, to_dvector};
pub use spd::SpdMatrix;
