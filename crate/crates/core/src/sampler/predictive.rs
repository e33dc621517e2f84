use rayon::prelude::*;

use super::types::PosteriorDraws;
use crate::error::{Error, Result};
use crate::metrics::{DensityGrid, Lattice};
use crate::stats::Gaussian;

/// Posterior predictive density at arbitrary points: the average over saved
/// draws of `sum_j pi_j N(y; theta_j, Lambda_j)`.
pub fn predictive_density_at(draws: &PosteriorDraws, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if draws.is_empty() {
        return Err(Error::domain("no posterior draws"));
    }
    let d = draws.d();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::shape(format!(
            "grid point of length {} for {d}-dimensional draws",
            p.len()
        )));
    }
    let mixtures: Vec<Vec<(f64, Gaussian)>> = draws
        .draws
        .iter()
        .map(|draw| {
            (0..draw.params.k())
                .filter(|&j| draw.params.pi[j] > 0.0)
                .map(|j| {
                    (
                        draw.params.pi[j],
                        Gaussian::new(draw.params.theta.row(j).to_vec(), draw.params.lambda[j].clone()),
                    )
                })
                .collect()
        })
        .collect();
    let scale = 1.0 / mixtures.len() as f64;
    Ok(points
        .par_iter()
        .map(|y| {
            let total: f64 = mixtures
                .iter()
                .map(|mix| mix.iter().map(|(w, g)| w * g.log_pdf(y).exp()).sum::<f64>())
                .sum();
            total * scale
        })
        .collect())
}

/// Posterior predictive density on a lattice.
pub fn posterior_predictive(draws: &PosteriorDraws, lattice: &Lattice) -> Result<DensityGrid> {
    if lattice.dim() != draws.d() {
        return Err(Error::shape(format!(
            "{}-dimensional lattice for {}-dimensional draws",
            lattice.dim(),
            draws.d()
        )));
    }
    let values = predictive_density_at(draws, &lattice.points())?;
    DensityGrid::new(lattice.clone(), values)
}
