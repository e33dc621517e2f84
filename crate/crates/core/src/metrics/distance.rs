use super::grid::DensityGrid;
use crate::error::{Error, Result};

fn check_lattices(a: &DensityGrid, b: &DensityGrid) -> Result<()> {
    if !a.lattice().same_as(b.lattice()) {
        return Err(Error::shape("density grids are on different lattices"));
    }
    Ok(())
}

/// Mean over lattice points of the squared density difference.
pub fn mse_against_truth(est: &DensityGrid, truth: &DensityGrid) -> Result<f64> {
    check_lattices(est, truth)?;
    let n = est.values().len() as f64;
    Ok(est
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// Trapezoidal `int |est - truth|`.
pub fn l1_distance(est: &DensityGrid, truth: &DensityGrid) -> Result<f64> {
    check_lattices(est, truth)?;
    Ok(est
        .lattice()
        .trapezoid_weights()
        .iter()
        .zip(est.values().iter().zip(truth.values()))
        .map(|(w, (a, b))| w * (a - b).abs())
        .sum())
}
