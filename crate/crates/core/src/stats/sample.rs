use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};

use super::spd::SpdMatrix;
use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-9;

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// One draw from `N_d(mean, cov)`.
pub fn sample_mvn<R: Rng + ?Sized>(rng: &mut R, mean: &[f64], cov: &SpdMatrix) -> Result<Vec<f64>> {
    let d = cov.dim();
    if mean.len() != d {
        return Err(Error::shape(format!(
            "mean has length {}, covariance is {d}x{d}",
            mean.len()
        )));
    }
    let chol = cov.cholesky_lower();
    let z: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
    let mut out = mean.to_vec();
    for i in 0..d {
        for j in 0..=i {
            out[i] += chol[(i, j)] * z[j];
        }
    }
    Ok(out)
}

/// One draw from `Dir(alpha)` by normalizing independent gamma variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, alpha: &[f64]) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::domain("dirichlet needs at least one concentration"));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::domain(format!(
            "dirichlet concentrations must be positive, got {a}"
        )));
    }
    let mut draws = Vec::with_capacity(alpha.len());
    for &a in alpha {
        let g = Gamma::new(a, 1.0).map_err(|e| Error::domain(e.to_string()))?;
        draws.push(g.sample(rng));
    }
    let total: f64 = draws.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical(format!(
            "dirichlet gamma draws summed to {total} for alpha {alpha:?}"
        )));
    }
    for v in &mut draws {
        *v /= total;
    }
    Ok(draws)
}

/// One draw from `IW_d(scale, dof)`, parameterized so that the mean is
/// `scale / (dof - d - 1)`.
///
/// Draws a Bartlett-factor Wishart on the inverse scale and inverts it
/// through the triangular factors.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    rng: &mut R,
    scale: &SpdMatrix,
    dof: f64,
) -> Result<SpdMatrix> {
    let d = scale.dim();
    if !(dof > (d as f64) - 1.0) || !dof.is_finite() {
        return Err(Error::domain(format!(
            "inverse-Wishart dof must exceed d - 1 = {}, got {dof}",
            d - 1
        )));
    }
    // Bartlett factor A: chi on the diagonal, standard normals below it.
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let chi2 = ChiSquared::new(dof - i as f64).map_err(|e| Error::domain(e.to_string()))?;
        a[(i, i)] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = standard_normal(rng);
        }
    }
    if a.diagonal().iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Numerical("degenerate Bartlett factor".into()));
    }
    // With scale = C C^T the draw is C (A A^T)^{-1} C^T.
    let a_inv = a
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::Numerical("singular Bartlett factor".into()))?;
    let g = scale.cholesky_lower() * a_inv.transpose();
    SpdMatrix::symmetrized(&g * g.transpose(), "inverse-Wishart draw")
}

/// One label in `0..probs.len()` drawn with the given probabilities.
pub fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::domain("categorical needs at least one probability"));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::domain(format!("categorical probability {p} is invalid")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::domain(format!(
            "categorical probabilities sum to {total}, not 1"
        )));
    }
    Ok(categorical_unchecked(rng, probs, total))
}

/// Inverse-CDF draw from nonnegative weights summing to `total`.
pub(crate) fn categorical_unchecked<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = j;
            acc += w;
            if u < acc {
                return j;
            }
        }
    }
    last_positive
}

pub(crate) fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
