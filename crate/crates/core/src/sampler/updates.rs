//! The four blocks of one Gibbs sweep.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::types::{ChainState, MixtureParams};
use crate::calibration::PriorSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::repulsion::{log_pair_factor, mahalanobis_sq, CoordinateBundle};
use crate::stats::{
    categorical_unchecked, sample_dirichlet, sample_inverse_wishart, sample_mvn, to_dvector,
    Gaussian, SpdMatrix,
};

/// Occupation counts and per-component sums of the observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub counts: Vec<usize>,
    pub sums: Vec<Vec<f64>>,
}

pub fn component_stats(z: &[usize], data: &Dataset, k: usize) -> ComponentStats {
    let mut counts = vec![0; k];
    let mut sums = vec![vec![0.0; data.d()]; k];
    for (row, &j) in data.rows().zip(z) {
        counts[j] += 1;
        for (acc, v) in sums[j].iter_mut().zip(row) {
            *acc += v;
        }
    }
    ComponentStats { counts, sums }
}

fn component_densities(params: &MixtureParams) -> Vec<Gaussian> {
    (0..params.k())
        .map(|j| Gaussian::new(params.theta.row(j).to_vec(), params.lambda[j].clone()))
        .collect()
}

fn normalize_log_weights(log_w: &mut [f64]) -> Option<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return None;
    }
    let mut total = 0.0;
    for w in log_w.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    Some(total)
}

/// Posterior membership probabilities of one observation,
/// `pi_j N(y; theta_j, Lambda_j)` normalized over `j`.
pub fn membership_probabilities(params: &MixtureParams, y: &[f64]) -> Result<Vec<f64>> {
    let dens = component_densities(params);
    let mut w: Vec<f64> = dens
        .iter()
        .zip(&params.pi)
        .map(|(g, p)| p.ln() + g.log_pdf(y))
        .collect();
    let total = normalize_log_weights(&mut w)
        .ok_or_else(|| Error::Numerical(format!("every component has zero weight at {y:?}")))?;
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Draws every label from its full conditional, in log space.
pub fn update_z<R: Rng + ?Sized>(params: &MixtureParams, data: &Dataset, rng: &mut R) -> Result<Vec<usize>> {
    let dens = component_densities(params);
    let log_pi: Vec<f64> = params.pi.iter().map(|p| p.ln()).collect();
    let mut w = vec![0.0; params.k()];
    let mut z = Vec::with_capacity(data.n());
    for (i, y) in data.rows().enumerate() {
        for (j, g) in dens.iter().enumerate() {
            w[j] = log_pi[j] + g.log_pdf(y);
        }
        let total = normalize_log_weights(&mut w).ok_or_else(|| {
            Error::Numerical(format!(
                "observation {i} at {y:?} has zero likelihood under every component (weights {:?})",
                params.pi
            ))
        })?;
        z.push(categorical_unchecked(rng, &w, total));
    }
    Ok(z)
}

/// `Dir(alpha_1 + n_1, ..., alpha_k + n_k)`.
pub fn update_pi<R: Rng + ?Sized>(counts: &[usize], alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if counts.len() != alpha.len() {
        return Err(Error::shape("counts and alpha differ in length"));
    }
    let post: Vec<f64> = alpha.iter().zip(counts).map(|(a, &n)| a + n as f64).collect();
    sample_dirichlet(rng, &post)
}

/// Gaussian full conditional of one location with repulsion ignored:
/// covariance `(Sigma^{-1} + n_j Lambda_j^{-1})^{-1}` and mean
/// `cov (Sigma^{-1} mu + Lambda_j^{-1} s_j)`.
pub fn location_conditional(
    prior_mu: &[f64],
    sigma_inv: &SpdMatrix,
    lambda_j: &SpdMatrix,
    n_j: usize,
    sum_j: &[f64],
) -> Result<Gaussian> {
    let lambda_inv = lambda_j.inverse();
    let precision = sigma_inv.matrix() + lambda_inv.matrix() * n_j as f64;
    let precision = SpdMatrix::symmetrized(precision, "conditional precision")?;
    let cov = precision.inverse();
    let rhs: DVector<f64> = sigma_inv.matrix() * to_dvector(prior_mu) + lambda_inv.matrix() * to_dvector(sum_j);
    let mean = cov.matrix() * rhs;
    Ok(Gaussian::new(mean.as_slice().to_vec(), cov))
}

/// Log Metropolis-Hastings ratio for moving location `j` to `candidate`:
/// the Gaussian conditional ratio times the repulsion ratios against every
/// other current location.
pub fn theta_log_acceptance(
    j: usize,
    candidate: &[f64],
    theta: &CoordinateBundle,
    conditional: &Gaussian,
    sigma: &SpdMatrix,
    tau: f64,
) -> f64 {
    let current = theta.row(j);
    let mut num = 0.0;
    let mut den = 0.0;
    for l in 0..theta.k() {
        if l == j {
            continue;
        }
        let other = theta.row(l);
        num += log_pair_factor(mahalanobis_sq(candidate, other, sigma), tau);
        den += log_pair_factor(mahalanobis_sq(current, other, sigma), tau);
    }
    if num == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if den == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    conditional.log_pdf(candidate) - conditional.log_pdf(current) + num - den
}

/// Proposal used by the location update.
#[derive(Debug, Clone, Copy)]
pub enum Phase<'a> {
    /// Random walk with the conditional covariance `Omega_j`.
    BurnIn,
    /// Random walk with the adapted covariances `Gamma_j`.
    Sampling(&'a [SpdMatrix]),
}

/// Outcome of one sequential sweep over the locations.
#[derive(Debug, Clone)]
pub struct ThetaSweep {
    pub accepted: Vec<bool>,
    /// `Omega_j` at this sweep, used to adapt the proposal during burn-in.
    pub omegas: Vec<SpdMatrix>,
}

/// Random-walk Metropolis update of each location in turn, `j = 1..k`.
/// Later components see the already-updated earlier ones.
pub fn update_theta_mh<R: Rng + ?Sized>(
    state: &mut ChainState,
    stats: &ComponentStats,
    prior: &PriorSpec,
    phase: Phase<'_>,
    rng: &mut R,
) -> Result<ThetaSweep> {
    let tau = prior
        .tau
        .ok_or_else(|| Error::Config("tau is required for the repulsive update".into()))?;
    let sigma_inv = prior.sigma.inverse();
    let k = state.params.k();
    let mut accepted = Vec::with_capacity(k);
    let mut omegas = Vec::with_capacity(k);
    for j in 0..k {
        let cond = location_conditional(
            &prior.mu,
            &sigma_inv,
            &state.params.lambda[j],
            stats.counts[j],
            &stats.sums[j],
        )
        .map_err(|e| e.at(state.iteration, j))?;
        let proposal_cov = match phase {
            Phase::BurnIn => cond.cov(),
            Phase::Sampling(gammas) => &gammas[j],
        };
        let candidate = sample_mvn(rng, state.params.theta.row(j), proposal_cov)
            .map_err(|e| e.at(state.iteration, j))?;
        let log_beta = theta_log_acceptance(j, &candidate, &state.params.theta, &cond, &prior.sigma, tau);
        let u: f64 = rng.random();
        let accept = log_beta >= 0.0 || u.ln() < log_beta;
        if accept {
            state.params.theta.row_mut(j).copy_from_slice(&candidate);
        }
        accepted.push(accept);
        omegas.push(cond.cov().clone());
    }
    Ok(ThetaSweep { accepted, omegas })
}

/// Exact draw of each location from its Gaussian full conditional
/// (i.i.d. baseline prior).
pub fn update_theta_conjugate<R: Rng + ?Sized>(
    state: &mut ChainState,
    stats: &ComponentStats,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<()> {
    let sigma_inv = prior.sigma.inverse();
    for j in 0..state.params.k() {
        let cond = location_conditional(
            &prior.mu,
            &sigma_inv,
            &state.params.lambda[j],
            stats.counts[j],
            &stats.sums[j],
        )
        .map_err(|e| e.at(state.iteration, j))?;
        let draw = sample_mvn(rng, cond.mean(), cond.cov()).map_err(|e| e.at(state.iteration, j))?;
        state.params.theta.row_mut(j).copy_from_slice(&draw);
    }
    Ok(())
}

/// `Lambda_j ~ IW(Psi + scatter_j, nu + n_j)` with the scatter taken about
/// the current location `theta_j`.
pub fn update_lambda<R: Rng + ?Sized>(
    state: &ChainState,
    data: &Dataset,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<Vec<SpdMatrix>> {
    let (k, d) = (state.params.k(), state.params.d());
    let mut scatter = vec![DMatrix::<f64>::zeros(d, d); k];
    let mut counts = vec![0usize; k];
    for (y, &j) in data.rows().zip(&state.z) {
        counts[j] += 1;
        let centre = state.params.theta.row(j);
        let s = &mut scatter[j];
        for a in 0..d {
            let ra = y[a] - centre[a];
            for b in 0..d {
                s[(a, b)] += ra * (y[b] - centre[b]);
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let scale = SpdMatrix::symmetrized(prior.psi_scale.matrix() + &scatter[j], "posterior IW scale")
            .map_err(|e| e.at(state.iteration, j))?;
        let draw = sample_inverse_wishart(rng, &scale, prior.nu + counts[j] as f64)
            .map_err(|e| e.at(state.iteration, j))?;
        out.push(draw);
    }
    Ok(out)
}

/// `Gamma_j <- Gamma_j + Omega_j / B`.
pub fn adapt_proposal(proposal_cov: &mut [DMatrix<f64>], omegas: &[SpdMatrix], burn_in: usize) {
    let w = 1.0 / burn_in as f64;
    for (gamma, omega) in proposal_cov.iter_mut().zip(omegas) {
        *gamma += omega.matrix() * w;
    }
}
