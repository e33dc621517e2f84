use nalgebra::DMatrix;
use rand::Rng;

use super::types::{ChainConfig, ChainState, Draw, MixtureParams, PosteriorDraws, SamplerMode};
use super::updates::{
    adapt_proposal, component_stats, update_lambda, update_pi, update_theta_conjugate,
    update_theta_mh, update_z, Phase,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::repulsion::{mahalanobis_sq, CoordinateBundle};
use crate::stats::{sample_mvn, RngStream, SpdMatrix};

/// Initial locations must be at least this far apart (Sigma-metric).
pub const INIT_MIN_SEPARATION: f64 = 1e-6;
const INIT_MAX_ATTEMPTS: usize = 1000;

/// Starting point: uniform labels and weights, baseline-normal locations
/// (redrawn until well separated in repulsive mode) and scales at the prior
/// mean.
pub fn initialize_state<R: Rng + ?Sized>(data: &Dataset, config: &ChainConfig, rng: &mut R) -> Result<ChainState> {
    let prior = &config.prior;
    let (k, d) = (prior.k, prior.d);
    let z: Vec<usize> = (0..data.n()).map(|_| rng.random_range(0..k)).collect();
    let pi = vec![1.0 / k as f64; k];

    let mut theta = None;
    for _ in 0..INIT_MAX_ATTEMPTS {
        let mut rows = Vec::with_capacity(k * d);
        for _ in 0..k {
            rows.extend(sample_mvn(rng, &prior.mu, &prior.sigma)?);
        }
        let bundle = CoordinateBundle::new(k, d, rows)?;
        if config.mode == SamplerMode::IidBaseline || well_separated(&bundle, &prior.sigma) {
            theta = Some(bundle);
            break;
        }
    }
    let theta = theta.ok_or_else(|| {
        Error::Initialization(format!(
            "no separated location draw in {INIT_MAX_ATTEMPTS} attempts"
        ))
    })?;

    let excess = prior.nu - d as f64 - 1.0;
    let lambda0 = if excess > 0.0 {
        SpdMatrix::symmetrized(prior.psi_scale.matrix() / excess, "initial scale")?
    } else {
        prior.psi_scale.clone()
    };

    Ok(ChainState {
        z,
        params: MixtureParams::new(pi, theta, vec![lambda0; k])?,
        iteration: 0,
        proposal_cov: vec![DMatrix::zeros(d, d); k],
    })
}

fn well_separated(theta: &CoordinateBundle, sigma: &SpdMatrix) -> bool {
    let min_sq = INIT_MIN_SEPARATION * INIT_MIN_SEPARATION;
    (0..theta.k()).all(|r| {
        ((r + 1)..theta.k()).all(|s| mahalanobis_sq(theta.row(r), theta.row(s), sigma) >= min_sq)
    })
}

/// One full sweep: labels, weights, locations, scales.
fn sweep(
    state: &mut ChainState,
    data: &Dataset,
    config: &ChainConfig,
    phase: Phase<'_>,
    rng: &mut RngStream,
) -> Result<Option<Vec<bool>>> {
    let prior = &config.prior;
    let k = prior.k;
    let t = state.iteration;
    state.z = update_z(&state.params, data, rng).map_err(|e| e.at(t, 0))?;
    let stats = component_stats(&state.z, data, k);
    state.params.pi = update_pi(&stats.counts, &prior.alpha, rng).map_err(|e| e.at(t, 0))?;
    let accepted = match config.mode {
        SamplerMode::Repulsive => {
            let sweep = update_theta_mh(state, &stats, prior, phase, rng)?;
            if let Phase::BurnIn = phase {
                adapt_proposal(&mut state.proposal_cov, &sweep.omegas, config.burn_in);
            }
            Some(sweep.accepted)
        }
        SamplerMode::IidBaseline => {
            update_theta_conjugate(state, &stats, prior, rng)?;
            None
        }
    };
    state.params.lambda = update_lambda(state, data, prior, rng)?;
    state.iteration += 1;
    Ok(accepted)
}

/// Burn-in with adaptation, then `n_saved * thin` sampling sweeps keeping
/// every `thin`-th state.
pub fn run_chain(data: &Dataset, config: &ChainConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    if data.d() != config.prior.d {
        return Err(Error::shape(format!(
            "data are {}-dimensional, prior is {}-dimensional",
            data.d(),
            config.prior.d
        )));
    }
    let k = config.k();
    let mut rng = RngStream::new(config.seed, config.stream_id);
    let mut state = initialize_state(data, config, &mut rng)?;

    for _ in 0..config.burn_in {
        sweep(&mut state, data, config, Phase::BurnIn, &mut rng)?;
    }

    let gammas = match config.mode {
        SamplerMode::Repulsive => state
            .proposal_cov
            .iter()
            .enumerate()
            .map(|(j, g)| {
                SpdMatrix::symmetrized(g.clone(), "adapted proposal covariance")
                    .map_err(|e| e.at(state.iteration, j))
            })
            .collect::<Result<Vec<_>>>()?,
        SamplerMode::IidBaseline => Vec::new(),
    };

    let mut accepted = vec![0usize; k];
    let mut proposed = 0usize;
    let mut draws = Vec::with_capacity(config.n_saved);
    for step in 1..=(config.n_saved * config.thin) {
        if let Some(acc) = sweep(&mut state, data, config, Phase::Sampling(&gammas), &mut rng)? {
            proposed += 1;
            for (count, a) in accepted.iter_mut().zip(acc) {
                *count += a as usize;
            }
        }
        if step % config.thin == 0 {
            draws.push(Draw {
                params: state.params.clone(),
                z: state.z.clone(),
            });
        }
    }

    let acceptance_rates = match config.mode {
        SamplerMode::Repulsive => accepted.iter().map(|&a| a as f64 / proposed as f64).collect(),
        SamplerMode::IidBaseline => vec![1.0; k],
    };
    Ok(PosteriorDraws {
        draws,
        config: config.clone(),
        acceptance_rates,
    })
}
