use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::sampler::PosteriorDraws;
use crate::stats::Gaussian;

/// Conditional predictive ordinates and their log-sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpmlSummary {
    pub log_cpo: Vec<f64>,
    pub lpml: f64,
    /// Observations whose likelihood vanished in some draw (`log CPO = -inf`).
    pub degenerate: Vec<usize>,
}

impl LpmlSummary {
    pub fn cpo(&self) -> Vec<f64> {
        self.log_cpo.iter().map(|v| v.exp()).collect()
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `log f(y | draw)` for every draw (rows) and observation (columns).
pub fn mixture_log_likelihoods(draws: &PosteriorDraws, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    if data.d() != draws.d() {
        return Err(Error::shape(format!(
            "data are {}-dimensional, draws are {}-dimensional",
            data.d(),
            draws.d()
        )));
    }
    Ok(draws
        .draws
        .par_iter()
        .map(|draw| {
            let comps: Vec<(f64, Gaussian)> = (0..draw.params.k())
                .map(|j| {
                    (
                        draw.params.pi[j].ln(),
                        Gaussian::new(draw.params.theta.row(j).to_vec(), draw.params.lambda[j].clone()),
                    )
                })
                .collect();
            data.rows()
                .map(|y| log_sum_exp(comps.iter().map(|(lp, g)| lp + g.log_pdf(y))))
                .collect()
        })
        .collect())
}

/// Harmonic-mean CPO estimate per observation,
/// `CPO_i = [S^{-1} sum_t 1 / f(y_i | draw_t)]^{-1}`, and `LPML = sum_i log CPO_i`.
pub fn cpo_lpml(draws: &PosteriorDraws, data: &Dataset) -> Result<LpmlSummary> {
    if draws.is_empty() {
        return Err(Error::domain("no posterior draws"));
    }
    let ll = mixture_log_likelihoods(draws, data)?;
    let log_s = (draws.len() as f64).ln();
    let log_cpo: Vec<f64> = (0..data.n())
        .map(|i| log_s - log_sum_exp(ll.iter().map(|row| -row[i])))
        .collect();
    let degenerate = log_cpo
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == f64::NEG_INFINITY)
        .map(|(i, _)| i)
        .collect();
    Ok(LpmlSummary {
        lpml: log_cpo.iter().sum(),
        log_cpo,
        degenerate,
    })
}

/// `sum_i log[S^{-1} sum_t f(y_i | draw_t)]`, the arithmetic-mean counterpart
/// of LPML; never smaller than it.
pub fn log_mean_predictive(draws: &PosteriorDraws, data: &Dataset) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::domain("no posterior draws"));
    }
    let ll = mixture_log_likelihoods(draws, data)?;
    let log_s = (draws.len() as f64).ln();
    Ok((0..data.n())
        .map(|i| log_sum_exp(ll.iter().map(|row| row[i])) - log_s)
        .sum())
}
