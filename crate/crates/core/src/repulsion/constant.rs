use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{all_pairs, check_enumerable};
use super::kernel::{repulsive_component, CoordinateBundle, NRepParams};
use crate::error::{Error, Result};
use crate::stats::{sample_mvn, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantMethod {
    ExactEnumeration,
    MonteCarlo,
}

/// Normalizing constant `c_{k,d}` of an NRep prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub method: ConstantMethod,
    pub mc_std_error: f64,
}

const MIN_MC_DRAWS: usize = 1000;
const MASKS_PER_CHUNK: u32 = 1 << 12;

/// Inclusion-exclusion over interaction graphs:
/// `c = 1 + sum_{A != {}} (-1)^{|A|} det(I_k + L_A / tau)^{-d/2}`.
///
/// The `kd x kd` determinant `det(I_kd + L_A (x) tau^{-1} I_d)` factors as
/// `det(I_k + L_A / tau)^d`, so only `k x k` Cholesky factorizations are
/// needed. Chunks of subsets are summed in parallel and reduced in a fixed
/// order.
pub fn nrep_constant_exact(params: &NRepParams) -> Result<ConstantEstimate> {
    let k = params.k();
    let pairs = check_enumerable(k)?;
    let edges = all_pairs(k);
    let inv_tau = 1.0 / params.tau();
    let half_d = 0.5 * params.d() as f64;

    let total_masks: u32 = 1 << pairs;
    let n_chunks = total_masks.div_ceil(MASKS_PER_CHUNK);
    let partials: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = (chunk * MASKS_PER_CHUNK).max(1);
            let end = ((chunk + 1) * MASKS_PER_CHUNK).min(total_masks);
            let mut acc = NeumaierSum::default();
            for mask in start..end {
                let log_det = log_det_shifted_laplacian(k, &edges, mask, inv_tau);
                let term = (-half_d * log_det).exp();
                if mask.count_ones() % 2 == 1 {
                    acc.add(-term);
                } else {
                    acc.add(term);
                }
            }
            (acc.sum, acc.comp)
        })
        .collect();

    let mut total = NeumaierSum::default();
    total.add(1.0);
    for (s, c) in partials {
        total.add(s);
        total.add(c);
    }
    let value = total.value();
    if !(value > 0.0 && value <= 1.0 + 1e-12) {
        return Err(Error::Numerical(format!(
            "inclusion-exclusion produced c = {value:e} for k = {k}, tau = {}; cancellation exceeded precision",
            params.tau()
        )));
    }
    Ok(ConstantEstimate {
        value: value.min(1.0),
        method: ConstantMethod::ExactEnumeration,
        mc_std_error: 0.0,
    })
}

/// Log-determinant of `I_k + L_A / tau`, where `A` is the subset of `edges`
/// selected by the bits of `mask`.
fn log_det_shifted_laplacian(k: usize, edges: &[(usize, usize)], mask: u32, inv_tau: f64) -> f64 {
    const MAXK: usize = 8;
    debug_assert!(k <= MAXK);
    let mut m = [[0.0f64; MAXK]; MAXK];
    for (i, row) in m.iter_mut().enumerate().take(k) {
        row[i] = 1.0;
    }
    for (bit, &(r, s)) in edges.iter().enumerate() {
        if mask & (1 << bit) != 0 {
            m[r][r] += inv_tau;
            m[s][s] += inv_tau;
            m[r][s] -= inv_tau;
            m[s][r] -= inv_tau;
        }
    }
    // In-place Cholesky; the matrix is SPD (identity plus a PSD Laplacian).
    let mut log_det = 0.0;
    for j in 0..k {
        let mut diag = m[j][j];
        for p in 0..j {
            diag -= m[j][p] * m[j][p];
        }
        let l_jj = diag.sqrt();
        log_det += 2.0 * l_jj.ln();
        m[j][j] = l_jj;
        for i in (j + 1)..k {
            let mut v = m[i][j];
            for p in 0..j {
                v -= m[i][p] * m[j][p];
            }
            m[i][j] = v / l_jj;
        }
    }
    log_det
}

/// Plain Monte-Carlo estimate: the mean of the repulsive component over
/// `n_draws` independent baseline bundles.
pub fn nrep_constant_mc(params: &NRepParams, rng: &mut RngStream, n_draws: usize) -> Result<ConstantEstimate> {
    if n_draws < MIN_MC_DRAWS {
        return Err(Error::domain(format!(
            "Monte-Carlo constant needs at least {MIN_MC_DRAWS} draws, got {n_draws}"
        )));
    }
    let (k, d) = (params.k(), params.d());
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut rows = Vec::with_capacity(k * d);
    for i in 0..n_draws {
        rows.clear();
        for _ in 0..k {
            rows.extend(sample_mvn(rng, params.mu(), params.sigma())?);
        }
        let bundle = CoordinateBundle::new(k, d, rows.clone())?;
        let x = repulsive_component(&bundle, params.sigma(), params.tau())?;
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (n_draws - 1) as f64;
    Ok(ConstantEstimate {
        value: mean,
        method: ConstantMethod::MonteCarlo,
        mc_std_error: (var / n_draws as f64).sqrt(),
    })
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
