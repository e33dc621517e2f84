use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::PosteriorDraws;

/// Default limit on `n` for the `n x n` co-clustering matrix.
pub const DEFAULT_MAX_OBSERVATIONS: usize = 10_000;

/// Least-squares partition summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub n: usize,
    /// Row-major `n x n` co-assignment frequencies.
    pub coclustering: Vec<f64>,
    pub selected_index: usize,
    pub selected: Vec<usize>,
    pub criterion: f64,
    /// Number of draws with each count of distinct clusters.
    pub n_clusters_distribution: BTreeMap<usize, usize>,
}

impl PartitionSummary {
    pub fn coclustering_at(&self, i: usize, j: usize) -> f64 {
        self.coclustering[i * self.n + j]
    }
}

/// Picks the saved partition closest, in squared error, to the posterior
/// co-clustering matrix. Ties go to the earliest draw.
pub fn dahl_partition(draws: &PosteriorDraws, max_observations: usize) -> Result<PartitionSummary> {
    if draws.is_empty() {
        return Err(Error::domain("no posterior draws"));
    }
    let n = draws.n();
    if n > max_observations {
        return Err(Error::Capacity(format!(
            "co-clustering for n = {n} exceeds the limit of {max_observations} observations"
        )));
    }
    let s = draws.len();
    let by_obs: Vec<Vec<u32>> = (0..n)
        .map(|i| draws.draws.iter().map(|d| d.z[i] as u32).collect())
        .collect();

    let upper: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| by_obs[i].iter().zip(&by_obs[j]).filter(|(a, b)| a == b).count() as u32)
                .collect()
        })
        .collect();

    let mut coclustering = vec![0.0; n * n];
    for i in 0..n {
        coclustering[i * n + i] = 1.0;
        for (off, &c) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            let p = c as f64 / s as f64;
            coclustering[i * n + j] = p;
            coclustering[j * n + i] = p;
        }
    }

    let scores: Vec<f64> = draws
        .draws
        .par_iter()
        .map(|d| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let delta = if d.z[i] == d.z[j] { 1.0 } else { 0.0 };
                    let e = delta - coclustering[i * n + j];
                    acc += e * e;
                }
            }
            2.0 * acc
        })
        .collect();
    let (selected_index, criterion) = scores
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (t, &v)| if v < best.1 { (t, v) } else { best });

    let mut n_clusters_distribution = BTreeMap::new();
    for d in &draws.draws {
        *n_clusters_distribution.entry(d.occupied()).or_insert(0) += 1;
    }
    Ok(PartitionSummary {
        n,
        coclustering,
        selected_index,
        selected: draws.draws[selected_index].z.clone(),
        criterion,
        n_clusters_distribution,
    })
}
