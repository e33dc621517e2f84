use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sampler::PosteriorDraws;

/// Occupied-component counts over saved draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancySummary {
    pub mean: f64,
    /// Within-chain standard deviation (population form).
    pub sd: f64,
    /// Number of draws with each occupied count.
    pub histogram: BTreeMap<usize, usize>,
    pub per_draw: Vec<usize>,
}

pub fn occupied_components(draws: &PosteriorDraws) -> OccupancySummary {
    let per_draw: Vec<usize> = draws.draws.iter().map(|d| d.occupied()).collect();
    let mut histogram = BTreeMap::new();
    for &c in &per_draw {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let s = per_draw.len().max(1) as f64;
    let mean = per_draw.iter().sum::<usize>() as f64 / s;
    let var = per_draw.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / s;
    OccupancySummary {
        mean,
        sd: var.sqrt(),
        histogram,
        per_draw,
    }
}
