//! Replication study: models x sample sizes x replicates on simulated data.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::experiment::{evaluate, fit, load_data};
use crate::error::{Error, Result};

/// Models to compare, each a full configuration with a `builtin` source.
#[derive(Debug, Clone)]
pub struct StudyPlan {
    /// `(label, config)`; every model sees the same simulated data sets.
    pub models: Vec<(String, RunConfig)>,
    pub sample_sizes: Vec<usize>,
    pub n_replicates: usize,
    /// Maximum number of chains run at once.
    pub parallelism: usize,
    pub seed: u64,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub model: String,
    pub n: usize,
    pub replicate: usize,
    pub failure: Option<String>,
    pub occupied_mean: f64,
    pub occupied_sd: f64,
    pub lpml: f64,
    pub mse: f64,
    pub l1: f64,
    pub acceptance_mean: f64,
}

impl StudyRow {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Median and quartiles (type-7 interpolation) of one metric in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: String,
    pub n: usize,
    pub metric: String,
    pub count: usize,
    pub failed: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
    /// Across-replicate sample standard deviation.
    pub sd: f64,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    /// Sorted by (sample size, replicate, model order).
    pub rows: Vec<StudyRow>,
    pub summaries: Vec<CellSummary>,
}

impl StudyReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }
}

pub const SUMMARY_METRICS: [&str; 5] = ["occupied_mean", "occupied_sd", "lpml", "mse", "l1"];

/// Sample quantile with linear interpolation between order statistics
/// (`h = (N - 1) p`). Sorts a copy.
pub fn quantile_type7(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn run_cell(plan: &StudyPlan, model: usize, size_idx: usize, replicate: usize) -> StudyRow {
    let (label, base) = &plan.models[model];
    let n = plan.sample_sizes[size_idx];
    let idx = (size_idx * plan.n_replicates + replicate) as u64;
    let mut config = base.clone();
    config.n = n;
    config.seed = plan.seed;
    config.data_stream_id = 2 * idx;
    config.stream_id = 2 * idx + 1;

    let outcome = (|| {
        let loaded = load_data(&config)?;
        let fit = fit(&config, &loaded.data)?;
        evaluate(
            &fit.draws,
            &fit.fitted,
            fit.standardization.as_ref(),
            loaded.truth.as_ref(),
            plan.grid_points,
            false,
        )
    })();
    let mut row = StudyRow {
        model: label.clone(),
        n,
        replicate,
        failure: None,
        occupied_mean: f64::NAN,
        occupied_sd: f64::NAN,
        lpml: f64::NAN,
        mse: f64::NAN,
        l1: f64::NAN,
        acceptance_mean: f64::NAN,
    };
    match outcome {
        Ok(eval) => {
            let m = eval.metrics;
            row.occupied_mean = m.occupied.mean;
            row.occupied_sd = m.occupied.sd;
            row.lpml = m.lpml;
            if let Some(t) = m.truth {
                row.mse = t.mse;
                row.l1 = t.l1;
            }
            row.acceptance_mean = m.acceptance_rates.iter().sum::<f64>() / m.acceptance_rates.len() as f64;
        }
        Err(e) => row.failure = Some(e.to_string()),
    }
    row
}

/// Runs every (model, n, replicate) cell. Replicate `r` at size index `s`
/// draws its data from stream `2 i` and runs its chain on stream `2 i + 1`,
/// `i = s * n_replicates + r`, so models are compared on identical data.
/// Failed cells are kept as rows with a reason and left out of summaries.
pub fn run_replication_study(plan: &StudyPlan) -> Result<StudyReport> {
    if plan.n_replicates == 0 {
        return Err(Error::Config("n_replicates must be >= 1".into()));
    }
    if plan.models.is_empty() || plan.sample_sizes.is_empty() {
        return Err(Error::Config("study needs at least one model and one sample size".into()));
    }
    if let Some((label, _)) = plan.models.iter().find(|(_, c)| c.builtin.is_none()) {
        return Err(Error::Config(format!("model `{label}` has no builtin data source")));
    }
    let tasks: Vec<(usize, usize, usize)> = (0..plan.sample_sizes.len())
        .flat_map(|s| (0..plan.n_replicates).flat_map(move |r| (0..plan.models.len()).map(move |m| (s, r, m))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<StudyRow> = pool.install(|| tasks.par_iter().map(|&(s, r, m)| run_cell(plan, m, s, r)).collect());
    let summaries = summarize(plan, &rows);
    Ok(StudyReport { rows, summaries })
}

fn summarize(plan: &StudyPlan, rows: &[StudyRow]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for (label, _) in &plan.models {
        for &n in &plan.sample_sizes {
            let cell: Vec<&StudyRow> = rows.iter().filter(|r| &r.model == label && r.n == n).collect();
            let ok: Vec<&&StudyRow> = cell.iter().filter(|r| r.ok()).collect();
            for metric in SUMMARY_METRICS {
                let values: Vec<f64> = ok
                    .iter()
                    .map(|r| match metric {
                        "occupied_mean" => r.occupied_mean,
                        "occupied_sd" => r.occupied_sd,
                        "lpml" => r.lpml,
                        "mse" => r.mse,
                        _ => r.l1,
                    })
                    .filter(|v| !v.is_nan())
                    .collect();
                out.push(CellSummary {
                    model: label.clone(),
                    n,
                    metric: metric.into(),
                    count: values.len(),
                    failed: cell.len() - ok.len(),
                    q1: quantile_type7(&values, 0.25),
                    median: quantile_type7(&values, 0.5),
                    q3: quantile_type7(&values, 0.75),
                    mean: mean(&values),
                    sd: sample_sd(&values),
                });
            }
        }
    }
    out
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn csv_field(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}

pub fn rows_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("model,n,replicate,status,occupied_mean,occupied_sd,lpml,mse,l1,acceptance_mean,failure\n");
    for r in rows {
        let failure = r.failure.as_deref().unwrap_or("").replace(['"', '\n'], " ");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},\"{}\"",
            r.model,
            r.n,
            r.replicate,
            if r.ok() { "ok" } else { "failed" },
            csv_field(r.occupied_mean),
            csv_field(r.occupied_sd),
            csv_field(r.lpml),
            csv_field(r.mse),
            csv_field(r.l1),
            csv_field(r.acceptance_mean),
            failure
        )
        .expect("writing to a String");
    }
    out
}

pub fn summary_csv(summaries: &[CellSummary]) -> String {
    let mut out = String::from("model,n,metric,count,failed,q1,median,q3,mean,sd\n");
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.model,
            s.n,
            s.metric,
            s.count,
            s.failed,
            csv_field(s.q1),
            csv_field(s.median),
            csv_field(s.q3),
            csv_field(s.mean),
            csv_field(s.sd)
        )
        .expect("writing to a String");
    }
    out
}

/// Occupied-component means per replicate, keyed by replicate, for one model and size.
pub fn occupied_by_replicate(rows: &[StudyRow], model: &str, n: usize) -> BTreeMap<usize, f64> {
    rows.iter()
        .filter(|r| r.model == model && r.n == n && r.ok())
        .map(|r| (r.replicate, r.occupied_mean))
        .collect()
}
