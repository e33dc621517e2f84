//! One fit end to end: data, prior, chain, predictive grid, metrics, files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{RunConfig, TauResolution};
use super::draws_io::{draws_to_string, DRAWS_MAGIC};
use super::io::{dataset_to_csv, grid_to_csv, read_delimited, write_file, ReadOptions, SkippedRow};
use super::mixture::{generate_data, MixtureSpec};
use crate::data::{Dataset, Standardization};
use crate::error::{Error, Result};
use crate::metrics::{
    cpo_lpml, dahl_partition, l1_distance, mse_against_truth, occupied_components, DensityGrid, Lattice,
    OccupancySummary, PartitionSummary, DEFAULT_MAX_OBSERVATIONS,
};
use crate::sampler::{posterior_predictive, run_chain, PosteriorDraws};
use crate::stats::RngStream;

pub const METRICS_FORMAT: &str = "rgmm-metrics v1";
pub const MANIFEST_FORMAT: &str = "rgmm-manifest v1";
pub const GRID_FORMAT: &str = "rgmm-grid v1";

/// Grid padding beyond the data range, in (fitted-scale) standard deviations.
pub const GRID_PADDING_SD: f64 = 3.0;

/// Co-clustering matrices are written out only up to this many observations.
pub const PARTITION_MATRIX_MAX_N: usize = 1000;

/// Git-style content hash: SHA-256 of `"blob <len>\0" ++ bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Observations plus where they came from.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub data: Dataset,
    pub truth: Option<MixtureSpec>,
    pub skipped: Vec<SkippedRow>,
    pub source: InputRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    /// `file:<path>` or `builtin:<id>`.
    pub source: String,
    /// Hash of the file bytes, or of the simulated data CSV.
    pub sha256: String,
    pub n: usize,
    pub d: usize,
    pub skipped_lines: Vec<usize>,
}

pub fn load_data(config: &RunConfig) -> Result<LoadedData> {
    config.validate()?;
    if let Some(path) = &config.input {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let parsed = read_delimited(
            path,
            &ReadOptions {
                columns: config.columns.clone(),
                missing_markers: config.missing.clone(),
            },
        )?;
        let source = InputRecord {
            source: format!("file:{}", path.display()),
            sha256: content_hash(&bytes),
            n: parsed.dataset.n(),
            d: parsed.dataset.d(),
            skipped_lines: parsed.skipped.iter().map(|s| s.line).collect(),
        };
        Ok(LoadedData {
            data: parsed.dataset,
            truth: None,
            skipped: parsed.skipped,
            source,
        })
    } else {
        let id = config.builtin.as_deref().expect("validated");
        let spec = MixtureSpec::builtin(id)?;
        let data = generate_data(&spec, config.n, &mut RngStream::new(config.seed, config.data_stream_id))?;
        let source = InputRecord {
            source: format!("builtin:{id}"),
            sha256: content_hash(dataset_to_csv(&data).as_bytes()),
            n: data.n(),
            d: data.d(),
            skipped_lines: Vec::new(),
        };
        Ok(LoadedData {
            data,
            truth: Some(spec),
            skipped: Vec::new(),
            source,
        })
    }
}

/// A completed chain and the data it was fitted to.
#[derive(Debug, Clone)]
pub struct Fit {
    pub draws: PosteriorDraws,
    /// Data on the scale the chain saw.
    pub fitted: Dataset,
    pub standardization: Option<Standardization>,
    pub tau: Option<TauResolution>,
}

/// Standardizes (if configured), resolves the prior and runs the chain.
pub fn fit(config: &RunConfig, data: &Dataset) -> Result<Fit> {
    let resolved = config.resolve(data.d())?;
    let fitted = if config.standardize { data.standardize()? } else { data.clone() };
    let draws = run_chain(&fitted, &config.chain_config(resolved.prior))?;
    Ok(Fit {
        draws,
        standardization: fitted.standardization().cloned(),
        fitted,
        tau: resolved.tau,
    })
}

/// Default evaluation grid on the fitted scale: 512 points for d = 1,
/// 128 per axis for d = 2, none above unless `grid_points` is set.
pub fn default_lattice(fitted: &Dataset, grid_points: Option<usize>) -> Result<Option<Lattice>> {
    let d = fitted.d();
    let points = match (grid_points, d) {
        (Some(g), _) => g,
        (None, 1) => 512,
        (None, 2) => 128,
        (None, _) => return Ok(None),
    };
    let sds = fitted.column_sds();
    let bounds: Vec<(f64, f64)> = (0..d)
        .map(|a| {
            let (lo, hi) = fitted
                .rows()
                .map(|r| r[a])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let pad = GRID_PADDING_SD * if sds[a] > 0.0 { sds[a] } else { 1.0 };
            (lo - pad, hi + pad)
        })
        .collect();
    Lattice::uniform(&bounds, &vec![points; d]).map(Some)
}

/// Distances to the generating density, on both scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    pub mse: f64,
    pub l1: f64,
    pub mse_fitted_scale: f64,
    pub l1_fitted_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyReport {
    pub mean: f64,
    pub sd: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl From<&OccupancySummary> for OccupancyReport {
    fn from(o: &OccupancySummary) -> Self {
        Self {
            mean: o.mean,
            sd: o.sd,
            histogram: o.histogram.clone(),
        }
    }
}

/// Everything written to `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format: String,
    pub mode: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub n_draws: usize,
    pub tau: Option<f64>,
    /// LPML of the data the chain saw (standardized when standardizing).
    pub lpml: f64,
    /// LPML of the data on the original scale.
    pub lpml_original_scale: f64,
    pub degenerate_cpo: usize,
    pub occupied: OccupancyReport,
    pub acceptance_rates: Vec<f64>,
    /// Integral of the original-scale predictive over the grid.
    pub grid_mass: Option<f64>,
    pub truth: Option<TruthComparison>,
    pub partition_clusters: Option<usize>,
    pub partition_note: Option<String>,
}

/// Metrics plus the grids and partition they came from.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    /// Predictive density on the original scale.
    pub density: Option<DensityGrid>,
    pub truth_density: Option<DensityGrid>,
    pub partition: Option<PartitionSummary>,
}

/// Computes every metric from saved draws.
pub fn evaluate(
    draws: &PosteriorDraws,
    fitted: &Dataset,
    standardization: Option<&Standardization>,
    truth: Option<&MixtureSpec>,
    grid_points: Option<usize>,
    with_partition: bool,
) -> Result<Evaluation> {
    let lpml = cpo_lpml(draws, fitted)?;
    let log_jac = standardization.map_or(0.0, |s| s.density_jacobian().ln());
    let occupancy = occupied_components(draws);

    let lattice = default_lattice(fitted, grid_points)?;
    let (density, truth_density, truth_cmp) = match lattice {
        None => (None, None, None),
        Some(lattice) => {
            let fitted_grid = posterior_predictive(draws, &lattice)?;
            let original = match standardization {
                Some(s) => fitted_grid.to_original_scale(s)?,
                None => fitted_grid.clone(),
            };
            match truth {
                None => (Some(original), None, None),
                Some(spec) => {
                    let truth_orig = DensityGrid::from_fn(original.lattice().clone(), |x| spec.density(x))?;
                    let inv_jac = standardization.map_or(1.0, |s| 1.0 / s.density_jacobian());
                    let truth_fitted = DensityGrid::new(
                        lattice.clone(),
                        truth_orig.values().iter().map(|v| v * inv_jac).collect(),
                    )?;
                    let cmp = TruthComparison {
                        mse: mse_against_truth(&original, &truth_orig)?,
                        l1: l1_distance(&original, &truth_orig)?,
                        mse_fitted_scale: mse_against_truth(&fitted_grid, &truth_fitted)?,
                        l1_fitted_scale: l1_distance(&fitted_grid, &truth_fitted)?,
                    };
                    (Some(original), Some(truth_orig), Some(cmp))
                }
            }
        }
    };

    let (partition, partition_note) = if !with_partition {
        (None, None)
    } else {
        match dahl_partition(draws, DEFAULT_MAX_OBSERVATIONS) {
            Ok(p) => (Some(p), None),
            Err(Error::Capacity(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        }
    };

    let metrics = MetricsReport {
        format: METRICS_FORMAT.into(),
        mode: draws.config.mode.to_string(),
        n: fitted.n(),
        d: fitted.d(),
        k: draws.k(),
        n_draws: draws.len(),
        tau: draws.config.prior.tau,
        lpml: lpml.lpml,
        lpml_original_scale: lpml.lpml + fitted.n() as f64 * log_jac,
        degenerate_cpo: lpml.degenerate.len(),
        occupied: (&occupancy).into(),
        acceptance_rates: draws.acceptance_rates.clone(),
        grid_mass: density.as_ref().map(DensityGrid::integral),
        truth: truth_cmp,
        partition_clusters: partition
            .as_ref()
            .map(|p| p.selected.iter().collect::<std::collections::BTreeSet<_>>().len()),
        partition_note,
    };
    Ok(Evaluation {
        metrics,
        density,
        truth_density,
        partition,
    })
}

#[derive(Debug, Clone, Serialize)]
struct PartitionFile<'a> {
    format: &'static str,
    n: usize,
    selected_index: usize,
    selected: &'a [usize],
    criterion: f64,
    n_clusters_distribution: &'a BTreeMap<usize, usize>,
    /// Row-major, present only for small `n`.
    coclustering: Option<&'a [f64]>,
}

/// Provenance written to `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub crate_version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub stream_id: u64,
    pub data_stream_id: u64,
    pub tau: Option<TauResolution>,
    pub input: InputRecord,
    pub draws_format: String,
    /// Output file name to content hash.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub metrics: MetricsReport,
    pub manifest: Manifest,
    pub skipped: Vec<SkippedRow>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Loads data, fits, evaluates and writes `data.csv`, `draws.txt`,
/// `density.csv`, `metrics.json`, `partition.json` and `manifest.json`.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    let loaded = load_data(config)?;
    let fit = fit(config, &loaded.data)?;
    let eval = evaluate(
        &fit.draws,
        &fit.fitted,
        fit.standardization.as_ref(),
        loaded.truth.as_ref(),
        config.grid_points,
        true,
    )?;

    let dir = config.resolved_output_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files: Vec<(&str, Vec<u8>)> = vec![
        ("data.csv", dataset_to_csv(&loaded.data).into_bytes()),
        (
            "draws.txt",
            draws_to_string(&fit.draws, fit.standardization.as_ref()).into_bytes(),
        ),
        ("metrics.json", to_json(&eval.metrics)?.into_bytes()),
    ];
    if let Some(grid) = &eval.density {
        let truth_values = eval.truth_density.as_ref().map(|t| t.values());
        let extra: Vec<(&str, &[f64])> = truth_values.map(|v| vec![("truth", v)]).unwrap_or_default();
        let mut text = format!("# {GRID_FORMAT}\n");
        text.push_str(&grid_to_csv(grid, &extra));
        files.push(("density.csv", text.into_bytes()));
    }
    if let Some(p) = &eval.partition {
        let pf = PartitionFile {
            format: "rgmm-partition v1",
            n: p.n,
            selected_index: p.selected_index,
            selected: &p.selected,
            criterion: p.criterion,
            n_clusters_distribution: &p.n_clusters_distribution,
            coclustering: (p.n <= PARTITION_MATRIX_MAX_N).then_some(p.coclustering.as_slice()),
        };
        files.push(("partition.json", to_json(&pf)?.into_bytes()));
    }

    let mut outputs = BTreeMap::new();
    for (name, bytes) in &files {
        write_file(&dir.join(name), bytes)?;
        outputs.insert(name.to_string(), content_hash(bytes));
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        seed: config.seed,
        stream_id: config.stream_id,
        data_stream_id: config.data_stream_id,
        tau: fit.tau.clone(),
        input: loaded.source.clone(),
        draws_format: DRAWS_MAGIC.into(),
        outputs,
    };
    write_file(&dir.join("manifest.json"), to_json(&manifest)?.as_bytes())?;
    Ok(ExperimentReport {
        output_dir: dir,
        metrics: eval.metrics,
        manifest,
        skipped: loaded.skipped,
    })
}

/// Re-runs the configuration recorded in a manifest, writing to `output_dir`.
pub fn rerun_manifest(path: &Path, output_dir: Option<PathBuf>) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut config = manifest.config;
    if output_dir.is_some() {
        config.output_dir = output_dir;
    }
    let input = load_data(&config)?.source;
    if input.sha256 != manifest.input.sha256 {
        return Err(Error::Config(format!(
            "input {} has hash {}, manifest records {}",
            input.source, input.sha256, manifest.input.sha256
        )));
    }
    run_experiment(&config)
}
