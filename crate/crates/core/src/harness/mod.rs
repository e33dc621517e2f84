//! Data ingestion, configuration, single fits and replication studies.

pub mod config;
pub mod draws_io;
pub mod experiment;
pub mod io;
pub mod mixture;
pub mod study;

pub use config::{ResolvedPrior, RunConfig, TauResolution, OUTPUT_DIR_ENV, PRESETS};
pub use draws_io::{draws_to_string, parse_draws, read_draws, write_draws, DRAWS_MAGIC};
pub use experiment::{
    content_hash, default_lattice, evaluate, fit, load_data, rerun_manifest, run_experiment, Evaluation,
    ExperimentReport, Fit, InputRecord, LoadedData, Manifest, MetricsReport, TruthComparison,
};
pub use io::{dataset_to_csv, parse_delimited, read_delimited, ParsedData, ReadOptions, SkippedRow};
pub use mixture::{generate_data, MixtureSpec};
pub use study::{
    occupied_by_replicate, quantile_type7, rows_csv, run_replication_study, summary_csv, CellSummary,
    StudyPlan, StudyReport, StudyRow,
};
