//! Command-line front end: calibration, fits, simulation, replication
//! studies, metric recomputation and normalizing constants.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rgmm::calibration::{calibrate_tau, calibrate_tau_unsnapped, CalibrationTarget};
use rgmm::harness::{
    content_hash, dataset_to_csv, evaluate, generate_data, read_delimited, read_draws, rerun_manifest,
    rows_csv, run_experiment, run_replication_study, summary_csv, MixtureSpec, ReadOptions, RunConfig,
    StudyPlan, OUTPUT_DIR_ENV, PRESETS,
};
use rgmm::repulsion::{nrep_constant_exact, nrep_constant_mc, NRepParams};
use rgmm::stats::RngStream;
use rgmm::{Error, Result};

#[derive(Parser)]
#[command(name = "rgmm", version, about = "Repulsive Gaussian mixture models")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repulsion strength tau from a target (d, u, p).
    Calibrate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        p: f64,
    },
    /// Fit one data set and write draws, density grid, metrics, partition and manifest.
    Fit(FitArgs),
    /// Simulate a data file from a built-in mixture.
    Simulate {
        /// sim-study-1d or intro-2d.
        #[arg(long)]
        builtin: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream_id: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replication study on simulated data.
    Study(StudyArgs),
    /// Recompute metrics from a draws file and the data it was fitted to.
    Metrics {
        #[arg(long)]
        draws: PathBuf,
        /// Data on the original scale (e.g. `data.csv` from `fit`).
        #[arg(long)]
        data: PathBuf,
        /// Built-in generating mixture, for MSE and L1.
        #[arg(long)]
        truth: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
        /// Output JSON (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Normalizing constant c_{k,d}: exact enumeration and/or Monte Carlo.
    Constant {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        tau: f64,
        /// Monte Carlo sample size; 0 skips the estimate.
        #[arg(long, default_value_t = 0)]
        mc: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the configuration recorded in a manifest.
    #[arg(long, conflicts_with_all = ["config", "preset", "set", "input", "builtin"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct StudyArgs {
    /// Comma-separated presets, e.g. `sim-m1,sim-m2,sim-m3`.
    #[arg(long, value_delimiter = ',', default_value = "sim-m1,sim-m2,sim-m3")]
    models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "500,1000,5000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    /// Chains run at once.
    #[arg(long, default_value_t = 4)]
    parallelism: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = "rgmm-study")]
    output_dir: PathBuf,
    /// `key=value` overrides applied to every model.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn fit_config(args: &FitArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &args.preset {
        if args.config.is_some() {
            return Err(Error::Config("use either --config or --preset (put `preset` in the file)".into()));
        }
        config = RunConfig::preset(p)?;
    }
    if let Some(i) = &args.input {
        config.apply("input", &i.to_string_lossy())?;
    }
    if let Some(b) = &args.builtin {
        config.apply("builtin", b)?;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(g) = args.grid_points {
        config.grid_points = Some(g);
    }
    if let Some(o) = &args.output_dir {
        config.output_dir = Some(o.clone());
    }
    config.apply_overrides(&args.set)?;
    Ok(config)
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Calibrate { d, u, p } => {
            let target = CalibrationTarget::new(d, u, p)?;
            let out = serde_json::json!({
                "d": d, "u": u, "p": p,
                "tau": calibrate_tau(&target)?,
                "tau_unsnapped": calibrate_tau_unsnapped(&target)?,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Fit(args) => {
            let report = match &args.manifest {
                Some(m) => rerun_manifest(m, args.output_dir.clone())?,
                None => run_experiment(&fit_config(&args)?)?,
            };
            if !report.skipped.is_empty() {
                let lines: Vec<String> = report.skipped.iter().map(|s| s.line.to_string()).collect();
                eprintln!(
                    "skipped {} incomplete rows (lines {})",
                    report.skipped.len(),
                    lines.join(", ")
                );
            }
            let m = &report.metrics;
            eprintln!(
                "n = {}, d = {}, tau = {}, occupied = {:.3} (sd {:.3}), LPML = {:.3} (original scale {:.3})",
                m.n,
                m.d,
                m.tau.map_or("none".into(), |t| t.to_string()),
                m.occupied.mean,
                m.occupied.sd,
                m.lpml,
                m.lpml_original_scale
            );
            println!("{}", report.output_dir.display());
        }
        Command::Simulate {
            builtin,
            n,
            seed,
            stream_id,
            output,
        } => {
            let spec = MixtureSpec::builtin(&builtin)?;
            let data = generate_data(&spec, n, &mut RngStream::new(seed, stream_id))?;
            write_or_print(output.as_ref(), &dataset_to_csv(&data))?;
        }
        Command::Study(args) => {
            let models = args
                .models
                .iter()
                .map(|name| {
                    let mut c = RunConfig::preset(name)?;
                    if c.builtin.is_none() {
                        c.apply("builtin", "sim-study-1d")?;
                    }
                    c.apply_overrides(&args.set)?;
                    Ok((name.clone(), c))
                })
                .collect::<Result<Vec<_>>>()?;
            let plan = StudyPlan {
                models,
                sample_sizes: args.sizes.clone(),
                n_replicates: args.replicates,
                parallelism: args.parallelism,
                seed: args.seed,
                grid_points: args.grid_points,
            };
            let report = run_replication_study(&plan)?;
            std::fs::create_dir_all(&args.output_dir).map_err(|e| Error::Io {
                path: args.output_dir.clone(),
                source: e,
            })?;
            let rows = rows_csv(&report.rows);
            let summary = summary_csv(&report.summaries);
            write_or_print(Some(&args.output_dir.join("rows.csv")), &rows)?;
            write_or_print(Some(&args.output_dir.join("summary.csv")), &summary)?;
            if report.failures() > 0 {
                eprintln!("{} of {} cells failed; see rows.csv", report.failures(), report.rows.len());
            }
            eprintln!("rows.csv {}", content_hash(rows.as_bytes()));
            eprintln!("summary.csv {}", content_hash(summary.as_bytes()));
            println!("{}", args.output_dir.display());
        }
        Command::Metrics {
            draws,
            data,
            truth,
            grid_points,
            output,
        } => {
            let (draws, record) = read_draws(&draws)?;
            let raw = read_delimited(&data, &ReadOptions::default())?.dataset;
            let fitted = match &record {
                Some(r) => raw.standardize_with(r.clone())?,
                None => raw,
            };
            let truth = truth.map(|t| MixtureSpec::builtin(&t)).transpose()?;
            let eval = evaluate(&draws, &fitted, record.as_ref(), truth.as_ref(), grid_points, true)?;
            let mut text = serde_json::to_string_pretty(&eval.metrics)?;
            text.push('\n');
            write_or_print(output.as_ref(), &text)?;
        }
        Command::Constant { k, d, tau, mc, seed } => {
            let params = NRepParams::standard(k, d, tau)?;
            let exact = match nrep_constant_exact(&params) {
                Ok(c) => Some(c),
                Err(Error::Capacity(msg)) => {
                    eprintln!("exact enumeration unavailable: {msg}");
                    None
                }
                Err(e) => return Err(e),
            };
            let mc = if mc > 0 {
                Some(nrep_constant_mc(&params, &mut RngStream::new(seed, 0), mc)?)
            } else {
                None
            };
            let out = serde_json::json!({ "k": k, "d": d, "tau": tau, "exact": exact, "monte_carlo": mc });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Config(_) = e {
                eprintln!("presets: {}", PRESETS.join(", "));
            }
            ExitCode::FAILURE
        }
    }
}
