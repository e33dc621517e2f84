mod common;

use std::fs;

use common::*;
use rgmm::data::Dataset;
use rgmm::harness::{
    content_hash, evaluate, fit, generate_data, load_data, parse_delimited, read_draws, rerun_manifest,
    run_experiment, run_replication_study, MixtureSpec, ReadOptions, RunConfig, StudyPlan,
};
use rgmm::metrics::{DensityGrid, Lattice};
use rgmm::stats::RngStream;

fn quick(preset: &str, dir: &std::path::Path) -> RunConfig {
    let mut c = RunConfig::preset(preset).unwrap();
    c.apply_overrides(&["builtin=sim-study-1d", "n=120", "burn_in=60", "n_saved=40", "thin=2", "grid_points=200"])
        .unwrap();
    c.output_dir = Some(dir.to_path_buf());
    c
}

#[test]
fn simulation_mixture_mean() {
    let spec = MixtureSpec::builtin("sim-study-1d").unwrap();
    let data = generate_data(&spec, 1_000_000, &mut RngStream::new(41, 0)).unwrap();
    assert!((data.column_means()[0] - 0.35).abs() < 0.01);
    assert!((spec.mean()[0] - 0.35).abs() < 1e-12);
}

#[test]
fn bivariate_component_frequencies() {
    let spec = MixtureSpec::builtin("intro-2d").unwrap();
    let n = 1_000_000;
    let (data, labels) = spec.sample_labeled(n, &mut RngStream::new(42, 0)).unwrap();
    assert_eq!(data.d(), 2);
    let mut counts = [0usize; 4];
    labels.iter().for_each(|&l| counts[l] += 1);
    for (c, w) in counts.iter().zip([0.2, 0.3, 0.3, 0.2]) {
        assert!((*c as f64 / n as f64 - w).abs() < 0.005, "{counts:?}");
    }
}

#[test]
fn single_component_spec_is_gaussian() {
    let spec = MixtureSpec::new(
        vec![1.0],
        vec![vec![2.0]],
        vec![rgmm::stats::SpdMatrix::scaled_identity(1, 0.25)],
    )
    .unwrap();
    let xs: Vec<f64> = generate_data(&spec, 100_000, &mut RngStream::new(43, 0)).unwrap().as_slice().to_vec();
    assert!((mean(&xs) - 2.0).abs() < 3.0 * iid_se(&xs));
    assert!((variance(&xs) / 0.25 - 1.0).abs() < 0.03);
    assert!((spec.density(&[2.0]) - normal_pdf(2.0, 2.0, 0.25)).abs() < 1e-14);
}

#[test]
fn standardize_two_points() {
    let s = Dataset::new(1, vec![0.0, 2.0]).unwrap().standardize().unwrap();
    assert!((s.row(0)[0] + 0.5f64.sqrt()).abs() < 1e-15);
    assert!((s.row(1)[0] - 0.5f64.sqrt()).abs() < 1e-15);
    let rec = s.standardization().unwrap();
    assert_eq!(rec.mean, vec![1.0]);
    assert!((rec.sd[0] - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn back_transformed_density_integrates_to_one() {
    let data = Dataset::new(1, vec![3.0, 7.0, 10.0, 4.0, 6.0]).unwrap().standardize().unwrap();
    let rec = data.standardization().unwrap();
    let grid = DensityGrid::from_fn(Lattice::uniform(&[(-10.0, 10.0)], &[4001]).unwrap(), |x| {
        normal_pdf(x[0], 0.2, 0.7)
    })
    .unwrap();
    let original = grid.to_original_scale(rec).unwrap();
    assert!((original.integral() - 1.0).abs() < 1e-3);
}

#[test]
fn scale_relations_between_fitted_and_original_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick("sim-m2", dir.path());
    let loaded = load_data(&cfg).unwrap();
    let f = fit(&cfg, &loaded.data).unwrap();
    let eval = evaluate(&f.draws, &f.fitted, f.standardization.as_ref(), loaded.truth.as_ref(), Some(400), false)
        .unwrap();
    let t = eval.metrics.truth.unwrap();
    assert!((t.l1 - t.l1_fitted_scale).abs() < 1e-6);
    let jac = f.standardization.as_ref().unwrap().density_jacobian();
    assert!((t.mse / (t.mse_fitted_scale * jac * jac) - 1.0).abs() < 1e-9);
    assert!((eval.metrics.lpml_original_scale - eval.metrics.lpml - f.fitted.n() as f64 * jac.ln()).abs() < 1e-9);
}

#[test]
fn experiment_is_deterministic_and_recorded() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_experiment(&quick("sim-m2", a.path())).unwrap();
    run_experiment(&quick("sim-m2", b.path())).unwrap();
    for name in ["metrics.json", "draws.txt", "density.csv", "partition.json", "data.csv"] {
        let (x, y) = (fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        assert_eq!(x, y, "{name}");
        assert_eq!(ra.manifest.outputs[name], content_hash(&x));
    }
    // Calibrated from (u, p) = (0.5, 0.95); the reported value is 5.45.
    let mut cfg = quick("sim-m2", a.path());
    cfg.apply_overrides(&["u=0.5", "p=0.95"]).unwrap();
    let tempdir = tempfile::tempdir().unwrap();
    cfg.output_dir = Some(tempdir.path().to_path_buf());
    let calibrated = run_experiment(&cfg).unwrap();
    let tau = calibrated.manifest.tau.unwrap().tau;
    assert!((tau / 5.45 - 1.0).abs() < 0.02);

    let (draws, std) = read_draws(&a.path().join("draws.txt")).unwrap();
    assert_eq!(draws.len(), 40);
    assert!(std.is_some());

    let rerun_dir = tempfile::tempdir().unwrap();
    rerun_manifest(&a.path().join("manifest.json"), Some(rerun_dir.path().to_path_buf())).unwrap();
    assert_eq!(
        fs::read(a.path().join("metrics.json")).unwrap(),
        fs::read(rerun_dir.path().join("metrics.json")).unwrap()
    );
}

#[test]
fn baseline_mode_never_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&quick("sim-m1", dir.path())).unwrap();
    assert_eq!(r.metrics.mode, "iid-baseline");
    assert_eq!(r.metrics.tau, None);
    assert!(r.metrics.acceptance_rates.iter().all(|&a| a == 1.0));
    assert_eq!(r.metrics.k, 10);
}

#[test]
fn missing_rows_are_skipped_with_line_numbers() {
    let text = "# comment\nx,y\n1.0,2.0\n3.0,NA\n\n4.5,-1\n2.0\n-200,7\n";
    let opts = ReadOptions { columns: vec![], missing_markers: vec!["-200".into()] };
    let parsed = parse_delimited(text, &opts, "inline").unwrap();
    assert_eq!(parsed.dataset.n(), 2);
    assert_eq!(parsed.dataset.as_slice(), &[1.0, 2.0, 4.5, -1.0]);
    assert_eq!(parsed.skipped.iter().map(|s| s.line).collect::<Vec<_>>(), vec![4, 7, 8]);
    assert_eq!(parsed.header, Some(vec!["x".to_string(), "y".to_string()]));

    let by_name = parse_delimited(text, &ReadOptions { columns: vec!["y".into()], ..opts.clone() }, "inline").unwrap();
    assert_eq!(by_name.dataset.d(), 1);
    assert!(parse_delimited("1,2\n3,abc\n", &ReadOptions::default(), "inline").is_err());
}

#[test]
fn configuration_rules() {
    assert!(RunConfig::preset("no-such").is_err());
    let mut c = RunConfig::preset("sim-m2").unwrap();
    assert!(c.apply("tau", "-1").is_ok() && c.validate().is_err());
    let mut bare = RunConfig::default();
    bare.builtin = Some("sim-study-1d".into());
    assert!(bare.validate().is_err(), "psi has no default");
    let toml = RunConfig::from_toml_str("preset = \"galaxy\"\nseed = 9\n").unwrap();
    assert_eq!(toml.seed, 9);
    assert_eq!(toml.tau, Some(5.45));
    assert!(RunConfig::from_toml_str("bogus = 1\n").is_err());
}

#[test]
fn study_single_replicate_summary_matches_row() {
    let dir = tempfile::tempdir().unwrap();
    let plan = StudyPlan {
        models: vec![("M2".into(), quick("sim-m2", dir.path()))],
        sample_sizes: vec![80],
        n_replicates: 1,
        parallelism: 1,
        seed: 5,
        grid_points: Some(100),
    };
    let a = run_replication_study(&plan).unwrap();
    let b = run_replication_study(&plan).unwrap();
    assert_eq!(rgmm::harness::rows_csv(&a.rows), rgmm::harness::rows_csv(&b.rows));
    assert_eq!(a.failures(), 0);
    let row = &a.rows[0];
    let s = a.summaries.iter().find(|s| s.metric == "occupied_mean").unwrap();
    assert_eq!((s.median, s.q1, s.q3), (row.occupied_mean, row.occupied_mean, row.occupied_mean));
}
