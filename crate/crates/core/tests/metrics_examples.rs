mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use rgmm::calibration::default_prior_spec;
use rgmm::data::Dataset;
use rgmm::metrics::{
    cpo_lpml, dahl_partition, l1_distance, log_mean_predictive, mse_against_truth, occupied_components,
    DensityGrid, Lattice,
};
use rgmm::repulsion::CoordinateBundle;
use rgmm::sampler::{ChainConfig, Draw, MixtureParams, PosteriorDraws, SamplerMode};
use rgmm::stats::SpdMatrix;

fn draws_from(k: usize, items: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<usize>)>) -> PosteriorDraws {
    let prior = default_prior_spec(k.max(2), 1, 0.02).unwrap();
    let mut prior = prior;
    prior.k = k;
    prior.alpha = vec![1.0; k];
    PosteriorDraws {
        draws: items
            .into_iter()
            .map(|(pi, theta, lambda, z)| Draw {
                params: MixtureParams::new(
                    pi,
                    CoordinateBundle::new(k, 1, theta).unwrap(),
                    lambda.iter().map(|&l| SpdMatrix::scaled_identity(1, l)).collect(),
                )
                .unwrap(),
                z,
            })
            .collect(),
        config: ChainConfig { burn_in: 1, n_saved: 1, thin: 1, seed: 0, stream_id: 0, prior, mode: SamplerMode::IidBaseline },
        acceptance_rates: vec![1.0; k],
    }
}

fn labels_only(partitions: &[Vec<usize>], k: usize) -> PosteriorDraws {
    draws_from(
        k,
        partitions
            .iter()
            .map(|z| (vec![1.0 / k as f64; k], (0..k).map(|j| j as f64).collect(), vec![1.0; k], z.clone()))
            .collect(),
    )
}

fn grid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> DensityGrid {
    DensityGrid::from_fn(Lattice::uniform(&[(lo, hi)], &[points]).unwrap(), |x| f(x[0])).unwrap()
}

#[test]
fn cpo_two_draw_harmonic_mean() {
    let lambda = 1.0 / (2.0 * PI);
    let offset = (2.0 * lambda * 3f64.ln()).sqrt();
    let draws = draws_from(
        1,
        vec![
            (vec![1.0], vec![0.0], vec![lambda], vec![0]),
            (vec![1.0], vec![offset], vec![lambda], vec![0]),
        ],
    );
    let data = Dataset::new(1, vec![0.0]).unwrap();
    let s = cpo_lpml(&draws, &data).unwrap();
    assert!((s.cpo()[0] - 0.5).abs() < 1e-12);
    assert!((s.lpml - 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn cpo_single_draw_is_likelihood() {
    let draws = draws_from(2, vec![(vec![0.3, 0.7], vec![-1.0, 2.0], vec![0.5, 2.0], vec![0, 1])]);
    let data = Dataset::new(1, vec![0.4, 1.7]).unwrap();
    let s = cpo_lpml(&draws, &data).unwrap();
    for (y, c) in [0.4, 1.7].iter().zip(s.cpo()) {
        let f = 0.3 * normal_pdf(*y, -1.0, 0.5) + 0.7 * normal_pdf(*y, 2.0, 2.0);
        assert!((c - f).abs() < 1e-14);
    }
}

#[test]
fn l1_shifted_normals() {
    let closed = 2.0 * (2.0 * normal_cdf(0.5) - 1.0);
    assert!((closed - 0.765_85).abs() < 1e-5);
    let oracle = simpson(|x| (normal_pdf(x, 0.0, 1.0) - normal_pdf(x, 1.0, 1.0)).abs(), -12.0, 13.0, 200_000);
    assert!((oracle - closed).abs() < 1e-6);
    let a = grid(|x| normal_pdf(x, 0.0, 1.0), -12.0, 13.0, 25_001);
    let b = grid(|x| normal_pdf(x, 1.0, 1.0), -12.0, 13.0, 25_001);
    assert!((l1_distance(&a, &b).unwrap() - closed).abs() < 1e-5);
    assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
}

#[test]
fn l1_disjoint_supports_near_two() {
    let a = grid(|x| normal_pdf(x, -10.0, 1.0), -20.0, 20.0, 4001);
    let b = grid(|x| normal_pdf(x, 10.0, 1.0), -20.0, 20.0, 4001);
    assert!((l1_distance(&a, &b).unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn mse_shifted_normals_matches_direct_sum() {
    let a = grid(|x| normal_pdf(x, 0.0, 1.0), -6.0, 6.0, 1201);
    let b = grid(|x| normal_pdf(x, 0.1, 1.0), -6.0, 6.0, 1201);
    let oracle = (0..1201)
        .map(|i| {
            let x = -6.0 + 0.01 * i as f64;
            (normal_pdf(x, 0.0, 1.0) - normal_pdf(x, 0.1, 1.0)).powi(2)
        })
        .sum::<f64>()
        / 1201.0;
    assert!((mse_against_truth(&a, &b).unwrap() - oracle).abs() < 1e-10);
    let shifted = grid(|x| normal_pdf(x, 0.0, 1.0) + 0.01, -6.0, 6.0, 1201);
    assert!((mse_against_truth(&shifted, &a).unwrap() - 1e-4).abs() < 1e-15);
}

#[test]
fn lattice_mismatch_rejected() {
    let a = grid(|x| x.abs(), -1.0, 1.0, 11);
    let b = grid(|x| x.abs(), -1.0, 1.0, 12);
    assert!(mse_against_truth(&a, &b).is_err());
    assert!(l1_distance(&a, &b).is_err());
}

#[test]
fn dahl_three_observation_tie() {
    let d = labels_only(&[vec![0, 0, 1], vec![0, 1, 1]], 2);
    let p = dahl_partition(&d, 10).unwrap();
    assert_eq!(p.coclustering_at(0, 1), 0.5);
    assert_eq!(p.coclustering_at(0, 2), 0.0);
    assert_eq!(p.coclustering_at(1, 2), 0.5);
    assert!((0..3).all(|i| p.coclustering_at(i, i) == 1.0));
    assert_eq!(p.selected_index, 0);
    assert_eq!(p.selected, vec![0, 0, 1]);
    assert!((p.criterion - 1.0).abs() < 1e-15);
    assert!(dahl_partition(&d, 2).is_err());
}

#[test]
fn dahl_shared_partition() {
    let d = labels_only(&vec![vec![1, 0, 1, 0]; 3], 2);
    let p = dahl_partition(&d, 10).unwrap();
    assert_eq!(p.criterion, 0.0);
    assert_eq!(p.selected, vec![1, 0, 1, 0]);
}

#[test]
fn occupancy_examples() {
    let d = labels_only(&[vec![0, 1, 0, 1], vec![0, 1, 2, 3], vec![1, 0, 0, 1], vec![3, 2, 1, 0]], 4);
    let o = occupied_components(&d);
    assert_eq!(o.mean, 3.0);
    assert_eq!(o.sd, 1.0);
    assert_eq!(o.histogram.get(&2), Some(&2));
    assert_eq!(o.histogram.get(&4), Some(&2));

    let single = occupied_components(&labels_only(&[vec![0; 5], vec![0; 5]], 3));
    assert_eq!((single.mean, single.sd), (1.0, 0.0));
}

fn random_draws() -> impl Strategy<Value = PosteriorDraws> {
    let k = 3;
    let one = (
        prop::collection::vec(0.05..1.0f64, k),
        prop::collection::vec(-3.0..3.0f64, k),
        prop::collection::vec(0.1..2.0f64, k),
        prop::collection::vec(0usize..k, 6),
    )
        .prop_map(|(w, t, l, z)| {
            let s: f64 = w.iter().sum();
            (w.iter().map(|x| x / s).collect(), t, l, z)
        });
    prop::collection::vec(one, 1..6).prop_map(move |items| draws_from(k, items))
}

fn relabel(draws: &PosteriorDraws, perms: &[Vec<usize>]) -> PosteriorDraws {
    let mut out = draws.clone();
    for (draw, perm) in out.draws.iter_mut().zip(perms) {
        // Component j moves to position perm[j].
        let k = perm.len();
        let old = draw.params.clone();
        let mut pi = vec![0.0; k];
        let mut theta = vec![0.0; k];
        let mut lambda = old.lambda.clone();
        for j in 0..k {
            pi[perm[j]] = old.pi[j];
            theta[perm[j]] = old.theta.row(j)[0];
            lambda[perm[j]] = old.lambda[j].clone();
        }
        draw.params = MixtureParams::new(pi, CoordinateBundle::new(k, 1, theta).unwrap(), lambda).unwrap();
        draw.z.iter_mut().for_each(|z| *z = perm[*z]);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn label_invariance(draws in random_draws(), ys in prop::collection::vec(-3.0..3.0f64, 6), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = rgmm::stats::RngStream::new(seed, 0);
        let perms: Vec<Vec<usize>> = (0..draws.len())
            .map(|_| { let mut p = vec![0, 1, 2]; p.shuffle(&mut rng); p })
            .collect();
        let moved = relabel(&draws, &perms);
        let data = Dataset::new(1, ys).unwrap();
        let (a, b) = (cpo_lpml(&draws, &data).unwrap(), cpo_lpml(&moved, &data).unwrap());
        prop_assert!((a.lpml - b.lpml).abs() < 1e-10);
        prop_assert_eq!(occupied_components(&draws).per_draw, occupied_components(&moved).per_draw);
        let (pa, pb) = (dahl_partition(&draws, 100).unwrap(), dahl_partition(&moved, 100).unwrap());
        prop_assert_eq!(&pa.coclustering, &pb.coclustering);
        prop_assert_eq!(pa.criterion, pb.criterion);
        prop_assert_eq!(pa.selected_index, pb.selected_index);
    }

    #[test]
    fn harmonic_not_above_arithmetic(draws in random_draws(), ys in prop::collection::vec(-3.0..3.0f64, 6)) {
        let data = Dataset::new(1, ys).unwrap();
        let lpml = cpo_lpml(&draws, &data).unwrap().lpml;
        prop_assert!(lpml <= log_mean_predictive(&draws, &data).unwrap() + 1e-10);
    }

    #[test]
    fn l1_is_a_metric(ms in prop::collection::vec(-2.0..2.0f64, 3), vs in prop::collection::vec(0.3..2.0f64, 3)) {
        let g: Vec<DensityGrid> = ms.iter().zip(&vs).map(|(&m, &v)| grid(|x| normal_pdf(x, m, v), -15.0, 15.0, 3001)).collect();
        let d = |a: usize, b: usize| l1_distance(&g[a], &g[b]).unwrap();
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 2e-3);
        prop_assert!(d(0, 1) <= 2.0 + 1e-3);
    }
}
