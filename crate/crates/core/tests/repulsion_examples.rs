mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rgmm::repulsion::{
    c0_gaussian, enumerate_interaction_sets, laplacian_of, log_repulsive_component, mahalanobis,
    nrep_constant_exact, nrep_constant_mc, repulsive_component, CoordinateBundle, InteractionSet,
    NRepParams,
};
use rgmm::stats::{RngStream, SpdMatrix};

fn bundle(rows: &[Vec<f64>]) -> CoordinateBundle {
    CoordinateBundle::from_rows(rows).unwrap()
}

fn points(k: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-4.0..4.0f64, d), k)
}

#[test]
fn two_point_examples() {
    let sigma = SpdMatrix::identity(1);
    let r = repulsive_component(&bundle(&[vec![0.0], vec![1.0]]), &sigma, 1.0).unwrap();
    assert!((r - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
    assert!((r - 0.393_469_340_287_366_6).abs() < 1e-12);
    assert_eq!(repulsive_component(&bundle(&[vec![0.3], vec![0.3]]), &sigma, 1.0).unwrap(), 0.0);
    let far = repulsive_component(&bundle(&[vec![0.0], vec![40.0]]), &sigma, 1.0).unwrap();
    assert!(far < 1.0 && far > 1.0 - 1e-15);
}

#[test]
fn mahalanobis_examples() {
    let id = SpdMatrix::identity(2);
    assert!((mahalanobis(&[0.0, 0.0], &[3.0, 4.0], &id).unwrap() - 5.0).abs() < 1e-14);
    let diag = SpdMatrix::from_row_slice(2, &[4.0, 0.0, 0.0, 1.0], "s").unwrap();
    assert!((mahalanobis(&[0.0, 0.0], &[2.0, 0.0], &diag).unwrap() - 1.0).abs() < 1e-14);
    assert!(mahalanobis(&[0.0], &[1.0, 2.0], &id).is_err());
    assert!((c0_gaussian(1.0, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
    assert!(c0_gaussian(-1.0, 1.0).is_err());
}

#[test]
fn matches_independent_oracle() {
    let rows = vec![vec![0.1, -0.4], vec![1.2, 0.3], vec![-0.7, 0.9], vec![0.0, 2.0]];
    for tau in [0.5, 1.0, 5.45, 116.76] {
        let lib = repulsive_component(&bundle(&rows), &SpdMatrix::identity(2), tau).unwrap();
        assert!((lib - repulsion_oracle(&rows, tau)).abs() < 1e-14, "tau {tau}");
        let log = log_repulsive_component(&bundle(&rows), &SpdMatrix::identity(2), tau).unwrap();
        assert!((log - lib.ln()).abs() < 1e-12);
    }
}

#[test]
fn complete_graph_laplacian_k3() {
    let lap = laplacian_of(&InteractionSet::complete(3));
    let mut ev: Vec<f64> = lap.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip([0.0, 3.0, 3.0]) {
        assert!((a - b).abs() < 1e-12, "{ev:?}");
    }
}

#[test]
fn laplacians_are_psd_with_zero_row_sums() {
    for k in 2..=4 {
        for set in enumerate_interaction_sets(k).unwrap() {
            let lap: DMatrix<f64> = laplacian_of(&set);
            for r in 0..k {
                assert!(lap.row(r).sum().abs() < 1e-12);
            }
            let min = lap.symmetric_eigen().eigenvalues.min();
            assert!(min > -1e-12);
        }
    }
}

#[test]
fn exact_constant_matches_two_point_closed_form() {
    for d in 1..=4 {
        for tau in [0.1, 1.0, 5.45, 17.17, 116.76] {
            let exact = nrep_constant_exact(&NRepParams::standard(2, d, tau).unwrap()).unwrap().value;
            let closed = 1.0 - (1.0 + 2.0 / tau).powf(-(d as f64) / 2.0);
            assert!((exact - closed).abs() < 1e-12, "d {d} tau {tau}");
        }
    }
}

#[test]
fn exact_constant_matches_oracle_monte_carlo() {
    // Oracle: average of the independent repulsion function over baseline draws.
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = RngStream::new(21, 0);
    for &(k, d, tau) in &[(3usize, 1usize, 1.0), (4, 1, 5.45), (3, 2, 2.0)] {
        let exact = nrep_constant_exact(&NRepParams::standard(k, d, tau).unwrap()).unwrap().value;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                let rows: Vec<Vec<f64>> =
                    (0..k).map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
                repulsion_oracle(&rows, tau)
            })
            .collect();
        assert!((exact - mean(&xs)).abs() < 3.0 * iid_se(&xs), "k {k} d {d} tau {tau}");

        let lib_mc = nrep_constant_mc(&NRepParams::standard(k, d, tau).unwrap(), &mut rng, 200_000).unwrap();
        assert!((exact - lib_mc.value).abs() < 3.0 * lib_mc.mc_std_error);
    }
}

#[test]
fn exact_constant_in_unit_interval_and_increasing_in_spread() {
    let mut prev = 0.0;
    for tau in [100.0, 20.0, 5.0, 1.0, 0.2] {
        let c = nrep_constant_exact(&NRepParams::standard(4, 1, tau).unwrap()).unwrap().value;
        assert!(c > prev && c < 1.0, "tau {tau}: {c}");
        prev = c;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exchangeable_under_permutation(rows in points(5, 2), tau in 0.1..50.0f64, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let sigma = SpdMatrix::identity(2);
        let b = bundle(&rows);
        let base = repulsive_component(&b, &sigma, tau).unwrap();
        let mut perm: Vec<usize> = (0..5).collect();
        perm.shuffle(&mut RngStream::new(seed, 0));
        prop_assert_eq!(repulsive_component(&b.permuted(&perm), &sigma, tau).unwrap().to_bits(), base.to_bits());
    }

    #[test]
    fn in_half_open_unit_interval(rows in points(4, 3), tau in 0.01..200.0f64) {
        let r = repulsive_component(&bundle(&rows), &SpdMatrix::identity(3), tau).unwrap();
        prop_assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn zero_when_two_rows_coincide(mut rows in points(4, 2), tau in 0.1..50.0f64, i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        rows[j] = rows[i].clone();
        prop_assert_eq!(repulsive_component(&bundle(&rows), &SpdMatrix::identity(2), tau).unwrap(), 0.0);
    }

    #[test]
    fn nonincreasing_in_tau(rows in points(3, 1), tau in 0.1..50.0f64, bump in 0.0..10.0f64) {
        let sigma = SpdMatrix::identity(1);
        let lo = repulsive_component(&bundle(&rows), &sigma, tau).unwrap();
        let hi = repulsive_component(&bundle(&rows), &sigma, tau + bump).unwrap();
        prop_assert!(hi <= lo);
    }
}
