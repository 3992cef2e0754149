mod common;

use common::db;
use proptest::prelude::*;
use rarefall::engine::RunSpec;
use rarefall::mrc_oracle::{
    box_probability, mrc_outage, mrc_outage_corr_rayleigh, mrc_outage_iid_rice, mrc_outage_inid_rayleigh,
    mrc_outage_ordered, ordered_permutation_table, AlphaWeights,
};
use rarefall::oracles::{hypoexp_partial_fraction, kappa_mu_sum_cdf_quadrature, mc_high_effort, McEvent};
use rarefall::scenarios::{gamma0, FadingScenario, ThresholdSpec};
use rarefall::specfun::hypoexp_cdf;
use rarefall::Error;

const MC_SAMPLES: u64 = 100_000_000;

/// z-test of the closed form against plain MC; the standard error is taken
/// under the null so that a zero-hit run at a tiny probability is judged
/// by its binomial spread rather than a degenerate empirical one.
fn assert_matches_mc(scenario: &FadingScenario, event: McEvent, g0: f64, seed: u64) {
    let closed = mrc_outage(scenario, g0).unwrap();
    let (p, _) = mc_high_effort(scenario, event, g0, &RunSpec::new(MC_SAMPLES, seed).with_lanes(4)).unwrap();
    let se = (closed * (1.0 - closed) / MC_SAMPLES as f64).sqrt();
    assert!((closed - p).abs() <= 3.0 * se, "{}: closed {closed:e} vs MC {p:e}, se {se:e}", scenario.name());
}

#[test]
fn inid_examples() {
    let g0: f64 = 0.8;
    assert!((mrc_outage_inid_rayleigh(&[2.0], g0).unwrap() - (1.0 - (-g0 * g0 / 2.0).exp())).abs() < 1e-15);
    let pf = hypoexp_partial_fraction(&[1.0, 2.0, 4.0], 1.0).unwrap();
    assert!((mrc_outage_inid_rayleigh(&[1.0, 2.0, 4.0], 1.0).unwrap() / pf.value - 1.0).abs() < 1e-12);
}

#[test]
fn inid_matches_high_effort_mc() {
    let s = FadingScenario::inid_rayleigh(vec![db(10.0); 4]).unwrap();
    let g0 = gamma0(ThresholdSpec::new(-9.0, 1.0), 4).unwrap();
    assert_matches_mc(&s, McEvent::MrcSum, g0, 101);
}

#[test]
fn correlated_examples() {
    let (sigma, g0): (f64, f64) = (1.3, 1.7);
    let indep = mrc_outage_inid_rayleigh(&[2.0 * sigma * sigma; 3], g0).unwrap();
    assert!((mrc_outage_corr_rayleigh(sigma, 0.0, 3, g0).unwrap() - indep).abs() < 1e-14);
    let single = 1.0 - (-g0 * g0 / (2.0 * sigma * sigma)).exp();
    assert!((mrc_outage_corr_rayleigh(sigma, 0.7, 1, g0).unwrap() - single).abs() < 1e-15);
}

#[test]
fn correlated_matches_high_effort_mc() {
    let s = FadingScenario::exp_corr_rayleigh(5f64.sqrt(), 0.5, 4).unwrap();
    let g0 = gamma0(ThresholdSpec::new(-2.0, 1.0), 4).unwrap();
    assert_matches_mc(&s, McEvent::MrcSum, g0, 102);
}

#[test]
fn rice_examples() {
    let (omega, g0): (f64, f64) = (1.7, 0.9);
    let single = 1.0 - (-g0 * g0 / omega).exp();
    assert!((mrc_outage_iid_rice(0.0, omega, 1, g0).unwrap() - single).abs() < 1e-15);
    for l in 2..=6 {
        let erlang = hypoexp_cdf(&vec![omega; l], g0 * g0).unwrap();
        assert!((mrc_outage_iid_rice(0.0, omega, l, g0).unwrap() - erlang).abs() <= 1e-10);
    }
    let quad = kappa_mu_sum_cdf_quadrature(3.0, 10.0, 4, 1.0).unwrap();
    assert!(quad.converged);
    let v = mrc_outage_iid_rice(3.0, 10.0, 4, 1.0).unwrap();
    assert!((v / quad.value - 1.0).abs() < 1e-9, "{v:e} vs {:e}", quad.value);
}

#[test]
fn rice_matches_quadrature_across_thresholds() {
    for (k, omega, l) in [(0.5, 1.0, 2), (3.0, 10.0, 4), (6.0, 2.0, 3)] {
        for g0 in [0.2, 0.7, 1.5, 3.0] {
            let quad = kappa_mu_sum_cdf_quadrature(k, omega, l, g0).unwrap();
            let v = mrc_outage_iid_rice(k, omega, l, g0).unwrap();
            assert!(
                (v - quad.value).abs() <= 1e-9 * quad.value + 1e-14,
                "K={k} L={l} g0={g0}: {v:e} vs {:e}",
                quad.value
            );
        }
    }
}

#[test]
fn ordered_table_examples() {
    let g0: f64 = 0.6;
    let t = ordered_permutation_table(&[3.0], 1, g0).unwrap();
    assert_eq!(t.len(), 1);
    assert!((t.weights()[0] - 1.0).abs() < 1e-15);
    assert!((t.total() - (1.0 - (-g0 * g0 / 3.0).exp())).abs() < 1e-15);

    let t = ordered_permutation_table(&[2.0; 4], 2, g0).unwrap();
    assert_eq!(t.len(), 24);
    assert!(t.weights().iter().all(|w| (w - 1.0 / 24.0).abs() < 1e-14));

    assert!(matches!(ordered_permutation_table(&[1.0; 9], 2, g0), Err(Error::Size(_))));
}

#[test]
fn ordered_matches_high_effort_mc() {
    let s = FadingScenario::ordered_inid_rayleigh(vec![db(5.0), db(5.0), db(8.0), db(8.0)], 2).unwrap();
    for (th, seed) in [(-13.0, 103), (-5.0, 104)] {
        let g0 = gamma0(ThresholdSpec::new(th, 1.0), 2).unwrap();
        assert_matches_mc(&s, McEvent::OrderedPartialSum, g0, seed);
    }
}

#[test]
fn ordered_full_selection_is_the_plain_sum() {
    let omegas = [0.7, 1.9, 3.0, 5.5, 2.2];
    for g0 in [0.1, 0.8, 2.0, 4.0] {
        let a = mrc_outage_ordered(&omegas, 5, g0).unwrap();
        let b = mrc_outage_inid_rayleigh(&omegas, g0).unwrap();
        assert!((a - b).abs() <= 1e-10, "g0={g0}: {a} vs {b}");
    }
}

#[test]
fn alpha_weights() {
    assert_eq!(AlphaWeights::new(5, 2).unwrap().alphas, vec![1.0, 2.0, 2.0, 2.0, 2.0]);
    assert_eq!(AlphaWeights::new(3, 3).unwrap().alphas, vec![1.0, 2.0, 3.0]);
    assert!(AlphaWeights::new(3, 4).is_err());
}

fn scenarios() -> Vec<FadingScenario> {
    vec![
        FadingScenario::inid_rayleigh(vec![1.0, 2.0, 5.0]).unwrap(),
        FadingScenario::exp_corr_rayleigh(1.2, 0.8, 4).unwrap(),
        FadingScenario::iid_rice(2.0, 3.0, 3).unwrap(),
        FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.0, 5.0, 3.0], 2).unwrap(),
    ]
}

#[test]
fn limits_and_monotonicity() {
    for s in scenarios() {
        let mut prev = 0.0;
        for i in 0..60 {
            let g0 = 1e-4 * 1.25f64.powi(i);
            let v = mrc_outage(&s, g0).unwrap();
            assert!((0.0..=1.0).contains(&v) && v >= prev, "{} g0={g0}", s.name());
            prev = v;
        }
        assert!(mrc_outage(&s, 1e-4).unwrap() < 1e-12);
        assert!(mrc_outage(&s, 30.0).unwrap() > 1.0 - 1e-10);
    }
}

proptest! {
    #[test]
    fn product_bound_holds(omegas in prop::collection::vec(0.1f64..20.0, 1..6), g0 in 0.01f64..5.0, n in 1usize..6) {
        let bound: f64 = omegas.iter().map(|o| -(-g0 * g0 / o).exp_m1()).product();
        prop_assert!(mrc_outage_inid_rayleigh(&omegas, g0).unwrap() <= bound * (1.0 + 1e-12));
        let n = n.min(omegas.len());
        prop_assert!(mrc_outage_ordered(&omegas, n, g0).unwrap() <= bound * (1.0 + 1e-12));
        prop_assert!((box_probability(&omegas, g0) - bound).abs() <= 1e-15);
    }

    #[test]
    fn permutation_weights_normalized(omegas in prop::collection::vec(0.1f64..20.0, 1..=6), g0 in 0.05f64..4.0, n in 1usize..6) {
        let n = n.min(omegas.len());
        let t = ordered_permutation_table(&omegas, n, g0).unwrap();
        prop_assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!((t.ordering_probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(t.weights().iter().all(|&w| w >= 0.0));
        prop_assert!(t.per_permutation_ptilde().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn box_contains_sphere(omegas in prop::collection::vec(0.1f64..20.0, 1..8), g0 in 0.01f64..6.0) {
        prop_assert!(box_probability(&omegas, g0) >= mrc_outage_inid_rayleigh(&omegas, g0).unwrap() * (1.0 - 1e-12));
    }
}
