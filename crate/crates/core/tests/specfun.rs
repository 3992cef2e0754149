mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rarefall::oracles::{
    bessel_i_series, erlang_cdf, hypoexp_partial_fraction, hypoexp_reference, marcum_q_poisson_mixture,
};
use rarefall::specfun::{bessel_i, bessel_i0, hypoexp_cdf, marcum_p, marcum_q, BidiagonalGenerator};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn bessel_i0_examples() {
    assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
    for x in [1.0, 10.0] {
        let oracle = bessel_i_series(0, x, 60);
        assert!(rel(bessel_i0(x).unwrap(), oracle) < 1e-12, "x={x}");
    }
}

#[test]
fn bessel_i_examples() {
    assert_eq!(bessel_i(0, 2.0).unwrap(), bessel_i0(2.0).unwrap());
    assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    assert!(rel(bessel_i(3, 1.5).unwrap(), bessel_i_series(3, 1.5, 40)) < 1e-13);
}

#[test]
fn bessel_matches_series_across_routes() {
    // covers the origin series, the peak-centred series and the asymptotic branch
    for nu in [0u32, 1, 2, 3, 5, 8, 15] {
        for x in [0.01, 0.5, 2.0, 7.5, 20.0, 49.0, 51.0, 80.0, 150.0] {
            let oracle = bessel_i_series(nu, x, 400);
            let v = bessel_i(nu, x).unwrap();
            assert!(rel(v, oracle) < 1e-12, "nu={nu} x={x}: {v} vs {oracle}");
        }
    }
}

#[test]
fn bessel_recurrence_holds_up_to_700() {
    // I_{ν−1}(x) − I_{ν+1}(x) = (2ν/x) I_ν(x); the subtraction cancels a
    // factor x/(2ν), so per-value accuracy of 1e−13 shows up amplified
    for nu in [1u32, 2, 4, 7] {
        for x in [60.0, 120.0, 300.0, 500.0, 700.0] {
            let lhs = bessel_i(nu - 1, x).unwrap() - bessel_i(nu + 1, x).unwrap();
            let rhs = 2.0 * nu as f64 / x * bessel_i(nu, x).unwrap();
            assert!(rel(lhs, rhs) < 1e-13 * x / (2.0 * nu as f64), "nu={nu} x={x}");
        }
    }
    assert!(bessel_i0(700.0).unwrap().is_finite());
}

#[test]
fn bessel_i0_monotone_on_grid() {
    let mut prev = 0.0;
    for i in 0..1000 {
        let v = bessel_i0(i as f64 * 0.7).unwrap();
        assert!(v >= 1.0 && v >= prev, "i={i}");
        prev = v;
    }
}

#[test]
fn bessel_domain_errors() {
    assert!(bessel_i0(-1.0).is_err());
    assert!(bessel_i(2, f64::NAN).is_err());
    assert!(bessel_i0(f64::INFINITY).is_err());
}

#[test]
fn marcum_examples() {
    assert_eq!(marcum_q(3, 1.7, 0.0).unwrap(), 1.0);
    assert!((marcum_q(1, 0.0, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    let oracle = marcum_q_poisson_mixture(4, 2.0, 1.0);
    assert!((marcum_q(4, 2.0, 1.0).unwrap() - oracle).abs() < 1e-12);
}

#[test]
fn marcum_matches_poisson_mixture_on_grid() {
    for mu in [1u32, 2, 4, 6, 8] {
        for a in [0.0, 0.3, 1.0, 2.5, 5.0, 9.0] {
            for b in [0.05, 0.5, 1.0, 2.0, 4.0, 7.0, 12.0] {
                let oracle = marcum_q_poisson_mixture(mu, a, b);
                let v = marcum_q(mu, a, b).unwrap();
                assert!((v - oracle).abs() < 1e-12, "mu={mu} a={a} b={b}: {v} vs {oracle}");
                let p = marcum_p(mu, a, b).unwrap();
                assert!((p + v - 1.0).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn marcum_vanishes_at_large_b() {
    for mu in 1..=8 {
        for a in [0.0, 1.0, 2.5, 5.0] {
            assert!(marcum_q(mu, a, 50.0).unwrap() < 1e-8);
        }
    }
}

#[test]
fn marcum_domain_errors() {
    assert!(marcum_q(0, 1.0, 1.0).is_err());
    assert!(marcum_q(1, f64::NAN, 1.0).is_err());
    assert!(marcum_q(1, 1.0, -1.0).is_err());
}

#[test]
fn hypoexp_examples() {
    let t = 0.7;
    assert!(rel(hypoexp_cdf(&[2.0], t).unwrap(), -(-t / 2.0f64).exp_m1()) < 1e-14);
    let pf = hypoexp_partial_fraction(&[1.0, 2.0, 4.0], 3.0).unwrap();
    assert!(rel(hypoexp_cdf(&[1.0, 2.0, 4.0], 3.0).unwrap(), pf.value) < 1e-12);
    assert!(rel(hypoexp_cdf(&[2.0, 2.0, 2.0], 5.0).unwrap(), erlang_cdf(3, 2.0, 5.0)) < 1e-13);
    assert_eq!(hypoexp_cdf(&[1.0, 3.0], 0.0).unwrap(), 0.0);
}

#[test]
fn hypoexp_matches_reference_on_random_inputs() {
    let mut rng = common::rng(11);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let l = rng.random_range(1..=6);
        let means: Vec<f64> = (0..l).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
        let separated =
            means.iter().enumerate().all(|(i, a)| means[..i].iter().all(|b| (a - b).abs() > 0.05 * a.max(*b)));
        if !separated {
            continue;
        }
        let total: f64 = means.iter().sum();
        let t = total * 10f64.powf(rng.random_range(-4.0..50f64.log10()));
        let r = hypoexp_reference(&means, t);
        let v = hypoexp_cdf(&means, t).unwrap();
        worst = worst.max(rel(v, r.value));
        n += 1;
    }
    assert!(worst <= 1e-10, "worst relative error {worst:e}");
}

#[test]
fn hypoexp_permutation_invariant() {
    let mut rng = common::rng(5);
    let mut means = vec![0.4, 1.0, 1.0, 2.5, 7.0, 3.3];
    let base = hypoexp_cdf(&means, 4.0).unwrap();
    for _ in 0..100 {
        means.shuffle(&mut rng);
        assert!((hypoexp_cdf(&means, 4.0).unwrap() - base).abs() <= 1e-13);
    }
}

#[test]
fn hypoexp_saturates() {
    for means in [vec![1.0], vec![0.5, 3.0, 3.0], vec![1.0, 2.0, 4.0, 8.0, 16.0, 0.1]] {
        let total: f64 = means.iter().sum();
        assert!(hypoexp_cdf(&means, 200.0 * total).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn hypoexp_handles_sixteen_branches_and_rejects_more() {
    let means: Vec<f64> = (1..=16).map(|i| i as f64).collect();
    let v = hypoexp_cdf(&means, 10.0).unwrap();
    assert!(v > 0.0 && v < 1.0);
    assert!(hypoexp_cdf(&[1.0; 17], 1.0).is_err());
    assert!(hypoexp_cdf(&[1.0, -1.0], 1.0).is_err());
    assert!(BidiagonalGenerator::new(vec![]).is_err());
}

#[test]
fn hypoexp_tiny_values_keep_relative_accuracy() {
    // the lower tail behaves like t^L/(L! Π means)
    let means = [1.0, 2.0, 4.0, 8.0];
    let t: f64 = 1e-3;
    let leading = t.powi(4) / (24.0 * 64.0);
    let v = hypoexp_cdf(&means, t).unwrap();
    assert!(rel(v, leading) < 2e-3, "{v} vs {leading}");
    assert!(rel(v, hypoexp_reference(&means, t).value) < 1e-12);
}

proptest! {
    #[test]
    fn marcum_monotone(mu in 1u32..8, a in 0.0f64..6.0, b in 0.0f64..10.0, da in 0.0f64..1.0, db in 0.0f64..1.0) {
        let q = marcum_q(mu, a, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!(marcum_q(mu, a, b + db).unwrap() <= q + 1e-15);
        prop_assert!(marcum_q(mu, a + da, b).unwrap() >= q - 1e-15);
    }

    #[test]
    fn hypoexp_monotone_in_t(means in prop::collection::vec(0.05f64..20.0, 1..8), t in 0.0f64..50.0, dt in 0.0f64..5.0) {
        let a = hypoexp_cdf(&means, t).unwrap();
        let b = hypoexp_cdf(&means, t + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn bessel_monotone_in_x(nu in 0u32..10, x in 0.0f64..700.0, dx in 0.0f64..3.0) {
        let a = bessel_i(nu, x).unwrap();
        prop_assert!(bessel_i(nu, x + dx).unwrap() >= a);
    }
}
