mod common;

use common::db;
use rarefall::mrc_oracle::{box_probability, mrc_outage_corr_rayleigh};
use rarefall::oracles::{
    erlang_cdf, hypoexp_partial_fraction, hypoexp_power_series, integrate, mc_high_effort, quad_event_probability,
    McEvent, QuadratureSpec, Region,
};
use rarefall::specfun::hypoexp_cdf;
use rarefall::{Error, FadingScenario, RunSpec};

fn quad(s: &FadingScenario, region: Region, g0: f64) -> f64 {
    let r = quad_event_probability(s, QuadratureSpec::new(region, s.branches()), g0).unwrap();
    assert!(r.tolerance_reached, "{s:?}: {r:?}");
    r.value
}

#[test]
fn sphere_quadrature_matches_hypoexponential() {
    let omega = db(10.0);
    let s = FadingScenario::inid_rayleigh(vec![omega; 2]).unwrap();
    for g0 in [0.3, 1.0, 2.5, 4.0] {
        let q = quad(&s, Region::Sphere, g0);
        let h = hypoexp_cdf(&[omega, omega], g0 * g0).unwrap();
        assert!((q - h).abs() <= 1e-8, "g0={g0}: {q} vs {h}");
    }
}

#[test]
fn rice_without_line_of_sight_is_rayleigh() {
    let rayleigh = FadingScenario::inid_rayleigh(vec![2.0, 2.0]).unwrap();
    let rice = FadingScenario::iid_rice(0.0, 2.0, 2).unwrap();
    for g0 in [0.5, 1.5] {
        let a = quad(&rayleigh, Region::Simplex, g0);
        let b = quad(&rice, Region::Simplex, g0);
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn uncorrelated_pair_is_independent() {
    let sigma = 1.3;
    let corr = FadingScenario::exp_corr_rayleigh(sigma, 0.0, 2).unwrap();
    let ind = FadingScenario::inid_rayleigh(vec![2.0 * sigma * sigma; 2]).unwrap();
    for region in [Region::Simplex, Region::Sphere] {
        let a = quad(&corr, region, 1.7);
        let b = quad(&ind, region, 1.7);
        assert!((a - b).abs() <= 1e-10, "{region:?}: {a} vs {b}");
    }
}

#[test]
fn three_dimensional_sphere_matches_closed_forms() {
    let omegas = vec![1.0, 2.0, 4.0];
    let s = FadingScenario::inid_rayleigh(omegas.clone()).unwrap();
    let q = quad(&s, Region::Sphere, 1.2);
    assert!((q - hypoexp_cdf(&omegas, 1.44).unwrap()).abs() <= 1e-7);

    let c = FadingScenario::exp_corr_rayleigh(1.0, 0.6, 3).unwrap();
    let q = quad(&c, Region::Sphere, 1.5);
    assert!((q - mrc_outage_corr_rayleigh(1.0, 0.6, 3, 1.5).unwrap()).abs() <= 1e-7);
}

#[test]
fn halving_the_tolerance_stays_within_the_bound() {
    let cases = [
        FadingScenario::inid_rayleigh(vec![1.0, 3.0]).unwrap(),
        FadingScenario::exp_corr_rayleigh(5f64.sqrt(), 0.5, 2).unwrap(),
        FadingScenario::iid_rice(3.0, db(10.0), 2).unwrap(),
        FadingScenario::inid_rayleigh(vec![1.0, 2.0, 0.5]).unwrap(),
    ];
    for s in &cases {
        for region in [Region::Simplex, Region::Sphere] {
            let spec = QuadratureSpec::new(region, s.branches());
            let a = quad_event_probability(s, spec, 1.1).unwrap();
            let b = quad_event_probability(s, QuadratureSpec { abs_tol: spec.abs_tol / 2.0, ..spec }, 1.1).unwrap();
            assert!((a.value - b.value).abs() <= a.error_bound.max(1e-15), "{s:?} {region:?}: {a:?} {b:?}");
        }
    }
}

#[test]
fn quadrature_rejects_unsupported_inputs() {
    let four = FadingScenario::inid_rayleigh(vec![1.0; 4]).unwrap();
    assert!(matches!(quad_event_probability(&four, QuadratureSpec::new(Region::Sphere, 4), 1.0), Err(Error::Size(_))));
    let gsc = FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.0, 3.0], 2).unwrap();
    assert!(matches!(
        quad_event_probability(&gsc, QuadratureSpec::new(Region::Sphere, 3), 1.0),
        Err(Error::Unsupported { .. })
    ));
}

#[test]
fn ordered_pair_with_both_branches_matches_unordered() {
    let ordered = FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.5], 2).unwrap();
    let plain = FadingScenario::inid_rayleigh(vec![1.0, 2.5]).unwrap();
    let a = quad(&ordered, Region::Simplex, 0.9);
    let b = quad(&plain, Region::Simplex, 0.9);
    assert!((a - b).abs() <= 1e-10);
}

#[test]
fn monte_carlo_saturates_for_huge_thresholds() {
    let run = RunSpec::new(100_000, 1);
    for s in [
        FadingScenario::inid_rayleigh(vec![1.0, 2.0, 3.0]).unwrap(),
        FadingScenario::exp_corr_rayleigh(1.0, 0.5, 4).unwrap(),
        FadingScenario::iid_rice(3.0, 1.0, 3).unwrap(),
        FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.0, 3.0], 2).unwrap(),
    ] {
        for event in [McEvent::EgcSum, McEvent::MrcSum, McEvent::OrderedPartialSum] {
            assert_eq!(mc_high_effort(&s, event, 1e3, &run).unwrap(), (1.0, 0.0), "{s:?} {event:?}");
        }
    }
}

#[test]
fn monte_carlo_events_coincide_when_all_branches_are_combined() {
    let s = FadingScenario::ordered_inid_rayleigh(vec![db(5.0), db(5.0), db(8.0), db(8.0)], 4).unwrap();
    let run = RunSpec::new(1_000_000, 2);
    let (a, sa) = mc_high_effort(&s, McEvent::MrcSum, 2.0, &run).unwrap();
    let (b, sb) = mc_high_effort(&s, McEvent::OrderedPartialSum, 2.0, &run).unwrap();
    assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt());
}

#[test]
fn monte_carlo_matches_box_probability_for_the_largest_branch() {
    // the largest envelope stays below γ₀ exactly when every branch does
    let omegas = vec![1.0, 2.0, 3.0];
    let s = FadingScenario::ordered_inid_rayleigh(omegas.clone(), 1).unwrap();
    let (p, se) = mc_high_effort(&s, McEvent::EgcSum, 1.0, &RunSpec::new(1_000_000, 3)).unwrap();
    let exact = box_probability(&omegas, 1.0);
    assert!(common::within_se(p, exact, se, 3.0), "{p} vs {exact}");
}

#[test]
fn hypoexponential_references_agree() {
    let means = [0.5, 1.3, 2.9, 4.0];
    for t in [0.01, 0.5, 3.0, 12.0] {
        let pf = hypoexp_partial_fraction(&means, t).unwrap();
        let ps = hypoexp_power_series(&means, t);
        assert!((pf.value - ps.value).abs() <= pf.error_bound + ps.error_bound + 1e-15, "t={t}");
    }
    assert!(hypoexp_partial_fraction(&[1.0, 1.0], 1.0).is_err());
    let ps = hypoexp_power_series(&[2.0; 3], 1.5);
    assert!((ps.value - erlang_cdf(3, 2.0, 1.5)).abs() <= 1e-14);
}

#[test]
fn integrator_reports_non_convergence() {
    let i = integrate(|x| 1.0 / x.sqrt().max(1e-300), 0.0, 1.0, 1e-15, 0.0);
    assert!((i.value - 2.0).abs() < 1e-3);
    assert!(!i.converged || i.error <= 1e-15);
}
