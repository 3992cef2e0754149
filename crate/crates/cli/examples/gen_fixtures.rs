//! Regenerate `fixtures/oracle_values.txt` from the oracles alone.
//!
//! ```text
//! cargo run --release -p rarefall-cli --example gen_fixtures > crates/cli/fixtures/oracle_values.txt
//! ```
//!
//! The two Monte Carlo rows draw 10⁸ samples each and take a while.

use rarefall::oracles::{
    bessel_i_series, erlang_cdf, hypoexp_reference, kappa_mu_sum_cdf_quadrature, marcum_q_poisson_mixture,
    mc_high_effort, quad_event_probability, McEvent, QuadratureSpec, Region,
};
use rarefall::RunSpec;
use rarefall_cli::fixtures::Inputs;

struct Row {
    name: &'static str,
    op: &'static str,
    inputs: &'static str,
    value: f64,
    error_bound: f64,
    kind: &'static str,
}

fn inputs(s: &str) -> Inputs {
    s.parse().expect("well-formed inputs")
}

fn quadrature(s: &'static str, region: Region) -> (f64, f64) {
    let i = inputs(s);
    let scenario = i.scenario().expect("valid scenario");
    let spec = QuadratureSpec::new(region, scenario.branches());
    let q = quad_event_probability(&scenario, spec, i.num("g0").unwrap()).expect("supported scenario");
    assert!(q.tolerance_reached, "{s}: {q:?}");
    (q.value, q.error_bound)
}

fn monte_carlo(s: &'static str, event: McEvent) -> (f64, f64) {
    let i = inputs(s);
    let scenario = i.scenario().expect("valid scenario");
    let run = RunSpec::new(100_000_000, 20_240_601).with_lanes(4);
    mc_high_effort(&scenario, event, i.num("g0").unwrap(), &run).expect("valid run")
}

fn main() {
    let mut rows = Vec::new();
    for (name, inp, nu, x) in [
        ("bessel_i0_small", "nu=0 x=0.5", 0, 0.5),
        ("bessel_i0_ten", "nu=0 x=10", 0, 10.0),
        ("bessel_i1", "nu=1 x=2.5", 1, 2.5),
        ("bessel_i3", "nu=3 x=1.5", 3, 1.5),
        ("bessel_i5_large", "nu=5 x=20", 5, 20.0),
        ("bessel_i0_asymptotic", "nu=0 x=60", 0, 60.0),
    ] {
        let v = bessel_i_series(nu, x, 400);
        rows.push(Row { name, op: "bessel_i", inputs: inp, value: v, error_bound: 1e-14 * v, kind: "series" });
    }
    for (name, inp, mu, a, b) in [
        ("marcum_q1", "mu=1 a=1 b=2", 1, 1.0, 2.0),
        ("marcum_q2", "mu=2 a=3 b=1.5", 2, 3.0, 1.5),
        ("marcum_q4_tail", "mu=4 a=0.5 b=6", 4, 0.5, 6.0),
    ] {
        let v = marcum_q_poisson_mixture(mu, a, b);
        rows.push(Row { name, op: "marcum_q", inputs: inp, value: v, error_bound: 1e-14, kind: "poisson-mixture" });
    }
    for (name, inp, means, t) in [
        ("hypoexp_three", "means=1;2;4 t=3", vec![1.0, 2.0, 4.0], 3.0),
        ("hypoexp_four_small_t", "means=0.5;1.3;2.9;4 t=0.01", vec![0.5, 1.3, 2.9, 4.0], 0.01),
    ] {
        let r = hypoexp_reference(&means, t);
        rows.push(Row {
            name,
            op: "hypoexp_cdf",
            inputs: inp,
            value: r.value,
            error_bound: r.error_bound,
            kind: "partial-fraction",
        });
    }
    rows.push(Row {
        name: "hypoexp_erlang",
        op: "hypoexp_cdf",
        inputs: "means=10;10;10;10 t=5",
        value: erlang_cdf(4, 10.0, 5.0),
        error_bound: 1e-15,
        kind: "incomplete-gamma",
    });

    let inid4 = "scenario=inid-rayleigh omega=10;10;10;10 g0=1";
    let r = hypoexp_reference(&[10.0; 4], 1.0);
    rows.push(Row {
        name: "mrc_inid4",
        op: "mrc_outage",
        inputs: inid4,
        value: r.value,
        error_bound: r.error_bound,
        kind: "power-series",
    });
    for (name, inp, region) in [
        ("mrc_corr2", "scenario=corr-rayleigh sigma=2.23606797749979 rho=0.5 L=2 g0=1.5", Region::Sphere),
        ("mrc_corr3", "scenario=corr-rayleigh sigma=1 rho=0.7 L=3 g0=1.2", Region::Sphere),
        ("mrc_rice3", "scenario=iid-rice k=3 omega=10 L=3 g0=2", Region::Sphere),
        (
            "mrc_ordered33",
            "scenario=ordered-rayleigh omega=3.1622776601683795;6.309573444801933;6.309573444801933 N=3 g0=1.3",
            Region::Sphere,
        ),
    ] {
        let (value, error_bound) = quadrature(inp, region);
        rows.push(Row { name, op: "mrc_outage", inputs: inp, value, error_bound, kind: "quadrature" });
    }
    let rice4 = "scenario=iid-rice k=3 omega=10 L=4 g0=2.5";
    let i = kappa_mu_sum_cdf_quadrature(3.0, 10.0, 4, 2.5).expect("K > 0");
    assert!(i.converged);
    rows.push(Row {
        name: "mrc_rice4",
        op: "mrc_outage",
        inputs: rice4,
        value: i.value,
        error_bound: i.error,
        kind: "quadrature",
    });
    for (name, inp, event) in [
        ("mrc_corr4", "scenario=corr-rayleigh sigma=2.23606797749979 rho=0.5 L=4 g0=3", McEvent::MrcSum),
        (
            "mrc_ordered24",
            "scenario=ordered-rayleigh omega=3.1622776601683795;3.1622776601683795;6.309573444801933;6.309573444801933 N=2 g0=2",
            McEvent::OrderedPartialSum,
        ),
    ] {
        let (value, error_bound) = monte_carlo(inp, event);
        rows.push(Row { name, op: "mrc_outage", inputs: inp, value, error_bound, kind: "mc" });
    }
    for (name, inp) in [
        ("smoke_inid_rayleigh", "scenario=inid-rayleigh omega=10;10 g0=1.5 samples=100000 seed=1"),
        (
            "smoke_corr_rayleigh",
            "scenario=corr-rayleigh sigma=2.23606797749979 rho=0.5 L=2 g0=1.5 samples=100000 seed=2",
        ),
        ("smoke_iid_rice", "scenario=iid-rice k=3 omega=10 L=2 g0=1.5 samples=100000 seed=3"),
        (
            "smoke_ordered_rayleigh",
            "scenario=ordered-rayleigh omega=3.1622776601683795;6.309573444801933 N=2 g0=1.5 samples=100000 seed=4",
        ),
    ] {
        let (value, error_bound) = quadrature(inp, Region::Simplex);
        rows.push(Row { name, op: "sphere_is", inputs: inp, value, error_bound, kind: "quadrature" });
    }

    println!("# Oracle fixtures for `rarefall validate`; regenerate with the gen_fixtures example.");
    println!("# Values come from the independent references in `rarefall::oracles`:");
    println!("#   series            truncated power series of I_nu");
    println!("#   poisson-mixture   Poisson mixture of regularized incomplete gammas");
    println!("#   partial-fraction  partial fractions, or the power series where that is tighter");
    println!("#   power-series      power series in t of the hypoexponential CDF");
    println!("#   incomplete-gamma  Erlang CDF from the incomplete-gamma series");
    println!("#   quadrature        nested adaptive Gauss-Kronrod over the joint envelope density");
    println!("#   mc                10^8-sample Monte Carlo; error_bound is one standard error");
    println!("# Powers and scales are linear; sphere_is rows run 10^5 samples against the EGC quadrature.");
    println!("# name, op, inputs, value, error_bound, oracle_kind");
    for r in rows {
        println!("{}, {}, {}, {:e}, {:e}, {}", r.name, r.op, r.inputs, r.value, r.error_bound, r.kind);
    }
}
