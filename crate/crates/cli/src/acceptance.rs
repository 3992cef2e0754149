//! The acceptance suite: nine criteria, each a list of [`Check`]s.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rarefall::estimators::{
    efficiency_report, estimate_naive, estimate_sphere_is, estimate_sphere_is_with, DEFAULT_CONFIDENCE,
};
use rarefall::mrc_oracle::{box_probability, mrc_outage, mrc_outage_iid_rice};
use rarefall::oracles::{
    bessel_i_series, hypoexp_reference, marcum_q_poisson_mixture, mc_high_effort, quad_event_probability, McEvent,
    QuadratureSpec, Region,
};
use rarefall::scenarios::{db_to_linear as db, gamma0};
use rarefall::specfun::{bessel_i, hypoexp_cdf, marcum_q};
use rarefall::sphere_sampler::{fill_uniform_simplex, SphereSampler};
use rarefall::{FadingScenario, OutageProblem, RunSpec, ThresholdSpec};

use crate::config::{RunArgs, RunConfig, RunKind, ScenarioKind};
use crate::output::write_rows;
use crate::run::run_rows;
use crate::validate::Check;

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "oracle equivalence of the special functions"),
    (2, "closed-form truncation probability vs Monte Carlo"),
    (3, "two-branch exactness against quadrature"),
    (4, "naive and sphere-IS confidence intervals overlap"),
    (5, "required runs, i.i.d. Rayleigh L = 4 anchor"),
    (6, "sphere-IS over box-IS efficiency anchors"),
    (7, "bounded relative error along extended grids"),
    (8, "sampler correctness properties"),
    (9, "byte-identical CSV across runs and chunk counts"),
];

/// Transmit SNR of every experiment, dB.
const ESN0_DB: f64 = 1.0;

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    /// Work partitions for the Monte Carlo runs.
    pub lanes: usize,
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// `criterion N: PASS|FAIL title (k/n checks, t s)`.
    pub fn summary(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "criterion {}: {} {} ({ok}/{} checks, {:.1} s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len(),
            self.elapsed.as_secs_f64()
        )
    }

    /// The criterion as one report line: failed sub-checks against zero.
    pub fn as_check(&self) -> Check {
        Check::at_most(format!("criterion-{}", self.id), self.failed_checks().len() as f64, 0.0)
    }
}

pub fn run_criterion(id: u8, s: &Settings) -> CriterionReport {
    let title = CRITERIA.iter().find(|(i, _)| *i == id).map_or("unknown criterion", |(_, t)| t);
    let start = Instant::now();
    let checks = match id {
        1 => criterion_1(),
        2 => criterion_2(s),
        3 => criterion_3(s),
        4 => criterion_4(s),
        5 => criterion_5(s),
        6 => criterion_6(s),
        7 => criterion_7(s),
        8 => criterion_8(),
        9 => criterion_9(),
        _ => vec![Check::failed(format!("c{id}"), "no such criterion")],
    };
    CriterionReport { id, title, checks, elapsed: start.elapsed() }
}

/// Run every criterion, reporting each as soon as it finishes.
pub fn run_suite(s: &Settings, mut on_done: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .map(|&(id, _)| {
            let r = run_criterion(id, s);
            on_done(&r);
            r
        })
        .collect()
}

fn run(samples: u64, seed: u64, s: &Settings) -> RunSpec {
    RunSpec::new(samples, seed).with_lanes(s.lanes)
}

fn g0_at(scenario: &FadingScenario, gamma_th_db: f64) -> f64 {
    gamma0(ThresholdSpec::new(gamma_th_db, ESN0_DB), scenario.combined_branches()).expect("finite threshold")
}

fn rayleigh(l: usize) -> FadingScenario {
    FadingScenario::inid_rayleigh(vec![db(10.0); l]).expect("valid scenario")
}

fn corr(l: usize) -> FadingScenario {
    FadingScenario::exp_corr_rayleigh(5f64.sqrt(), 0.5, l).expect("valid scenario")
}

fn rice(k: f64, l: usize) -> FadingScenario {
    FadingScenario::iid_rice(k, db(10.0), l).expect("valid scenario")
}

fn ordered(omegas_db: &[f64], n: usize) -> FadingScenario {
    FadingScenario::ordered_inid_rayleigh(omegas_db.iter().map(|&d| db(d)).collect(), n).expect("valid scenario")
}

const ORD24: [f64; 4] = [5.0, 5.0, 8.0, 8.0];
const ORD25: [f64; 5] = [5.0, 5.0, 5.0, 8.0, 8.0];

fn label(s: &FadingScenario) -> String {
    format!("{}-L{}-N{}", s.name(), s.branches(), s.combined_branches())
}

/// Turn an error into a failed check.
fn guard(name: String, f: impl FnOnce() -> Result<Vec<Check>, String>) -> Vec<Check> {
    f().unwrap_or_else(|e| vec![Check::failed(name, e)])
}

fn factor(a: f64, b: f64) -> f64 {
    (a / b).max(b / a)
}

fn criterion_1() -> Vec<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let l = rng.random_range(1..=6);
        let means: Vec<f64> = (0..l).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
        // the partial-fraction oracle needs separated means
        let separated =
            means.iter().enumerate().all(|(i, a)| means[..i].iter().all(|b| (a - b).abs() > 0.05 * a.max(*b)));
        if !separated {
            continue;
        }
        let total: f64 = means.iter().sum();
        let t = total * 10f64.powf(rng.random_range(-4.0..50f64.log10()));
        let reference = hypoexp_reference(&means, t);
        let v = hypoexp_cdf(&means, t).unwrap_or(f64::NAN);
        worst = worst.max(((v - reference.value) / reference.value).abs());
        n += 1;
    }
    let mut checks = vec![Check::at_most("c1.hypoexp_cdf.max_rel_err", worst, 1e-10)];

    let mut marcum = 0.0f64;
    for mu in 1..=5 {
        for a in [0.0, 0.3, 1.0, 2.5, 5.0, 9.0] {
            for b in [0.05, 0.5, 1.0, 2.0, 4.0, 7.0, 12.0] {
                let v = marcum_q(mu, a, b).unwrap_or(f64::NAN);
                marcum = marcum.max((v - marcum_q_poisson_mixture(mu, a, b)).abs());
            }
        }
    }
    checks.push(Check::at_most("c1.marcum_q.max_abs_err", marcum, 1e-10));

    // absolute error where I_ν is O(10³) at most; relative beyond that,
    // where one ulp already exceeds 1e−10
    let (mut abs_err, mut rel_err) = (0.0f64, 0.0f64);
    for nu in 0..=8 {
        for i in 0..=40 {
            let x = 0.25 * i as f64;
            let oracle = bessel_i_series(nu, x, 200);
            abs_err = abs_err.max((bessel_i(nu, x).unwrap_or(f64::NAN) - oracle).abs());
        }
        for x in [12.0, 15.0, 20.0, 35.0, 49.5, 50.5, 75.0, 100.0, 150.0] {
            let oracle = bessel_i_series(nu, x, 600);
            rel_err = rel_err.max(((bessel_i(nu, x).unwrap_or(f64::NAN) - oracle) / oracle).abs());
        }
    }
    checks.push(Check::at_most("c1.bessel_i.max_abs_err_x_le_10", abs_err, 1e-10));
    checks.push(Check::at_most("c1.bessel_i.max_rel_err_x_gt_10", rel_err, 1e-10));
    checks.push(Check::at_most("c1.runtime_s", start.elapsed().as_secs_f64(), 10.0));
    checks
}

/// Thresholds at which the truncation probability is of order 10⁻².
fn criterion_2_cases() -> Vec<(FadingScenario, f64)> {
    vec![
        (rayleigh(4), 5.0),
        (rayleigh(5), 6.0),
        (rayleigh(6), 7.0),
        (corr(4), 4.0),
        (corr(5), 5.0),
        (corr(6), 5.0),
        (rice(3.0, 4), 7.0),
        (ordered(&ORD24, 2), 3.0),
        (ordered(&ORD25, 2), 4.0),
    ]
}

fn criterion_2(s: &Settings) -> Vec<Check> {
    let start = Instant::now();
    let m = 100_000_000;
    let mut checks = Vec::new();
    for (i, (scenario, th)) in criterion_2_cases().into_iter().enumerate() {
        let name = format!("c2.{}.z", label(&scenario));
        checks.extend(guard(name.clone(), || {
            let g0 = g0_at(&scenario, th);
            let p_tilde = mrc_outage(&scenario, g0).map_err(|e| e.to_string())?;
            let event = match scenario {
                FadingScenario::OrderedInidRayleigh { .. } => McEvent::OrderedPartialSum,
                _ => McEvent::MrcSum,
            };
            let (p, _) = mc_high_effort(&scenario, event, g0, &run(m, 200 + i as u64, s)).map_err(|e| e.to_string())?;
            // standard error under the closed-form value
            let se = (p_tilde * (1.0 - p_tilde) / m as f64).sqrt();
            Ok(vec![Check::at_most(name, (p - p_tilde).abs() / se, 3.0)])
        }));
    }
    checks.push(Check::at_most("c2.runtime_s", start.elapsed().as_secs_f64(), 300.0));
    checks
}

fn criterion_3(s: &Settings) -> Vec<Check> {
    let start = Instant::now();
    let th = -5.0;
    let mut checks = Vec::new();
    let cases = [rayleigh(2), corr(2), rice(3.0, 2), ordered(&[5.0, 8.0], 2), ordered(&[5.0, 8.0], 1)];
    for (i, scenario) in cases.into_iter().enumerate() {
        let name = format!("c3.{}.z", label(&scenario));
        checks.extend(guard(name.clone(), || {
            let g0 = g0_at(&scenario, th);
            let (exact, bound) = match &scenario {
                // only the larger envelope is combined: both must stay below γ₀
                FadingScenario::OrderedInidRayleigh { omegas, selected: 1 } => (box_probability(omegas, g0), 0.0),
                _ => {
                    let q = quad_event_probability(&scenario, QuadratureSpec::new(Region::Simplex, 2), g0)
                        .map_err(|e| e.to_string())?;
                    if !q.tolerance_reached {
                        return Err(format!("quadrature tolerance not reached: {q:?}"));
                    }
                    (q.value, q.error_bound)
                }
            };
            let problem = OutageProblem::new(scenario.clone(), g0).map_err(|e| e.to_string())?;
            let r = estimate_sphere_is(&problem, &run(1_000_000, 300 + i as u64, s)).map_err(|e| e.to_string())?;
            // excess deviation in standard errors; an exact estimate has none
            let excess = ((r.p_hat - exact).abs() - bound - 1e-12 * exact).max(0.0);
            let z = if excess == 0.0 { 0.0 } else { excess / r.std_err };
            Ok(vec![Check::at_most(name, z, 3.0)])
        }));
    }
    checks.push(Check::at_most("c3.runtime_s", start.elapsed().as_secs_f64(), 60.0));
    checks
}

/// Thresholds where the outage probability is close to 10⁻².
pub fn moderate_cases() -> Vec<(FadingScenario, f64)> {
    vec![
        (rayleigh(4), 9.5),
        (corr(4), 8.3),
        (FadingScenario::iid_rice(1.0, db(10.0), 2).expect("valid scenario"), 3.5),
        (ordered(&ORD24, 2), 5.5),
    ]
}

fn criterion_4(s: &Settings) -> Vec<Check> {
    let mut checks = Vec::new();
    for (scenario, th) in moderate_cases() {
        let name = format!("c4.{}", label(&scenario));
        checks.extend(guard(name.clone(), || {
            let problem = OutageProblem::new(scenario.clone(), g0_at(&scenario, th)).map_err(|e| e.to_string())?;
            let sampler = SphereSampler::new(&problem.scenario, problem.g0).map_err(|e| e.to_string())?;
            let (mut overlaps, mut p_sum) = (0u32, 0.0);
            for rep in 0..20 {
                let spec = run(100_000, 1000 + rep, s);
                let n = estimate_naive(&problem, &spec).map_err(|e| e.to_string())?;
                let i = estimate_sphere_is_with(&sampler, scenario.combined_branches(), &spec)
                    .map_err(|e| e.to_string())?;
                let (nh, ih) = (n.half_width(DEFAULT_CONFIDENCE), i.half_width(DEFAULT_CONFIDENCE));
                overlaps += (n.p_hat - nh <= i.p_hat + ih && i.p_hat - ih <= n.p_hat + nh) as u32;
                p_sum += n.p_hat;
            }
            Ok(vec![
                Check::at_most(format!("{name}.p_factor_from_1e-2"), factor(p_sum / 20.0, 1e-2), 2.0),
                Check::at_least(format!("{name}.overlaps_of_20"), overlaps as f64, 17.0),
            ])
        }));
    }
    checks
}

fn criterion_5(s: &Settings) -> Vec<Check> {
    let start = Instant::now();
    let mut checks = guard("c5".into(), || {
        let rep = efficiency_report(&rayleigh(4), ESN0_DB, &[-9.0], &run(1_000_000, 500, s), 0.05, DEFAULT_CONFIDENCE)
            .map_err(|e| e.to_string())?;
        let row = &rep.rows[0];
        let naive = row.runs_naive.ok_or("no hits in the sphere-IS run")? as f64;
        let sphere = row.runs_sphere_is.ok_or("no hits in the sphere-IS run")? as f64;
        Ok(vec![
            Check::at_most("c5.runs_naive.factor_from_1.5e12", factor(naive, 1.5e12), 3.0),
            Check::at_most("c5.runs_sphere_is.factor_from_1.5e5", factor(sphere, 1.5e5), 3.0),
        ])
    });
    checks.push(Check::at_most("c5.runtime_s", start.elapsed().as_secs_f64(), 120.0));
    checks
}

fn criterion_6(s: &Settings) -> Vec<Check> {
    let mut checks = Vec::new();
    for (scenario, th, anchor) in [(ordered(&ORD24, 2), -13.0, 8.0), (ordered(&ORD25, 2), -9.0, 15.0)] {
        let name = format!("c6.{}.box_over_sphere_factor_from_{anchor}", label(&scenario));
        checks.extend(guard(name.clone(), || {
            let rep = efficiency_report(&scenario, ESN0_DB, &[th], &run(1_000_000, 600, s), 0.05, DEFAULT_CONFIDENCE)
                .map_err(|e| e.to_string())?;
            let row = &rep.rows[0];
            let (b, sp) = (row.runs_box_is.ok_or("no hits")?, row.runs_sphere_is.ok_or("no hits")?);
            Ok(vec![Check::at_most(name, factor(b as f64 / sp as f64, anchor), 2.0)])
        }));
    }
    checks
}

fn grid(start: f64, stop: f64) -> Vec<f64> {
    let n = (stop - start).round() as usize;
    (0..=n).map(|i| start + i as f64).collect()
}

fn criterion_7(s: &Settings) -> Vec<Check> {
    // the paper's grids are [−9, 1] dB (ordered [−13, 1], Rice [−9, −5]),
    // extended 4 dB downwards
    let cases = vec![
        (rayleigh(4), grid(-13.0, 1.0)),
        (rayleigh(5), grid(-13.0, 1.0)),
        (rayleigh(6), grid(-13.0, 1.0)),
        (corr(4), grid(-13.0, 1.0)),
        (corr(5), grid(-13.0, 1.0)),
        (corr(6), grid(-13.0, 1.0)),
        (rice(3.0, 4), grid(-13.0, -5.0)),
        (ordered(&ORD24, 2), grid(-17.0, 1.0)),
        (ordered(&ORD25, 2), grid(-17.0, 1.0)),
    ];
    let mut checks = Vec::new();
    for (scenario, grid) in cases {
        let name = format!("c7.{}", label(&scenario));
        checks.extend(guard(name.clone(), || {
            let rep = efficiency_report(&scenario, ESN0_DB, &grid, &run(1_000_000, 700, s), 0.05, DEFAULT_CONFIDENCE)
                .map_err(|e| e.to_string())?;
            let ratios: Vec<f64> = rep.rows.iter().map(|r| r.p_tilde / r.p_estimate).collect();
            let k = match scenario {
                FadingScenario::OrderedInidRayleigh { selected, .. } => selected,
                _ => scenario.branches(),
            } as i32;
            let limit = (k as f64).powi(2 * scenario.branches() as i32);
            let (last, prev) = (ratios[ratios.len() - 1], ratios[ratios.len() - 2]);
            Ok(vec![
                Check::at_most(format!("{name}.max_ratio"), ratios.iter().cloned().fold(0.0, f64::max), limit),
                Check::at_most(format!("{name}.smallest_threshold_ratio"), last, limit),
                Check::at_most(format!("{name}.last_step_factor"), factor(last, prev), 2.0),
            ])
        }));
    }
    // small-argument anchor of the Rice argument
    let mut worst = 0.0f64;
    for (k, omega) in [(3.0, db(10.0)), (1.0, 1.0), (0.0, 2.0)] {
        let g0 = (1e-4 * omega).sqrt();
        let cdf = mrc_outage_iid_rice(k, omega, 1, g0).unwrap_or(f64::NAN);
        let limit = (k + 1.0) * (-k).exp() / omega;
        worst = worst.max((cdf / (g0 * g0) / limit - 1.0).abs());
    }
    checks.push(Check::at_most("c7.rice_small_argument.rel_dev", worst, 0.01));
    checks
}

/// The four sampler parameter sets with the smallest scale of each.
fn sampler_cases() -> Vec<(FadingScenario, f64, f64)> {
    vec![
        (rayleigh(4), -9.0, db(10.0)),
        (corr(4), -9.0, 2.0 * 5.0),
        (rice(3.0, 4), -9.0, db(10.0)),
        (ordered(&ORD24, 2), -13.0, db(5.0)),
    ]
}

fn criterion_8() -> Vec<Check> {
    let mut checks = Vec::new();
    for (i, (scenario, th, min_scale)) in sampler_cases().into_iter().enumerate() {
        let name = format!("c8.{}", label(&scenario));
        checks.extend(guard(name.clone(), || {
            let g0 = g0_at(&scenario, th);
            let sampler = SphereSampler::new(&scenario, g0).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(800 + i as u64);
            let mut buf = vec![0.0; scenario.branches()];
            let (n_sel, t) = (scenario.combined_branches(), g0 * g0);
            let mut violations = 0u32;
            for _ in 0..100_000 {
                sampler.sample_into(&mut rng, &mut buf).map_err(|e| e.to_string())?;
                let inside = if sampler.is_ordered() {
                    buf[..n_sel].iter().sum::<f64>() <= t && buf.windows(2).all(|w| w[0] >= w[1])
                } else {
                    buf.iter().map(|v| v * v).sum::<f64>() <= t && buf.iter().all(|&v| v >= 0.0)
                };
                violations += !inside as u32;
            }
            let perms = sampler.table().map_or(1, |t| t.len());
            let mut outside = 0u32;
            for _ in 0..100_000 {
                fill_uniform_simplex(&mut rng, &mut buf);
                let a = sampler.acceptance_probability(&buf, rng.random_range(0..perms));
                outside += !(a > 0.0 && a <= 1.0) as u32;
            }
            let small_g0 = (0.01 * min_scale).sqrt();
            let problem = OutageProblem::new(scenario.clone(), small_g0).map_err(|e| e.to_string())?;
            let est =
                estimate_sphere_is(&problem, &RunSpec::new(100_000, 810 + i as u64)).map_err(|e| e.to_string())?;
            let rate = est.rejection.map_or(0.0, |r| r.acceptance_rate());
            Ok(vec![
                Check::at_most(format!("{name}.sphere_violations"), violations as f64, 0.0),
                Check::at_most(format!("{name}.acceptance_outside_unit_interval"), outside as f64, 0.0),
                Check::at_least(format!("{name}.small_g0_acceptance_rate"), rate, 0.9),
            ])
        }));
    }
    checks
}

fn csv_bytes(kind: RunKind, args: RunArgs) -> Result<Vec<u8>, String> {
    let cfg = RunConfig::resolve(kind, args).map_err(|e| e.to_string())?;
    let rows = run_rows(&cfg).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows).map_err(|e| e.to_string())?;
    Ok(buf)
}

fn criterion_9() -> Vec<Check> {
    let base = RunArgs { samples: Some(20_000), seed: Some(9), ..Default::default() };
    let configs = [
        (
            "sweep-inid-rayleigh",
            RunKind::Sweep,
            RunArgs {
                scenario: Some(ScenarioKind::InidRayleigh),
                omega_db: vec![10.0],
                branches: vec![4],
                gamma_grid: Some("-9:-5:2".into()),
                method: vec!["naive".into(), "sphere-is".into(), "box-is".into()],
                ..base.clone()
            },
        ),
        (
            "efficiency-ordered-rayleigh",
            RunKind::Efficiency,
            RunArgs {
                scenario: Some(ScenarioKind::Ordered),
                omega_db: ORD24.to_vec(),
                select_n: Some(2),
                gamma_grid: Some("-13:-9:2".into()),
                ..base.clone()
            },
        ),
        (
            "estimate-corr-rayleigh",
            RunKind::Estimate,
            RunArgs {
                scenario: Some(ScenarioKind::CorrRayleigh),
                sigma: Some(5f64.sqrt()),
                rho: Some(0.5),
                branches: vec![4],
                gamma_th_db: Some(-5.0),
                ..base.clone()
            },
        ),
    ];
    let mut checks = Vec::new();
    for (name, kind, args) in configs {
        checks.extend(guard(format!("c9.{name}"), || {
            let with = |chunks| csv_bytes(kind, RunArgs { chunks: Some(chunks), ..args.clone() });
            let first = with(1)?;
            let differing = [with(1)?, with(4)?].iter().filter(|b| **b != first).count();
            Ok(vec![Check::at_most(format!("c9.{name}.differing_outputs"), differing as f64, 0.0)])
        }));
    }
    checks
}
