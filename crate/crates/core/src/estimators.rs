//! Outage-probability estimators and their efficiency metrics.
//!
//! * naive Monte Carlo over the untruncated law;
//! * sphere-truncation importance sampling, whose likelihood ratio is the
//!   constant `P̃` on the truncation set;
//! * box-truncation importance sampling (`max rᵢ ≤ γ₀`), the baseline for
//!   the independent and GSC Rayleigh scenarios.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::engine::{run_blocks, RunSpec, StreamTag, Tally};
use crate::error::{domain, Error, Result};
use crate::mrc_oracle::box_probability;
use crate::scenarios::{gamma0, sort_descending, FadingScenario, NaiveSampler, ThresholdSpec};
use crate::sphere_sampler::{RejectionStats, SphereSampler};

/// 95% normal quantile.
pub const DEFAULT_CONFIDENCE: f64 = 1.96;
pub const DEFAULT_TARGET_REL_ERR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Naive,
    SphereIs,
    BoxIs,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::SphereIs => "sphere_is",
            Method::BoxIs => "box_is",
        }
    }

    pub fn supports(&self, scenario: &FadingScenario) -> bool {
        match self {
            Method::BoxIs => {
                matches!(scenario, FadingScenario::InidRayleigh { .. } | FadingScenario::OrderedInidRayleigh { .. })
            }
            _ => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Method::Naive),
            "sphere_is" | "sphere-is" => Ok(Method::SphereIs),
            "box_is" | "box-is" => Ok(Method::BoxIs),
            other => Err(domain(format!("unknown method {other:?} (expected naive, sphere-is or box-is)"))),
        }
    }
}

/// A scenario together with its envelope-domain threshold `γ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageProblem {
    pub scenario: FadingScenario,
    pub g0: f64,
}

impl OutageProblem {
    pub fn new(scenario: FadingScenario, g0: f64) -> Result<Self> {
        scenario.validate()?;
        if !(g0.is_finite() && g0 > 0.0) {
            return Err(domain(format!("gamma0 must be positive and finite, got {g0}")));
        }
        Ok(Self { scenario, g0 })
    }

    /// `γ₀` from the SNR threshold, using `N` combined branches for GSC.
    pub fn from_threshold(scenario: FadingScenario, threshold: ThresholdSpec) -> Result<Self> {
        let g0 = gamma0(threshold, scenario.combined_branches())?;
        Self::new(scenario, g0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub method: Method,
    pub p_hat: f64,
    pub std_err: f64,
    /// `C·std_err/p_hat`; `None` when `p_hat = 0`.
    pub rel_err: Option<f64>,
    pub samples: u64,
    /// Samples that landed in the outage event.
    pub hits: u64,
    /// Probability of the truncation set (IS methods).
    pub p_tilde: Option<f64>,
    pub rejection: Option<RejectionStats>,
    pub seed: u64,
    /// Random-stream blocks the run was decomposed into.
    pub blocks: u64,
}

impl EstimateResult {
    /// Fraction of samples inside the outage event.
    pub fn hit_fraction(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }

    /// Half-width of the `C`-level confidence interval.
    pub fn half_width(&self, confidence: f64) -> f64 {
        confidence * self.std_err
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct HitTally {
    hits: u64,
    proposals: u64,
}

impl Tally for HitTally {
    fn merge(self, o: Self) -> Self {
        Self { hits: self.hits + o.hits, proposals: self.proposals + o.proposals }
    }
}

fn egc_sum_below(envelopes: &[f64], g0: f64) -> bool {
    envelopes.iter().sum::<f64>() <= g0
}

fn finish(
    method: Method,
    run: &RunSpec,
    tally: HitTally,
    scale: Option<f64>,
    rejection: Option<RejectionStats>,
) -> EstimateResult {
    let m = run.samples as f64;
    let q = tally.hits as f64 / m;
    let factor = scale.unwrap_or(1.0);
    let p_hat = factor * q;
    let std_err = factor * (q * (1.0 - q) / m).sqrt();
    let rel_err = (p_hat > 0.0).then(|| DEFAULT_CONFIDENCE * std_err / p_hat);
    EstimateResult {
        method,
        p_hat,
        std_err,
        rel_err,
        samples: run.samples,
        hits: tally.hits,
        p_tilde: scale,
        rejection,
        seed: run.seed,
        blocks: run.blocks(),
    }
}

/// Plain Monte Carlo: fraction of untruncated draws with
/// `Σ Rᵢ ≤ γ₀` (GSC: the `N` largest envelopes).
pub fn estimate_naive(problem: &OutageProblem, run: &RunSpec) -> Result<EstimateResult> {
    let sampler = NaiveSampler::new(&problem.scenario)?;
    let n_sum = problem.scenario.combined_branches();
    let l = sampler.branches();
    let g0 = problem.g0;
    let tally = run_blocks(run, StreamTag::Naive, |rng, n| {
        let mut buf = vec![0.0; l];
        let mut hits = 0;
        for _ in 0..n {
            sampler.sample_into(rng, &mut buf);
            hits += egc_sum_below(&buf[..n_sum], g0) as u64;
        }
        Ok(HitTally { hits, proposals: 0 })
    })?;
    Ok(finish(Method::Naive, run, tally, None, None))
}

/// Sphere-truncation importance sampling: `P̃ ·` fraction of truncated
/// draws inside the outage event.
pub fn estimate_sphere_is(problem: &OutageProblem, run: &RunSpec) -> Result<EstimateResult> {
    let sampler = SphereSampler::new(&problem.scenario, problem.g0)?;
    estimate_sphere_is_with(&sampler, problem.scenario.combined_branches(), run)
}

/// Sphere-IS with a prepared sampler, so repeated runs at the same
/// `(scenario, γ₀)` reuse the closed-form `P̃`.
pub fn estimate_sphere_is_with(sampler: &SphereSampler, combined: usize, run: &RunSpec) -> Result<EstimateResult> {
    let l = sampler.branches();
    let g0 = sampler.g0();
    let ordered = sampler.is_ordered();
    let tally = run_blocks(run, StreamTag::SphereIs, |rng, n| {
        let mut buf = vec![0.0; l];
        let mut t = HitTally::default();
        for _ in 0..n {
            t.proposals += sampler.sample_into(rng, &mut buf)?;
            let hit = if ordered {
                buf[..combined].iter().map(|h| h.sqrt()).sum::<f64>() <= g0
            } else {
                egc_sum_below(&buf, g0)
            };
            t.hits += hit as u64;
        }
        Ok(t)
    })?;
    let rejection = RejectionStats { proposals: tally.proposals, accepted: run.samples };
    Ok(finish(Method::SphereIs, run, tally, Some(sampler.p_tilde()), Some(rejection)))
}

/// Box-truncation importance sampling with `S = {max rᵢ ≤ γ₀}`; each
/// envelope is drawn from its Rayleigh law truncated to `[0, γ₀]` by
/// inversion.
pub fn estimate_box_is(problem: &OutageProblem, run: &RunSpec) -> Result<EstimateResult> {
    let omegas = match &problem.scenario {
        FadingScenario::InidRayleigh { omegas } | FadingScenario::OrderedInidRayleigh { omegas, .. } => omegas,
        other => return Err(Error::Unsupported { method: "box_is", scenario: other.name() }),
    };
    let g0 = problem.g0;
    let ordered = matches!(problem.scenario, FadingScenario::OrderedInidRayleigh { .. });
    let n_sum = problem.scenario.combined_branches();
    let mass: Vec<f64> = omegas.iter().map(|o| -(-g0 * g0 / o).exp_m1()).collect();
    let p_box = box_probability(omegas, g0);
    let tally = run_blocks(run, StreamTag::BoxIs, |rng, n| {
        let mut buf = vec![0.0; omegas.len()];
        let mut hits = 0;
        for _ in 0..n {
            for ((r, o), c) in buf.iter_mut().zip(omegas).zip(&mass) {
                let u: f64 = rng.random();
                *r = (-o * (-u * c).ln_1p()).sqrt();
            }
            if ordered {
                sort_descending(&mut buf);
            }
            hits += egc_sum_below(&buf[..n_sum], g0) as u64;
        }
        Ok(HitTally { hits, proposals: 0 })
    })?;
    Ok(finish(Method::BoxIs, run, tally, Some(p_box), None))
}

pub fn estimate(method: Method, problem: &OutageProblem, run: &RunSpec) -> Result<EstimateResult> {
    match method {
        Method::Naive => estimate_naive(problem, run),
        Method::SphereIs => estimate_sphere_is(problem, run),
        Method::BoxIs => estimate_box_is(problem, run),
    }
}

/// Squared coefficient of variation of a truncation estimator,
/// `P̃/P − 1`.
pub fn cv_squared(p_tilde: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p_tilde <= 1.0 && p <= p_tilde * (1.0 + 1e-12)) {
        return Err(domain(format!("cv_squared needs 0 < p <= p_tilde <= 1, got p={p}, p_tilde={p_tilde}")));
    }
    Ok((p_tilde / p - 1.0).max(0.0))
}

fn runs_from(numerator: f64, target_eps: f64, confidence: f64) -> u64 {
    let m = (confidence * confidence * numerator / (target_eps * target_eps)).ceil();
    // saturating float-to-int conversion
    (m as u64).max(1)
}

fn check_target(target_eps: f64, confidence: f64) -> Result<()> {
    if !(target_eps > 0.0 && target_eps.is_finite() && confidence > 0.0 && confidence.is_finite()) {
        return Err(domain("target relative error and confidence constant must be positive"));
    }
    Ok(())
}

/// Smallest `M` with `C√(P(1−P))/(P√M) ≤ ε`.
pub fn required_runs_naive(p: f64, target_eps: f64, confidence: f64) -> Result<u64> {
    check_target(target_eps, confidence)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("required_runs_naive needs 0 < p <= 1, got {p}")));
    }
    Ok(runs_from((1.0 - p) / p, target_eps, confidence))
}

/// Smallest `M` with `C√(P̃/P − 1)/√M ≤ ε`.
pub fn required_runs_is(p: f64, p_tilde: f64, target_eps: f64, confidence: f64) -> Result<u64> {
    check_target(target_eps, confidence)?;
    Ok(runs_from(cv_squared(p_tilde, p)?, target_eps, confidence))
}

/// Smallest `M` with `C·cv/√M ≤ ε` for a given squared coefficient of
/// variation, e.g. an empirical one.
pub fn required_runs_from_cv2(cv2: f64, target_eps: f64, confidence: f64) -> Result<u64> {
    check_target(target_eps, confidence)?;
    if !(cv2 >= 0.0 && cv2.is_finite()) {
        return Err(domain(format!("squared coefficient of variation must be finite and non-negative, got {cv2}")));
    }
    Ok(runs_from(cv2, target_eps, confidence))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyRow {
    pub gamma_th_db: f64,
    pub gamma0: f64,
    /// Sphere-IS estimate of the outage probability.
    pub p_estimate: f64,
    pub p_std_err: f64,
    pub p_tilde: f64,
    /// Theoretical `P̃/P − 1` with the estimated `P`.
    pub cv_squared: f64,
    /// Sample version `(1 − q)/q` from the sphere-IS run.
    pub cv_squared_empirical: Option<f64>,
    pub runs_naive: Option<u64>,
    pub runs_sphere_is: Option<u64>,
    pub p_tilde_box: Option<f64>,
    pub runs_box_is: Option<u64>,
    pub acceptance_rate: f64,
    pub samples: u64,
    pub blocks: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub rows: Vec<EfficiencyRow>,
    pub target_rel_err: f64,
    pub confidence: f64,
}

/// Required runs per method over a threshold grid. `P` comes from a
/// sphere-IS run of `run.samples`; `P̃` and the box probability are exact.
pub fn efficiency_report(
    scenario: &FadingScenario,
    es_over_n0_db: f64,
    gamma_th_grid_db: &[f64],
    run: &RunSpec,
    target_rel_err: f64,
    confidence: f64,
) -> Result<EfficiencyReport> {
    check_target(target_rel_err, confidence)?;
    let with_box = Method::BoxIs.supports(scenario);
    let rows = gamma_th_grid_db
        .iter()
        .map(|&gamma_th_db| {
            let problem =
                OutageProblem::from_threshold(scenario.clone(), ThresholdSpec::new(gamma_th_db, es_over_n0_db))?;
            let est = estimate_sphere_is(&problem, run)?;
            let p_tilde = est.p_tilde.unwrap_or(0.0);
            let p = est.p_hat;
            let p_tilde_box = match &problem.scenario {
                FadingScenario::InidRayleigh { omegas } | FadingScenario::OrderedInidRayleigh { omegas, .. }
                    if with_box =>
                {
                    Some(box_probability(omegas, problem.g0))
                }
                _ => None,
            };
            let positive = p > 0.0;
            let q = est.hit_fraction();
            Ok(EfficiencyRow {
                gamma_th_db,
                gamma0: problem.g0,
                p_estimate: p,
                p_std_err: est.std_err,
                p_tilde,
                cv_squared: if positive { cv_squared(p_tilde, p)? } else { f64::INFINITY },
                cv_squared_empirical: positive.then(|| (1.0 - q) / q),
                runs_naive: if positive { Some(required_runs_naive(p, target_rel_err, confidence)?) } else { None },
                runs_sphere_is: if positive {
                    Some(required_runs_is(p, p_tilde, target_rel_err, confidence)?)
                } else {
                    None
                },
                runs_box_is: match p_tilde_box {
                    Some(pb) if positive => Some(required_runs_is(p, pb, target_rel_err, confidence)?),
                    _ => None,
                },
                p_tilde_box,
                acceptance_rate: est.rejection.map(|r| r.acceptance_rate()).unwrap_or(0.0),
                samples: est.samples,
                blocks: est.blocks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EfficiencyReport { rows, target_rel_err, confidence })
}
