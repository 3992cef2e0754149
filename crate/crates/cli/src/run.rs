//! `estimate`, `sweep` and `efficiency` runs.

use rarefall::estimators::{
    cv_squared, efficiency_report, estimate, required_runs_from_cv2, required_runs_is, required_runs_naive,
    EfficiencyRow, EstimateResult, DEFAULT_CONFIDENCE,
};
use rarefall::{FadingScenario, Method, OutageProblem, RunSpec, ThresholdSpec};

use crate::config::{CvForm, RunConfig, RunKind};
use crate::error::Result;
use crate::output::Row;

/// All CSV rows of a run, in (scenario, threshold, method) order.
pub fn run_rows(cfg: &RunConfig) -> Result<Vec<Row>> {
    let spec = RunSpec::new(cfg.samples, cfg.seed).with_lanes(cfg.chunks);
    let mut rows = Vec::new();
    for scenario in &cfg.scenarios {
        match cfg.kind {
            RunKind::Estimate | RunKind::Sweep => {
                for &th in &cfg.grid {
                    let problem = OutageProblem::from_threshold(scenario.clone(), ThresholdSpec::new(th, cfg.esn0_db))?;
                    for &method in &cfg.methods {
                        let r = estimate(method, &problem, &spec)?;
                        rows.push(estimate_row(&problem, th, &r, cfg.target_rel_err)?);
                    }
                }
            }
            RunKind::Efficiency => {
                let report =
                    efficiency_report(scenario, cfg.esn0_db, &cfg.grid, &spec, cfg.target_rel_err, DEFAULT_CONFIDENCE)?;
                for eff in &report.rows {
                    for &method in &cfg.methods {
                        rows.push(efficiency_row(scenario, eff, method, cfg)?);
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn estimate_row(problem: &OutageProblem, gamma_th_db: f64, r: &EstimateResult, target: f64) -> Result<Row> {
    let p = r.p_hat;
    let positive = p > 0.0;
    let (cv2, runs) = match (positive, r.p_tilde) {
        (false, _) => (None, None),
        (true, Some(pt)) => (Some(cv_squared(pt, p)?), Some(required_runs_is(p, pt, target, DEFAULT_CONFIDENCE)?)),
        (true, None) => (Some((1.0 - p) / p), Some(required_runs_naive(p, target, DEFAULT_CONFIDENCE)?)),
    };
    Ok(Row {
        scenario: problem.scenario.name(),
        branches: problem.scenario.branches(),
        combined: problem.scenario.combined_branches(),
        gamma_th_db,
        gamma0: problem.g0,
        method: r.method.as_str(),
        samples: r.samples,
        p_hat: p,
        std_err: r.std_err,
        rel_err: r.rel_err,
        p_tilde: r.p_tilde,
        cv2,
        runs_for_target: runs,
        accept_rate: r.rejection.map(|s| s.acceptance_rate()),
        seed: r.seed,
        chunks: r.blocks,
    })
}

fn efficiency_row(scenario: &FadingScenario, eff: &EfficiencyRow, method: Method, cfg: &RunConfig) -> Result<Row> {
    let p = eff.p_estimate;
    let positive = p > 0.0;
    let (p_tilde, cv2, runs) = match method {
        Method::Naive => (None, positive.then(|| (1.0 - p) / p), eff.runs_naive),
        Method::SphereIs => match cfg.cv_form {
            CvForm::Theoretical => (Some(eff.p_tilde), positive.then_some(eff.cv_squared), eff.runs_sphere_is),
            CvForm::Empirical => {
                let runs = eff
                    .cv_squared_empirical
                    .map(|c| required_runs_from_cv2(c, cfg.target_rel_err, DEFAULT_CONFIDENCE))
                    .transpose()?;
                (Some(eff.p_tilde), eff.cv_squared_empirical, runs)
            }
        },
        Method::BoxIs => {
            let cv2 = match eff.p_tilde_box {
                Some(pb) if positive => Some(cv_squared(pb, p)?),
                _ => None,
            };
            (eff.p_tilde_box, cv2, eff.runs_box_is)
        }
    };
    Ok(Row {
        scenario: scenario.name(),
        branches: scenario.branches(),
        combined: scenario.combined_branches(),
        gamma_th_db: eff.gamma_th_db,
        gamma0: eff.gamma0,
        method: method.as_str(),
        samples: eff.samples,
        p_hat: p,
        std_err: eff.p_std_err,
        rel_err: positive.then(|| DEFAULT_CONFIDENCE * eff.p_std_err / p),
        p_tilde,
        cv2,
        runs_for_target: runs,
        accept_rate: (method == Method::SphereIs).then_some(eff.acceptance_rate),
        seed: cfg.seed,
        chunks: eff.blocks,
    })
}
