//! Fading scenarios, threshold conversion and naive (untruncated) samplers.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{domain, Error, Result};

/// Largest supported number of diversity branches.
pub const MAX_BRANCHES: usize = 16;
/// Largest supported exponential-correlation coefficient.
pub const MAX_RHO: f64 = 0.99;

/// Channel model and its parameters. All power-like quantities are linear.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingScenario {
    /// Independent Rayleigh envelopes with `Ωᵢ = E[Rᵢ²]`.
    InidRayleigh { omegas: Vec<f64> },
    /// `Rᵢ = √(Xᵢ² + Yᵢ²)` with `X`, `Y` independent Gaussian vectors of
    /// covariance `σ²ρ^{|i−j|}`.
    ExpCorrRayleigh { sigma: f64, rho: f64, branches: usize },
    /// i.i.d. Rice envelopes with Rice factor `k` and `Ω = E[Rᵢ²]`.
    IidRice { k: f64, omega: f64, branches: usize },
    /// Independent Rayleigh envelopes of which the `selected` largest are
    /// combined (GSC/EGC).
    OrderedInidRayleigh { omegas: Vec<f64>, selected: usize },
}

fn check_branches(l: usize) -> Result<()> {
    if l == 0 || l > MAX_BRANCHES {
        return Err(domain(format!("branch count must be in 1..={MAX_BRANCHES}, got {l}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl FadingScenario {
    pub fn inid_rayleigh(omegas: Vec<f64>) -> Result<Self> {
        let s = Self::InidRayleigh { omegas };
        s.validate()?;
        Ok(s)
    }

    pub fn exp_corr_rayleigh(sigma: f64, rho: f64, branches: usize) -> Result<Self> {
        let s = Self::ExpCorrRayleigh { sigma, rho, branches };
        s.validate()?;
        Ok(s)
    }

    pub fn iid_rice(k: f64, omega: f64, branches: usize) -> Result<Self> {
        let s = Self::IidRice { k, omega, branches };
        s.validate()?;
        Ok(s)
    }

    pub fn ordered_inid_rayleigh(omegas: Vec<f64>, selected: usize) -> Result<Self> {
        let s = Self::OrderedInidRayleigh { omegas, selected };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::InidRayleigh { omegas } => {
                check_branches(omegas.len())?;
                omegas.iter().try_for_each(|&o| check_positive("omega", o))
            }
            Self::ExpCorrRayleigh { sigma, rho, branches } => {
                check_branches(*branches)?;
                check_positive("sigma", *sigma)?;
                if !(rho.is_finite() && (0.0..=MAX_RHO).contains(rho)) {
                    return Err(domain(format!("rho must lie in [0, {MAX_RHO}], got {rho}")));
                }
                Ok(())
            }
            Self::IidRice { k, omega, branches } => {
                check_branches(*branches)?;
                check_positive("omega", *omega)?;
                if !(k.is_finite() && *k >= 0.0) {
                    return Err(domain(format!("Rice factor must be finite and non-negative, got {k}")));
                }
                Ok(())
            }
            Self::OrderedInidRayleigh { omegas, selected } => {
                check_branches(omegas.len())?;
                omegas.iter().try_for_each(|&o| check_positive("omega", o))?;
                if *selected == 0 || *selected > omegas.len() {
                    return Err(domain(format!(
                        "selected branch count must be in 1..={}, got {selected}",
                        omegas.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Number of diversity branches `L`.
    pub fn branches(&self) -> usize {
        match self {
            Self::InidRayleigh { omegas } | Self::OrderedInidRayleigh { omegas, .. } => omegas.len(),
            Self::ExpCorrRayleigh { branches, .. } | Self::IidRice { branches, .. } => *branches,
        }
    }

    /// Number of envelopes entering the combiner: `N` for GSC/EGC, else `L`.
    pub fn combined_branches(&self) -> usize {
        match self {
            Self::OrderedInidRayleigh { selected, .. } => *selected,
            other => other.branches(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::InidRayleigh { .. } => "inid-rayleigh",
            Self::ExpCorrRayleigh { .. } => "corr-rayleigh",
            Self::IidRice { .. } => "iid-rice",
            Self::OrderedInidRayleigh { .. } => "ordered-rayleigh",
        }
    }
}

/// SNR threshold and transmit SNR per symbol, both in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub gamma_th_db: f64,
    pub es_over_n0_db: f64,
}

impl ThresholdSpec {
    pub fn new(gamma_th_db: f64, es_over_n0_db: f64) -> Self {
        Self { gamma_th_db, es_over_n0_db }
    }
}

/// `10^{dB/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Envelope-domain threshold `γ₀ = √(γ_th · n / (E_s/N₀))`, with `n` the
/// number of combined branches.
pub fn gamma0(spec: ThresholdSpec, combined_branches: usize) -> Result<f64> {
    if !spec.gamma_th_db.is_finite() || !spec.es_over_n0_db.is_finite() {
        return Err(domain("threshold and transmit SNR must be finite"));
    }
    if combined_branches == 0 {
        return Err(domain("combined branch count must be positive"));
    }
    // exponent in the log domain keeps extreme dB values representable
    let ln10 = std::f64::consts::LN_10;
    let ln = 0.5 * ((spec.gamma_th_db - spec.es_over_n0_db) / 10.0 * ln10 + (combined_branches as f64).ln());
    Ok(ln.exp())
}

/// One draw of the `L` fading envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSample {
    pub values: Vec<f64>,
}

/// A scenario with its per-draw constants precomputed.
#[derive(Debug, Clone)]
pub struct NaiveSampler {
    kind: NaiveKind,
    branches: usize,
}

#[derive(Debug, Clone)]
enum NaiveKind {
    Rayleigh { omegas: Vec<f64>, sorted: bool },
    Correlated { sigma: f64, rho: f64, innovation: f64 },
    Rice { los: f64, diffuse: f64 },
}

impl NaiveSampler {
    pub fn new(scenario: &FadingScenario) -> Result<Self> {
        scenario.validate()?;
        let kind = match scenario {
            FadingScenario::InidRayleigh { omegas } => NaiveKind::Rayleigh { omegas: omegas.clone(), sorted: false },
            FadingScenario::OrderedInidRayleigh { omegas, .. } => {
                NaiveKind::Rayleigh { omegas: omegas.clone(), sorted: true }
            }
            &FadingScenario::ExpCorrRayleigh { sigma, rho, .. } => {
                NaiveKind::Correlated { sigma, rho, innovation: sigma * (1.0 - rho * rho).sqrt() }
            }
            &FadingScenario::IidRice { k, omega, .. } => {
                NaiveKind::Rice { los: (k * omega / (k + 1.0)).sqrt(), diffuse: (omega / (2.0 * (k + 1.0))).sqrt() }
            }
        };
        Ok(Self { kind, branches: scenario.branches() })
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    /// Fill `out` (length `L`) with one untruncated draw. The ordered
    /// scenario returns envelopes sorted in descending order.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.branches);
        match &self.kind {
            NaiveKind::Rayleigh { omegas, sorted } => {
                for (r, &omega) in out.iter_mut().zip(omegas) {
                    let e: f64 = rng.sample(Exp1);
                    *r = (omega * e).sqrt();
                }
                if *sorted {
                    sort_descending(out);
                }
            }
            &NaiveKind::Correlated { sigma, rho, innovation } => {
                // in-phase components into `out`, quadrature ones on the fly
                ar1_gaussian_into(rng, sigma, rho, innovation, out);
                let mut y = 0.0;
                for (i, r) in out.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    y = if i == 0 { sigma * z } else { rho * y + innovation * z };
                    *r = r.hypot(y);
                }
            }
            &NaiveKind::Rice { los, diffuse } => {
                for r in out.iter_mut() {
                    let zx: f64 = rng.sample(StandardNormal);
                    let zy: f64 = rng.sample(StandardNormal);
                    *r = (los + diffuse * zx).hypot(diffuse * zy);
                }
            }
        }
    }
}

fn ar1_gaussian_into<R: Rng + ?Sized>(rng: &mut R, sigma: f64, rho: f64, innovation: f64, out: &mut [f64]) {
    let mut x = 0.0;
    for (i, v) in out.iter_mut().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        x = if i == 0 { sigma * z } else { rho * x + innovation * z };
        *v = x;
    }
}

/// Zero-mean Gaussian vector with covariance `σ²ρ^{|i−j|}` by the
/// recursion `X₁ = σZ₁`, `Xᵢ = ρXᵢ₋₁ + σ√(1−ρ²)Zᵢ`.
pub fn sample_exp_corr_gaussian<R: Rng + ?Sized>(sigma: f64, rho: f64, rng: &mut R, out: &mut [f64]) {
    ar1_gaussian_into(rng, sigma, rho, sigma * (1.0 - rho * rho).sqrt(), out);
}

pub(crate) fn sort_descending(v: &mut [f64]) {
    v.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// One draw from the untruncated joint law of `scenario`.
pub fn sample_naive<R: Rng + ?Sized>(scenario: &FadingScenario, rng: &mut R) -> Result<EnvelopeSample> {
    let sampler = NaiveSampler::new(scenario)?;
    let mut values = vec![0.0; sampler.branches()];
    sampler.sample_into(rng, &mut values);
    Ok(EnvelopeSample { values })
}

/// Eigenvalues of `Σᵢⱼ = σ²ρ^{|i−j|}` in non-increasing order.
pub fn exp_corr_eigenvalues(sigma: f64, rho: f64, branches: usize) -> Result<Vec<f64>> {
    FadingScenario::ExpCorrRayleigh { sigma, rho, branches }.validate()?;
    let n = branches;
    let s2 = sigma * sigma;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = s2 * rho.powi((i as i32 - j as i32).abs());
        }
    }
    let mut eig = jacobi_eigenvalues(&mut a, n, 1e-13, 100)?;
    eig.sort_unstable_by(|a, b| b.total_cmp(a));
    if let Some(&min) = eig.last() {
        if min <= 0.0 {
            return Err(domain(format!("covariance is not positive definite (eigenvalue {min})")));
        }
    }
    Ok(eig)
}

/// Cyclic Jacobi rotations on a symmetric row-major matrix, which is
/// destroyed. Converged once the off-diagonal Frobenius norm is below
/// `tol` times the Frobenius norm of the input.
fn jacobi_eigenvalues(a: &mut [f64], n: usize, tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
    let total: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..max_sweeps {
        if off(a) <= tol * total {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Convergence { method: "cyclic Jacobi", iterations: max_sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma0_trivial_values() {
        assert!((gamma0(ThresholdSpec::new(0.0, 0.0), 4).unwrap() - 2.0).abs() < 1e-15);
        assert!((gamma0(ThresholdSpec::new(0.0, 0.0), 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma0_log_domain_value() {
        let expected = 10f64.powf((-9.0 - 1.0) / 20.0) * 2.0;
        let got = gamma0(ThresholdSpec::new(-9.0, 1.0), 4).unwrap();
        assert!((got - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn gamma0_rejects_non_finite() {
        assert!(gamma0(ThresholdSpec::new(f64::NAN, 1.0), 4).is_err());
        assert!(gamma0(ThresholdSpec::new(1.0, f64::INFINITY), 4).is_err());
        assert!(gamma0(ThresholdSpec::new(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn scenario_validation() {
        assert!(FadingScenario::inid_rayleigh(vec![]).is_err());
        assert!(FadingScenario::inid_rayleigh(vec![1.0; 17]).is_err());
        assert!(FadingScenario::inid_rayleigh(vec![1.0, 0.0]).is_err());
        assert!(FadingScenario::exp_corr_rayleigh(1.0, 1.0, 4).is_err());
        assert!(FadingScenario::exp_corr_rayleigh(1.0, -0.1, 4).is_err());
        assert!(FadingScenario::exp_corr_rayleigh(0.0, 0.5, 4).is_err());
        assert!(FadingScenario::iid_rice(-1.0, 1.0, 2).is_err());
        assert!(FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.0], 3).is_err());
        assert!(FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.0], 0).is_err());
        let s = FadingScenario::ordered_inid_rayleigh(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(s.branches(), 3);
        assert_eq!(s.combined_branches(), 2);
    }

    #[test]
    fn eigenvalues_trivial_cases() {
        let e = exp_corr_eigenvalues(1.5, 0.0, 5).unwrap();
        assert!(e.iter().all(|v| (v - 2.25).abs() < 1e-14));
        let e = exp_corr_eigenvalues(2.0, 0.3, 2).unwrap();
        assert!((e[0] - 4.0 * 1.3).abs() < 1e-13);
        assert!((e[1] - 4.0 * 0.7).abs() < 1e-13);
    }

    #[test]
    fn eigenvalue_trace_and_order() {
        for (rho, l) in [(0.5, 4), (0.9, 16), (0.99, 7), (0.2, 1)] {
            let e = exp_corr_eigenvalues(5f64.sqrt(), rho, l).unwrap();
            let trace: f64 = e.iter().sum();
            assert!((trace - 5.0 * l as f64).abs() < 1e-12 * 5.0 * l as f64);
            assert!(e.windows(2).all(|w| w[0] >= w[1]));
            assert!(e.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn ordered_naive_samples_are_sorted() {
        let s = FadingScenario::ordered_inid_rayleigh(vec![1.0, 5.0, 2.0, 9.0], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let v = sample_naive(&s, &mut rng).unwrap().values;
            assert!(v.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
