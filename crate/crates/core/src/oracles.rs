//! Brute-force references used by the test suites and the `validate`
//! harness.
//!
//! Nothing here calls into the routes it is meant to check: the series use
//! their own factorials and summation, the quadrature evaluates the joint
//! densities directly, and the eigenvalue oracle bisects on matrix inertia
//! instead of rotating.

use crate::engine::{run_blocks, RunSpec, StreamTag, Tally};
use crate::error::{domain, Error, Result};
use crate::scenarios::{FadingScenario, NaiveSampler};

/// Compensated (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn ln_fact_by_sum(n: u64) -> f64 {
    let mut s = CompensatedSum::default();
    for j in 2..=n {
        s.add((j as f64).ln());
    }
    s.value()
}

// ---------------------------------------------------------------------------
// Series oracles
// ---------------------------------------------------------------------------

/// `I_ν(x) = Σ_{k<terms} (x/2)^{2k+ν} / (k!(k+ν)!)`, every term evaluated
/// from scratch and accumulated with compensation.
pub fn bessel_i_series(nu: u32, x: f64, terms: usize) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let ln_half = (0.5 * x).ln();
    let mut s = CompensatedSum::default();
    for k in 0..terms as u64 {
        let ln_t = (2 * k + nu as u64) as f64 * ln_half - ln_fact_by_sum(k) - ln_fact_by_sum(k + nu as u64);
        s.add(ln_t.exp());
    }
    s.value()
}

fn poisson_weight(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_fact_by_sum(k)).exp()
}

/// Upper regularized incomplete gamma of integer order,
/// `Γ(n, x)/Γ(n) = e^{−x} Σ_{j<n} x^j/j!`.
pub fn upper_gamma_regularized_int(n: u64, x: f64) -> f64 {
    let mut s = CompensatedSum::default();
    for j in 0..n {
        s.add(poisson_weight(j, x));
    }
    s.value()
}

/// Lower regularized incomplete gamma of integer order by its series,
/// `P(n, x) = e^{−x} Σ_{j≥n} x^j/j!`, stopped when the terms fall below
/// `1e−18` relative to the sum.
pub fn lower_gamma_regularized_int(n: u64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut s = CompensatedSum::default();
    let mut j = n;
    loop {
        let t = poisson_weight(j, x);
        s.add(t);
        if (j as f64) > x && t <= 1e-18 * s.value() {
            break;
        }
        j += 1;
        if j > n + 100_000 {
            break;
        }
    }
    s.value()
}

fn poisson_mixture(mu: u32, a: f64, b: f64, lower: bool) -> f64 {
    let lambda = 0.5 * a * a;
    let x = 0.5 * b * b;
    let mut s = CompensatedSum::default();
    let mut k = 0u64;
    loop {
        let w = poisson_weight(k, lambda);
        let g = if lower {
            lower_gamma_regularized_int(mu as u64 + k, x)
        } else {
            upper_gamma_regularized_int(mu as u64 + k, x)
        };
        s.add(w * g);
        // beyond the mode the remaining Poisson mass is below w·(k+1)/(k+1−λ)
        if (k as f64) > lambda + 1.0 {
            let tail = w * (k as f64 + 1.0) / (k as f64 + 1.0 - lambda);
            if tail < 1e-16 * s.value().max(1e-300) || tail < 1e-300 {
                break;
            }
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    s.value()
}

/// `Q_μ(a,b) = Σ_k e^{−a²/2}(a²/2)^k/k! · Γ(μ+k, b²/2)/Γ(μ+k)`.
pub fn marcum_q_poisson_mixture(mu: u32, a: f64, b: f64) -> f64 {
    poisson_mixture(mu, a, b, false)
}

/// `1 − Q_μ(a,b)` by the same mixture with the lower incomplete gamma.
pub fn marcum_p_poisson_mixture(mu: u32, a: f64, b: f64) -> f64 {
    poisson_mixture(mu, a, b, true)
}

// ---------------------------------------------------------------------------
// Hypoexponential references
// ---------------------------------------------------------------------------

/// A reference value with an estimate of its own rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub value: f64,
    pub error_bound: f64,
}

/// `1 − Σᵢ e^{−λᵢt} Π_{j≠i} λⱼ/(λⱼ−λᵢ)` for distinct means (pairwise
/// relative gap at least `1e−6`). The error bound grows with the partial
/// fraction coefficients, so this is only useful away from `t → 0`.
pub fn hypoexp_partial_fraction(means: &[f64], t: f64) -> Result<Reference> {
    let rates: Vec<f64> = means.iter().map(|m| 1.0 / m).collect();
    for i in 0..rates.len() {
        for j in 0..i {
            if ((rates[i] - rates[j]) / rates[i].max(rates[j])).abs() < 1e-6 {
                return Err(domain("partial fractions need pairwise distinct means"));
            }
        }
    }
    let mut s = CompensatedSum::default();
    let mut magnitude = 0.0;
    for (i, &li) in rates.iter().enumerate() {
        let mut c = 1.0;
        for (j, &lj) in rates.iter().enumerate() {
            if i != j {
                c *= lj / (lj - li);
            }
        }
        // Σcᵢ = 1, so CDF = Σ cᵢ (1 − e^{−λᵢt})
        let term = -c * (-li * t).exp_m1();
        magnitude += term.abs();
        s.add(term);
    }
    Ok(Reference { value: s.value(), error_bound: 8.0 * f64::EPSILON * magnitude * rates.len() as f64 })
}

/// `Πλ Σ_n (−1)^n h_n(λ) t^{n+L}/(n+L)!` with `h_n` the complete
/// homogeneous symmetric polynomials of the rates. Valid for repeated
/// means; loses accuracy once `max λ·t` is large.
pub fn hypoexp_power_series(means: &[f64], t: f64) -> Reference {
    let rates: Vec<f64> = means.iter().map(|m| 1.0 / m).collect();
    let l = rates.len();
    // scaled rates keep the terms O(1): h_n(λt) t^L Πλ ... with x = λt
    let x: Vec<f64> = rates.iter().map(|r| r * t).collect();
    let ln_prod: f64 = x.iter().map(|v| v.ln()).sum();
    // h[j] for the first m variables, updated in place: h_n(x₁..x_m) =
    // h_n(x₁..x_{m−1}) + x_m h_{n−1}(x₁..x_m)
    let max_terms = 400;
    let mut h = vec![0.0; max_terms];
    h[0] = 1.0;
    for &xm in &x {
        for n in 1..max_terms {
            h[n] += xm * h[n - 1];
        }
    }
    let mut s = CompensatedSum::default();
    let mut magnitude = 0.0;
    for (n, hn) in h.iter().enumerate() {
        let ln_t = ln_prod + hn.ln() - ln_fact_by_sum((n + l) as u64);
        let term = ln_t.exp();
        magnitude += term;
        s.add(if n % 2 == 0 { term } else { -term });
        if n > 10 && term < 1e-20 * s.value().abs() {
            break;
        }
    }
    Reference { value: s.value(), error_bound: 8.0 * f64::EPSILON * magnitude * (l as f64 + 4.0) }
}

/// The better of the two references (smaller relative error bound).
pub fn hypoexp_reference(means: &[f64], t: f64) -> Reference {
    let series = hypoexp_power_series(means, t);
    match hypoexp_partial_fraction(means, t) {
        Ok(pf) if pf.error_bound < series.error_bound || !series.value.is_finite() => pf,
        _ => series,
    }
}

/// Erlang CDF `P(n, t/mean)` for `n` exponentials of a common mean.
pub fn erlang_cdf(n: u64, mean: f64, t: f64) -> f64 {
    lower_gamma_regularized_int(n, t / mean)
}

// ---------------------------------------------------------------------------
// Eigenvalues by Sturm bisection
// ---------------------------------------------------------------------------

/// Number of eigenvalues of the symmetric tridiagonal matrix `(diag, off)`
/// below `x`, from the signs of the Sturm sequence.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = a - x - b2 / d;
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of `σ²ρ^{|i−j|}` in non-increasing order, as reciprocals of
/// the eigenvalues of its tridiagonal inverse
/// `(σ²(1−ρ²))⁻¹ · tridiag(−ρ; 1, 1+ρ², …, 1+ρ², 1; −ρ)`, each found by
/// bisection on the Sturm count.
pub fn exp_corr_eigenvalues_bisection(sigma: f64, rho: f64, n: usize) -> Vec<f64> {
    let s2 = sigma * sigma;
    let (diag, off) = if n == 1 {
        (vec![1.0 / s2], vec![])
    } else {
        let scale = 1.0 / (s2 * (1.0 - rho * rho));
        let diag =
            (0..n).map(|i| if i == 0 || i == n - 1 { scale } else { scale * (1.0 + rho * rho) }).collect::<Vec<_>>();
        (diag, vec![-rho * scale; n - 1])
    };
    let upper = diag.iter().map(|d| d + 2.0 * off.first().map_or(0.0, |o: &f64| o.abs())).fold(0.0, f64::max);
    let mut precision_eigs = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest: smallest x with more than k eigenvalues below it
        let (mut lo, mut hi) = (0.0, upper * (1.0 + 1e-12));
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, &off, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        precision_eigs.push(0.5 * (lo + hi));
    }
    // the smallest precision eigenvalue is the largest covariance eigenvalue
    precision_eigs.iter().map(|m| 1.0 / m).collect()
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    /// Whether every subinterval met its share of the tolerance.
    pub converged: bool,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`:
/// the interval with the largest error estimate is bisected until the total
/// estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0, converged: true };
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let max_parts = 2000;
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Integral { value, error, converged: true };
        }
        if parts.len() >= max_parts {
            return Integral { value, error, converged: false };
        }
        let (idx, _) = parts.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let value: f64 = parts.iter().map(|p| p.2).sum::<f64>() + v;
            return Integral { value, error, converged: false };
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

// ---------------------------------------------------------------------------
// Joint densities and region probabilities
// ---------------------------------------------------------------------------

/// Integration region for [`quad_event_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `Σ rᵢ ≤ γ₀`, the EGC outage event.
    Simplex,
    /// `Σ rᵢ² ≤ γ₀²`, the truncation set.
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub region: Region,
    pub abs_tol: f64,
}

impl QuadratureSpec {
    /// Default tolerance: `1e−10` in two dimensions, `1e−8` in three.
    pub fn new(region: Region, dimension: usize) -> Self {
        Self { region, abs_tol: if dimension <= 2 { 1e-10 } else { 1e-8 } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    pub tolerance_reached: bool,
}

fn i0_series(x: f64) -> f64 {
    // plain series; densities here only need moderate arguments
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut s = CompensatedSum::default();
    s.add(1.0);
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        s.add(term);
        if term < 1e-18 * s.value() && k * k > q {
            return s.value();
        }
    }
}

/// Joint density of the envelopes, written out from the model definitions.
pub fn joint_pdf(scenario: &FadingScenario, r: &[f64]) -> f64 {
    if r.iter().any(|&v| v < 0.0) {
        return 0.0;
    }
    match scenario {
        FadingScenario::InidRayleigh { omegas } | FadingScenario::OrderedInidRayleigh { omegas, .. } => {
            r.iter().zip(omegas).map(|(&ri, &o)| 2.0 * ri / o * (-ri * ri / o).exp()).product()
        }
        &FadingScenario::ExpCorrRayleigh { sigma, rho, branches } => {
            let s2 = sigma * sigma;
            if branches == 1 {
                return r[0] / s2 * (-r[0] * r[0] / (2.0 * s2)).exp();
            }
            let d = 1.0 - rho * rho;
            let l = branches;
            let prod: f64 = r.iter().product();
            let inner: f64 = r[1..l - 1].iter().map(|v| v * v).sum();
            let quad = r[0] * r[0] + r[l - 1] * r[l - 1] + (1.0 + rho * rho) * inner;
            let mut v = prod / (s2.powi(l as i32) * d.powi(l as i32 - 1)) * (-quad / (2.0 * d * s2)).exp();
            for i in 0..l - 1 {
                v *= i0_series(rho / (d * s2) * r[i] * r[i + 1]);
            }
            v
        }
        &FadingScenario::IidRice { k, omega, .. } => r
            .iter()
            .map(|&ri| {
                2.0 * ri * (k + 1.0) / omega
                    * (-k - (k + 1.0) / omega * ri * ri).exp()
                    * i0_series(2.0 * ri * (k * (k + 1.0) / omega).sqrt())
            })
            .product(),
    }
}

/// Probability that the envelopes fall in `region` (scaled by `γ₀`), by
/// nested adaptive quadrature of [`joint_pdf`]. Two or three branches.
pub fn quad_event_probability(scenario: &FadingScenario, spec: QuadratureSpec, g0: f64) -> Result<QuadResult> {
    scenario.validate()?;
    let l = scenario.branches();
    if !(2..=3).contains(&l) {
        return Err(Error::Size(format!("quadrature oracle supports 2 or 3 branches, got {l}")));
    }
    if matches!(scenario, FadingScenario::OrderedInidRayleigh { selected, omegas } if *selected != omegas.len()) {
        return Err(Error::Unsupported { method: "quadrature", scenario: scenario.name() });
    }
    let region = spec.region;
    let remaining = |used: f64, used_sq: f64| -> f64 {
        match region {
            Region::Simplex => (g0 - used).max(0.0),
            Region::Sphere => (g0 * g0 - used_sq).max(0.0).sqrt(),
        }
    };
    let inner_tol = 0.1 * spec.abs_tol / g0;
    let worst_inner = std::cell::Cell::new(0.0f64);
    let all_converged = std::cell::Cell::new(true);
    let record = |i: &Integral| {
        worst_inner.set(worst_inner.get().max(i.error));
        if !i.converged {
            all_converged.set(false);
        }
    };

    let outer = if l == 2 {
        integrate(
            |r1| {
                let hi = remaining(r1, r1 * r1);
                let i = integrate(|r2| joint_pdf(scenario, &[r1, r2]), 0.0, hi, inner_tol, 1e-13);
                record(&i);
                i.value
            },
            0.0,
            g0,
            spec.abs_tol,
            1e-12,
        )
    } else {
        let tol3 = 0.1 * inner_tol / g0;
        integrate(
            |r1| {
                let hi2 = remaining(r1, r1 * r1);
                let i2 = integrate(
                    |r2| {
                        let hi3 = remaining(r1 + r2, r1 * r1 + r2 * r2);
                        let i3 = integrate(|r3| joint_pdf(scenario, &[r1, r2, r3]), 0.0, hi3, tol3, 1e-12);
                        record(&i3);
                        i3.value
                    },
                    0.0,
                    hi2,
                    inner_tol,
                    1e-11,
                );
                record(&i2);
                i2.value
            },
            0.0,
            g0,
            spec.abs_tol,
            1e-10,
        )
    };
    Ok(QuadResult {
        value: outer.value,
        error_bound: outer.error + g0 * worst_inner.get() * if l == 3 { 1.0 + g0 } else { 1.0 },
        tolerance_reached: outer.converged && all_converged.get(),
    })
}

/// CDF of `Σ Rᵢ²` for i.i.d. Rice envelopes at `γ₀²`, by quadrature of the
/// squared κ-μ density (`κ = K`, `μ = L`, mean power `LΩ`). Needs `K > 0`.
pub fn kappa_mu_sum_cdf_quadrature(k: f64, omega: f64, branches: usize, g0: f64) -> Result<Integral> {
    if k.is_nan() || k <= 0.0 {
        return Err(domain("the squared kappa-mu density needs K > 0"));
    }
    let l = branches as f64;
    let total = l * omega;
    let nu = branches as u32 - 1;
    let ln_const =
        l.ln() + 0.5 * (l + 1.0) * (1.0 + k).ln() - 0.5 * (l + 1.0) * total.ln() - 0.5 * (l - 1.0) * k.ln() - l * k;
    let pdf = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let z = 2.0 * l * (k * (k + 1.0) * r / total).sqrt();
        (ln_const + 0.5 * (l - 1.0) * r.ln() - (1.0 + k) * l * r / total).exp() * bessel_i_series(nu, z, 200)
    };
    Ok(integrate(pdf, 0.0, g0 * g0, 1e-15, 1e-12))
}

// ---------------------------------------------------------------------------
// High-effort Monte Carlo
// ---------------------------------------------------------------------------

/// Event evaluated by [`mc_high_effort`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McEvent {
    /// `Σ Rᵢ ≤ γ₀` over the combined branches (the `N` largest for GSC).
    EgcSum,
    /// `Σ Rᵢ² ≤ γ₀²` over all branches.
    MrcSum,
    /// `Σ_{i≤N} h⁽ⁱ⁾ ≤ γ₀²`; equal to `MrcSum` outside the GSC scenario.
    OrderedPartialSum,
}

#[derive(Default)]
struct Count(u64);

impl Tally for Count {
    fn merge(self, o: Self) -> Self {
        Count(self.0 + o.0)
    }
}

/// Plain Monte Carlo estimate and standard error of `event`.
pub fn mc_high_effort(scenario: &FadingScenario, event: McEvent, g0: f64, run: &RunSpec) -> Result<(f64, f64)> {
    let sampler = NaiveSampler::new(scenario)?;
    let l = scenario.branches();
    let n = match event {
        McEvent::EgcSum | McEvent::OrderedPartialSum => scenario.combined_branches(),
        McEvent::MrcSum => l,
    };
    let sorted = matches!(scenario, FadingScenario::OrderedInidRayleigh { .. });
    let t = g0 * g0;
    let count = run_blocks(run, StreamTag::OracleMc, |rng, m| {
        let mut buf = vec![0.0; l];
        let mut c = 0u64;
        for _ in 0..m {
            sampler.sample_into(rng, &mut buf);
            if !sorted && event == McEvent::OrderedPartialSum {
                buf.sort_unstable_by(|a, b| b.total_cmp(a));
            }
            let hit = match event {
                McEvent::EgcSum => buf[..n].iter().sum::<f64>() <= g0,
                McEvent::MrcSum | McEvent::OrderedPartialSum => buf[..n].iter().map(|r| r * r).sum::<f64>() <= t,
            };
            c += hit as u64;
        }
        Ok(Count(c))
    })?;
    let m = run.samples as f64;
    let p = count.0 as f64 / m;
    Ok((p, (p * (1.0 - p) / m).sqrt()))
}
