//! Special functions behind the closed-form truncation probabilities.
//!
//! * modified Bessel functions of the first kind, integer order, with a
//!   log-domain entry point so that ratios stay finite for large arguments;
//! * the generalized Marcum Q function of integer order, together with its
//!   complement computed without cancellation;
//! * the hypoexponential CDF, evaluated as an absorption probability of the
//!   bidiagonal generator by scaling-and-squaring.
//!
//! Every function here is pure and re-entrant.

use crate::error::{domain, Error, Result};

/// Series stop once the current term is this small relative to the sum.
const SERIES_REL_TOL: f64 = 1e-16;
/// Hard cap on the number of series terms before reporting non-convergence.
pub const MAX_SERIES_TERMS: usize = 10_000;
/// Above this argument the Bessel series is accumulated around its peak term.
const LOG_ACCUMULATION_THRESHOLD: f64 = 50.0;
/// Largest generator dimension accepted by [`hypoexp_cdf`].
pub const MAX_HYPOEXP_DIM: usize = 16;

/// `ln(n!)`, exact product below 20 and a Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 20 {
        let mut p = 1.0f64;
        for k in 2..=n {
            p *= k as f64;
        }
        return p.ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let correction =
        inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + correction
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!("{name} must be finite and non-negative, got {x}")));
    }
    Ok(())
}

/// `I₀(x)` for `x ≥ 0`.
pub fn bessel_i0(x: f64) -> Result<f64> {
    bessel_i(0, x)
}

/// `I_ν(x)` for integer `ν ≥ 0` and `x ≥ 0`.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64> {
    Ok(ln_bessel_i(nu, x)?.exp())
}

/// `ln I_ν(x)`. Finite for every finite `x > 0`, so ratios of large Bessel
/// values can be formed as differences.
pub fn ln_bessel_i(nu: u32, x: f64) -> Result<f64> {
    check_nonneg("x", x)?;
    ln_bessel_i_unchecked(nu, x)
}

pub(crate) fn ln_bessel_i_unchecked(nu: u32, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let nu_f = nu as f64;
    if x <= LOG_ACCUMULATION_THRESHOLD {
        ln_bessel_series_from_origin(nu, x)
    } else if 4.0 * nu_f * nu_f <= x {
        ln_bessel_asymptotic(nu, x)
    } else {
        ln_bessel_series_from_peak(nu, x)
    }
}

/// `Σ (x/2)^{2k+ν} / (k! (k+ν)!)`, scaled by its first term.
fn ln_bessel_series_from_origin(nu: u32, x: f64) -> Result<f64> {
    let half = 0.5 * x;
    let q = half * half;
    let nu_f = nu as f64;
    let ln_first = nu_f * half.ln() - ln_factorial(nu as u64);
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let ratio = q / ((kf + 1.0) * (kf + 1.0 + nu_f));
        term *= ratio;
        sum += term;
        if ratio < 1.0 && term < SERIES_REL_TOL * sum {
            return Ok(ln_first + sum.ln());
        }
    }
    Err(Error::Convergence { method: "bessel power series", iterations: MAX_SERIES_TERMS })
}

/// Same series, summed outward from its largest term so nothing overflows.
fn ln_bessel_series_from_peak(nu: u32, x: f64) -> Result<f64> {
    let half = 0.5 * x;
    let q = half * half;
    let nu_f = nu as f64;
    // (k+1)(k+1+ν) = q at the peak
    let m = 0.5 * (-nu_f + (nu_f * nu_f + x * x).sqrt());
    let peak = (m - 1.0).max(0.0).floor() as u64;
    let ln_peak = (2.0 * peak as f64 + nu_f) * half.ln() - ln_factorial(peak) - ln_factorial(peak + nu as u64);

    let mut sum = 1.0;
    let mut converged = false;
    let mut term = 1.0;
    let mut k = peak as f64;
    for _ in 0..MAX_SERIES_TERMS {
        term *= q / ((k + 1.0) * (k + 1.0 + nu_f));
        k += 1.0;
        sum += term;
        if term < SERIES_REL_TOL * sum {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence { method: "bessel peak series", iterations: MAX_SERIES_TERMS });
    }
    let mut term = 1.0;
    let mut k = peak as f64;
    while k > 0.0 {
        term *= k * (k + nu_f) / q;
        k -= 1.0;
        sum += term;
        if term < SERIES_REL_TOL * sum {
            break;
        }
    }
    Ok(ln_peak + sum.ln())
}

/// Large-argument expansion `e^x/√(2πx) Σ (−1)^k a_k(ν)/x^k`, valid when
/// `4ν² ≤ x`.
fn ln_bessel_asymptotic(nu: u32, x: f64) -> Result<f64> {
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let mut sum = 1.0;
    let mut term = 1.0f64;
    for k in 1..MAX_SERIES_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() && k > 1 {
            // smallest term reached; the expansion starts diverging here
            break;
        }
        term = next;
        sum += term;
        if term.abs() < SERIES_REL_TOL * sum.abs() {
            break;
        }
    }
    Ok(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln())
}

/// Regularized incomplete gamma functions of integer order,
/// `(P(n, x), Q(n, x))`. Equivalently `(Pr[N ≥ n], Pr[N < n])` for
/// `N ~ Poisson(x)`. The smaller of the two is summed directly.
pub fn regularized_gamma_int(n: u32, x: f64) -> Result<(f64, f64)> {
    check_nonneg("x", x)?;
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    let nf = n as f64;
    if x < nf {
        // P = e^{-x} Σ_{j≥n} x^j/j!
        let ln_first = nf * x.ln() - x - ln_factorial(n as u64);
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut j = nf;
        let mut converged = false;
        for _ in 0..MAX_SERIES_TERMS {
            j += 1.0;
            term *= x / j;
            sum += term;
            if term < SERIES_REL_TOL * sum {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence { method: "incomplete gamma series", iterations: MAX_SERIES_TERMS });
        }
        let p = (ln_first + sum.ln()).exp().min(1.0);
        Ok((p, 1.0 - p))
    } else {
        // Q = e^{-x} Σ_{j<n} x^j/j!, summed down from the largest term j = n-1
        let top = nf - 1.0;
        let ln_top = top * x.ln() - x - ln_factorial(n as u64 - 1);
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut j = top;
        while j > 0.0 {
            term *= j / x;
            j -= 1.0;
            sum += term;
            if term < SERIES_REL_TOL * sum {
                break;
            }
        }
        let q = (ln_top + sum.ln()).exp().min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Generalized Marcum Q function `Q_μ(a, b)` of integer order `μ ≥ 1`.
pub fn marcum_q(mu: u32, a: f64, b: f64) -> Result<f64> {
    Ok(marcum_pair(mu, a, b)?.1)
}

/// `1 − Q_μ(a, b)`, accurate to full relative precision when it is tiny.
/// This is the CDF of a noncentral chi variate and is what the Rice
/// truncation probability needs.
pub fn marcum_p(mu: u32, a: f64, b: f64) -> Result<f64> {
    Ok(marcum_pair(mu, a, b)?.0)
}

/// `(1 − Q_μ(a,b), Q_μ(a,b))` via the Bessel-series representations
///
/// ```text
/// 1 − Q_μ(a,b) = e^{−(a²+b²)/2} Σ_{k≥μ}   (b/a)^k I_k(ab)
///     Q_μ(a,b) = e^{−(a²+b²)/2} Σ_{k≥1−μ} (a/b)^k I_|k|(ab)
/// ```
///
/// whichever side is below the noncentral mean is summed directly.
pub fn marcum_pair(mu: u32, a: f64, b: f64) -> Result<(f64, f64)> {
    if mu == 0 {
        return Err(domain("Marcum Q order must be at least 1"));
    }
    check_nonneg("a", a)?;
    check_nonneg("b", b)?;
    if b == 0.0 {
        return Ok((0.0, 1.0));
    }
    if a == 0.0 {
        return regularized_gamma_int(mu, 0.5 * b * b);
    }
    let x = 0.5 * b * b;
    let center = mu as f64 + 0.5 * a * a;
    let z = a * b;
    let ln_env = -0.5 * (a * a + b * b);
    if x < center {
        let ln_step = (b / a).ln();
        let p = bessel_weighted_sum(mu as i64, ln_step, z, ln_env)?.min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let ln_step = (a / b).ln();
        let q = bessel_weighted_sum(1 - mu as i64, ln_step, z, ln_env)?.min(1.0);
        Ok((1.0 - q, q))
    }
}

/// `Σ_{k≥start} exp(k·ln_step + ln I_|k|(z) + ln_env)`.
///
/// Term ratios are eventually decreasing (the Bessel ratio `I_{k+1}/I_k` is
/// decreasing in `k` over the integers), so once a ratio `r < 1` shows up the
/// tail is bounded by `t·r/(1−r)`.
fn bessel_weighted_sum(start: i64, ln_step: f64, z: f64, ln_env: f64) -> Result<f64> {
    let ln_term = |k: i64| -> Result<f64> {
        Ok(k as f64 * ln_step + ln_bessel_i_unchecked(k.unsigned_abs() as u32, z)? + ln_env)
    };
    let mut ln_prev = ln_term(start)?;
    let mut ln_sum = ln_prev;
    for i in 1..MAX_SERIES_TERMS as i64 {
        let ln_t = ln_term(start + i)?;
        ln_sum = log_add_exp(ln_sum, ln_t);
        let ln_ratio = ln_t - ln_prev;
        if ln_ratio < 0.0 {
            let r = ln_ratio.exp();
            let ln_tail = ln_t + (r / (1.0 - r)).ln();
            if ln_tail < ln_sum + SERIES_REL_TOL.ln() || ln_t == f64::NEG_INFINITY {
                return Ok(ln_sum.exp());
            }
        }
        ln_prev = ln_t;
    }
    Err(Error::Convergence { method: "Marcum Q Bessel series", iterations: MAX_SERIES_TERMS })
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// The upper-bidiagonal generator with diagonal `−λᵢ` and superdiagonal
/// `+λᵢ`. The sum of independent exponentials with rates `λᵢ` is the
/// absorption time of the chain that walks through the states in order.
#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalGenerator {
    rates: Vec<f64>,
}

impl BidiagonalGenerator {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || rates.len() > MAX_HYPOEXP_DIM {
            return Err(domain(format!("generator dimension must be in 1..={MAX_HYPOEXP_DIM}, got {}", rates.len())));
        }
        if let Some(bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(domain(format!("rates must be positive and finite, got {bad}")));
        }
        Ok(Self { rates })
    }

    /// Generator for exponentials with the given means (`λᵢ = 1/meanᵢ`).
    pub fn from_means(means: &[f64]) -> Result<Self> {
        if let Some(bad) = means.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(domain(format!("means must be positive and finite, got {bad}")));
        }
        Self::new(means.iter().map(|m| 1.0 / m).collect())
    }

    pub fn dim(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `1 − (1,0,…,0) exp(tA) (1,…,1)ᵀ`.
    ///
    /// Evaluated as the `(0, L)` entry of `exp(tQ)`, where `Q` appends an
    /// absorbing state to `A`. All entries of `exp(tQ)` are non-negative,
    /// so the squaring phase never cancels and small CDF values keep their
    /// relative accuracy.
    pub fn absorption_cdf(&self, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let n = self.dim() + 1;
        let max_rate = self.rates.iter().cloned().fold(0.0, f64::max);
        let norm = 2.0 * t * max_rate;
        let mut squarings = 0u32;
        while norm / f64::powi(2.0, squarings as i32) > 0.5 {
            squarings += 1;
        }
        let scale = t / f64::powi(2.0, squarings as i32);
        // scaled generator: diag[i] = -λᵢ s, sup[i] = λᵢ s, last row zero
        let diag: Vec<f64> = (0..n).map(|i| if i + 1 < n { -self.rates[i] * scale } else { 0.0 }).collect();

        // Horner: E = I + Y/1 (I + Y/2 (I + ... (I + Y/K)))
        let terms = n + 24;
        let mut e = identity(n);
        let mut scratch = vec![0.0; n * n];
        for k in (1..=terms).rev() {
            let inv_k = 1.0 / k as f64;
            for i in 0..n {
                for j in i..n {
                    let mut v = diag[i] * e[i * n + j];
                    if i + 1 < n {
                        v -= diag[i] * e[(i + 1) * n + j];
                    }
                    scratch[i * n + j] = v * inv_k + if i == j { 1.0 } else { 0.0 };
                }
            }
            std::mem::swap(&mut e, &mut scratch);
        }

        for _ in 0..squarings {
            for i in 0..n {
                for j in i..n {
                    let mut v = 0.0;
                    for l in i..=j {
                        v += e[i * n + l] * e[l * n + j];
                    }
                    scratch[i * n + j] = v;
                }
            }
            std::mem::swap(&mut e, &mut scratch);
        }
        // Small CDFs come straight from the absorbing column; near
        // saturation the transient mass (the survival) is the accurate part.
        let absorbed = e[n - 1];
        let cdf = if absorbed > 0.5 { 1.0 - e[..n - 1].iter().sum::<f64>() } else { absorbed };
        Ok(cdf.clamp(0.0, 1.0))
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `P(Σᵢ Eᵢ ≤ t)` for independent exponentials with the given means.
/// Repeated means need no special handling.
pub fn hypoexp_cdf(means: &[f64], t: f64) -> Result<f64> {
    BidiagonalGenerator::from_means(means)?.absorption_cdf(t)
}
