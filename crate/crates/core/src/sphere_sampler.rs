//! Sampling from the fading law truncated to the sphere
//! `S = {Σ rᵢ² ≤ γ₀²}` by acceptance-rejection with uniform-simplex
//! proposals.
//!
//! With `Gᵢ = Rᵢ²/γ₀²` every scenario's truncated law becomes a density on
//! the solid unit simplex proportional to `exp(−Σ wᵢGᵢ)` times, for the
//! Bessel-coupled models, a product of `I₀` ratios. That density is bounded
//! by its value at the origin, so the acceptance probability of a uniform
//! proposal is the density divided by that bound.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::mrc_oracle::{self, PermutationWeightTable};
use crate::scenarios::{EnvelopeSample, FadingScenario};
use crate::specfun::ln_bessel_i_unchecked;

/// Consecutive rejections tolerated for a single sample.
pub const REJECTION_CAP: u64 = 1_000_000;

/// A point of the solid unit simplex `{uᵢ ≥ 0, Σuᵢ ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectionStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return 0.0;
        }
        self.accepted as f64 / self.proposals as f64
    }

    pub fn merge(self, other: Self) -> Self {
        Self { proposals: self.proposals + other.proposals, accepted: self.accepted + other.accepted }
    }
}

/// Fill `out` with a uniform draw from the solid simplex of dimension
/// `out.len()`: `L + 1` unit exponentials, the first `L` divided by the
/// total of all of them.
pub fn fill_uniform_simplex<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut total: f64 = rng.sample(Exp1);
    for u in out.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *u = e;
        total += e;
    }
    let inv = 1.0 / total;
    for u in out.iter_mut() {
        *u *= inv;
    }
}

pub fn sample_uniform_simplex<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SimplexPoint {
    let mut coords = vec![0.0; dim];
    fill_uniform_simplex(rng, &mut coords);
    SimplexPoint { coords }
}

#[derive(Debug, Clone)]
enum Kernel {
    /// `exp(−Σ wᵢGᵢ)`
    Linear { weights: Vec<f64> },
    /// exponential correlation: linear part plus `Π I₀(z√(GᵢGᵢ₊₁))/I₀(z)`
    Correlated { weights: Vec<f64>, coupling: f64, ln_i0_coupling: f64 },
    /// Rice: `exp(−w ΣGᵢ) Π I₀(β√Gᵢ)/I₀(β)`
    Rice { weight: f64, beta: f64, ln_i0_beta: f64 },
    /// GSC spacings: `exp(−γ₀² Σ (G_ℓ/α_ℓ) c_ℓ)` for the drawn permutation
    Ordered { table: Box<PermutationWeightTable>, weights: Vec<Vec<f64>> },
}

/// Acceptance-rejection sampler for one `(scenario, γ₀)` pair. Building it
/// evaluates the closed-form truncation probability once.
#[derive(Debug, Clone)]
pub struct SphereSampler {
    kernel: Kernel,
    g0: f64,
    branches: usize,
    p_tilde: f64,
}

impl SphereSampler {
    pub fn new(scenario: &FadingScenario, g0: f64) -> Result<Self> {
        scenario.validate()?;
        let p_tilde = mrc_oracle::mrc_outage(scenario, g0)?;
        let t = g0 * g0;
        let branches = scenario.branches();
        let kernel = match scenario {
            FadingScenario::InidRayleigh { omegas } => {
                Kernel::Linear { weights: omegas.iter().map(|o| t / o).collect() }
            }
            &FadingScenario::ExpCorrRayleigh { sigma, rho, branches } => {
                let s2 = sigma * sigma;
                let d = 1.0 - rho * rho;
                let weights = (0..branches)
                    .map(|i| {
                        if branches == 1 {
                            t / (2.0 * s2)
                        } else if i == 0 || i == branches - 1 {
                            t / (2.0 * d * s2)
                        } else {
                            t * (1.0 + rho * rho) / (2.0 * d * s2)
                        }
                    })
                    .collect();
                let coupling = rho * t / (d * s2);
                Kernel::Correlated { weights, coupling, ln_i0_coupling: ln_bessel_i_unchecked(0, coupling)? }
            }
            &FadingScenario::IidRice { k, omega, .. } => {
                let beta = 2.0 * (k * (k + 1.0) * t / omega).sqrt();
                Kernel::Rice { weight: (k + 1.0) * t / omega, beta, ln_i0_beta: ln_bessel_i_unchecked(0, beta)? }
            }
            FadingScenario::OrderedInidRayleigh { omegas, selected } => {
                let table = mrc_oracle::ordered_permutation_table(omegas, *selected, g0)?;
                Self::ordered_kernel(table)
            }
        };
        Ok(Self { kernel, g0, branches, p_tilde })
    }

    /// Ordered-scenario sampler reusing a prepared permutation table.
    pub fn with_table(table: PermutationWeightTable) -> Self {
        let g0 = table.g0();
        let branches = table.omegas().len();
        let p_tilde = table.total();
        Self { kernel: Self::ordered_kernel(table), g0, branches, p_tilde }
    }

    fn ordered_kernel(table: PermutationWeightTable) -> Kernel {
        let t = table.g0() * table.g0();
        let alphas = table.alphas().alphas.clone();
        let weights = (0..table.len())
            .map(|p| table.cumulative_rates(p).iter().zip(&alphas).map(|(c, a)| t * c / a).collect())
            .collect();
        Kernel::Ordered { table: Box::new(table), weights }
    }

    /// Closed-form probability of the truncation set.
    pub fn p_tilde(&self) -> f64 {
        self.p_tilde
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self.kernel, Kernel::Ordered { .. })
    }

    pub fn table(&self) -> Option<&PermutationWeightTable> {
        match &self.kernel {
            Kernel::Ordered { table, .. } => Some(table),
            _ => None,
        }
    }

    /// Acceptance probability of the simplex proposal `g`. `perm` selects
    /// the ordering in the GSC scenario and is ignored otherwise.
    pub fn acceptance_probability(&self, g: &[f64], perm: usize) -> f64 {
        self.ln_acceptance(g, perm).exp()
    }

    fn ln_acceptance(&self, g: &[f64], perm: usize) -> f64 {
        let dot = |w: &[f64]| -> f64 { w.iter().zip(g).map(|(w, g)| w * g).sum() };
        let ln = match &self.kernel {
            Kernel::Linear { weights } => -dot(weights),
            Kernel::Correlated { weights, coupling, ln_i0_coupling } => {
                let mut ln = -dot(weights);
                if *coupling > 0.0 {
                    for pair in g.windows(2) {
                        let arg = coupling * (pair[0] * pair[1]).sqrt();
                        ln += ln_i0(arg) - ln_i0_coupling;
                    }
                }
                ln
            }
            Kernel::Rice { weight, beta, ln_i0_beta } => {
                let mut ln = -weight * g.iter().sum::<f64>();
                if *beta > 0.0 {
                    for gi in g {
                        ln += ln_i0(beta * gi.sqrt()) - ln_i0_beta;
                    }
                }
                ln
            }
            Kernel::Ordered { weights, .. } => -dot(&weights[perm]),
        };
        ln.min(0.0)
    }

    /// `U⁰ < acceptance probability`, decided factor by factor: every
    /// factor is at most one, so the proposal is rejected as soon as the
    /// partial product drops below `U⁰` and the remaining Bessel ratios are
    /// never evaluated.
    fn accepts(&self, g: &[f64], perm: usize, u0: f64) -> bool {
        let ln_u = u0.ln();
        let dot = |w: &[f64]| -> f64 { w.iter().zip(g).map(|(w, g)| w * g).sum() };
        match &self.kernel {
            Kernel::Linear { weights } => ln_u < -dot(weights),
            Kernel::Ordered { weights, .. } => ln_u < -dot(&weights[perm]),
            Kernel::Correlated { weights, coupling, ln_i0_coupling } => {
                let mut ln = -dot(weights);
                if ln_u >= ln {
                    return false;
                }
                if *coupling > 0.0 {
                    for pair in g.windows(2) {
                        ln += ln_i0(coupling * (pair[0] * pair[1]).sqrt()) - ln_i0_coupling;
                        if ln_u >= ln {
                            return false;
                        }
                    }
                }
                true
            }
            Kernel::Rice { weight, beta, ln_i0_beta } => {
                let mut ln = -weight * g.iter().sum::<f64>();
                if ln_u >= ln {
                    return false;
                }
                if *beta > 0.0 {
                    for gi in g {
                        ln += ln_i0(beta * gi.sqrt()) - ln_i0_beta;
                        if ln_u >= ln {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Acceptance rate estimated from a fresh batch of proposals; only used
    /// to make the rejection-cap error informative.
    fn mean_acceptance<R: Rng + ?Sized>(&self, rng: &mut R, perm: usize) -> f64 {
        const BATCH: usize = 10_000;
        let mut g = vec![0.0; self.branches];
        let total: f64 = (0..BATCH)
            .map(|_| {
                fill_uniform_simplex(rng, &mut g);
                self.acceptance_probability(&g, perm)
            })
            .sum();
        total / BATCH as f64
    }

    /// Draw one sample into `out` (length `L`) and return the number of
    /// proposals it took.
    ///
    /// Non-ordered scenarios write the envelopes `Rᵢ = γ₀√Gᵢ`. The GSC
    /// scenario writes the ordered gains `h⁽¹⁾ ≥ … ≥ h⁽ᴸ⁾`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<u64> {
        debug_assert_eq!(out.len(), self.branches);
        let perm = match &self.kernel {
            Kernel::Ordered { table, .. } => table.pick(rng.random::<f64>()),
            _ => 0,
        };
        let mut proposals = 0u64;
        loop {
            fill_uniform_simplex(rng, out);
            let u0: f64 = rng.random();
            proposals += 1;
            if self.accepts(out, perm, u0) {
                break;
            }
            if proposals >= REJECTION_CAP {
                return Err(Error::RejectionCap { proposals, running_acceptance: self.mean_acceptance(rng, perm) });
            }
        }
        match &self.kernel {
            Kernel::Ordered { table, .. } => {
                // X_ℓ = γ₀² G_ℓ / α_ℓ, then h⁽ℓ⁾ = Σ_{j≥ℓ} X_j
                let t = self.g0 * self.g0;
                let alphas = &table.alphas().alphas;
                let mut acc = 0.0;
                for l in (0..out.len()).rev() {
                    acc += t * out[l] / alphas[l];
                    out[l] = acc;
                }
            }
            _ => {
                for r in out.iter_mut() {
                    *r = self.g0 * r.sqrt();
                }
            }
        }
        Ok(proposals)
    }

    /// Sample and collect into an [`EnvelopeSample`]. For the GSC scenario
    /// the returned values are the top-`N` gains.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(EnvelopeSample, RejectionStats)> {
        let mut values = vec![0.0; self.branches];
        let proposals = self.sample_into(rng, &mut values)?;
        if let Some(table) = self.table() {
            values.truncate(table.selected());
        }
        Ok((EnvelopeSample { values }, RejectionStats { proposals, accepted: 1 }))
    }
}

#[inline]
fn ln_i0(x: f64) -> f64 {
    // arguments here are finite and non-negative by construction
    ln_bessel_i_unchecked(0, x).unwrap_or(f64::NEG_INFINITY)
}

/// Algorithm for independent Rayleigh envelopes.
pub fn rejection_inid_rayleigh<R: Rng + ?Sized>(
    omegas: &[f64],
    g0: f64,
    rng: &mut R,
) -> Result<(EnvelopeSample, RejectionStats)> {
    SphereSampler::new(&FadingScenario::InidRayleigh { omegas: omegas.to_vec() }, g0)?.sample(rng)
}

/// Algorithm for exponentially correlated Rayleigh envelopes.
pub fn rejection_corr_rayleigh<R: Rng + ?Sized>(
    sigma: f64,
    rho: f64,
    branches: usize,
    g0: f64,
    rng: &mut R,
) -> Result<(EnvelopeSample, RejectionStats)> {
    SphereSampler::new(&FadingScenario::ExpCorrRayleigh { sigma, rho, branches }, g0)?.sample(rng)
}

/// Algorithm for i.i.d. Rice envelopes.
pub fn rejection_iid_rice<R: Rng + ?Sized>(
    k: f64,
    omega: f64,
    branches: usize,
    g0: f64,
    rng: &mut R,
) -> Result<(EnvelopeSample, RejectionStats)> {
    SphereSampler::new(&FadingScenario::IidRice { k, omega, branches }, g0)?.sample(rng)
}

/// Algorithm for the GSC scenario: returns the top-`N` gains `h⁽¹⁾…h⁽ᴺ⁾`.
pub fn rejection_ordered<R: Rng + ?Sized>(
    omegas: &[f64],
    selected: usize,
    g0: f64,
    table: &PermutationWeightTable,
    rng: &mut R,
) -> Result<(EnvelopeSample, RejectionStats)> {
    if !table.matches(omegas, selected, g0) {
        return Err(Error::Mismatch(format!(
            "permutation table built for (omegas={:?}, N={}, g0={}) used with (omegas={omegas:?}, N={selected}, g0={g0})",
            table.omegas(),
            table.selected(),
            table.g0()
        )));
    }
    SphereSampler::with_table(table.clone()).sample(rng)
}
