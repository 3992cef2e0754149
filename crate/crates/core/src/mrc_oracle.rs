//! Closed-form probability of the sphere truncation set, i.e. the MRC
//! outage probability `P̃ = P(Σ gains ≤ γ₀²)`, for each scenario.

use itertools::Itertools;

use crate::error::{domain, Error, Result};
use crate::scenarios::{exp_corr_eigenvalues, FadingScenario};
use crate::specfun::{hypoexp_cdf, marcum_p};

/// Largest branch count for which all `L!` orderings are enumerated.
pub const MAX_ORDERED_BRANCHES: usize = 8;

fn check_g0(g0: f64) -> Result<()> {
    if !(g0.is_finite() && g0 > 0.0) {
        return Err(domain(format!("gamma0 must be positive and finite, got {g0}")));
    }
    Ok(())
}

/// Independent Rayleigh: the gains are exponentials with means `Ωᵢ`.
pub fn mrc_outage_inid_rayleigh(omegas: &[f64], g0: f64) -> Result<f64> {
    check_g0(g0)?;
    hypoexp_cdf(omegas, g0 * g0)
}

/// Exponentially correlated Rayleigh: `Σ Rᵢ²` is distributed as a sum of
/// independent exponentials with means `2λᵢ`, `λᵢ` the covariance
/// eigenvalues.
pub fn mrc_outage_corr_rayleigh(sigma: f64, rho: f64, branches: usize, g0: f64) -> Result<f64> {
    check_g0(g0)?;
    let means: Vec<f64> = exp_corr_eigenvalues(sigma, rho, branches)?.into_iter().map(|l| 2.0 * l).collect();
    hypoexp_cdf(&means, g0 * g0)
}

/// i.i.d. Rice: `Σ Rᵢ²` is a squared κ-μ variate with `κ = K`, `μ = L` and
/// mean power `LΩ`, whose CDF is `1 − Q_L(√(2KL), √(2(K+1)L/(LΩ))·γ₀)`.
pub fn mrc_outage_iid_rice(k: f64, omega: f64, branches: usize, g0: f64) -> Result<f64> {
    check_g0(g0)?;
    FadingScenario::IidRice { k, omega, branches }.validate()?;
    let l = branches as f64;
    let total_power = l * omega;
    let a = (2.0 * k * l).sqrt();
    let b = (2.0 * (k + 1.0) * l / total_power).sqrt() * g0;
    marcum_p(branches as u32, a, b)
}

/// GSC combining weights on the spacings: `αᵢ = i` for `i ≤ N`, else `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaWeights {
    pub alphas: Vec<f64>,
}

impl AlphaWeights {
    pub fn new(branches: usize, selected: usize) -> Result<Self> {
        if selected == 0 || selected > branches {
            return Err(domain(format!("need 1 <= N <= L, got N={selected}, L={branches}")));
        }
        Ok(Self { alphas: (1..=branches).map(|i| i.min(selected) as f64).collect() })
    }
}

/// Enumeration of the orderings of independent exponential gains.
///
/// For ordering `(i₁,…,i_L)` (largest first) the spacings
/// `X_ℓ = h⁽ℓ⁾ − h⁽ℓ⁺¹⁾` are independent exponentials with rates
/// `c_ℓ = Σ_{k≤ℓ} 1/Ω_{i_k}`, and the ordering itself has probability
/// `Π_ℓ 1/(Ω_{i_ℓ} c_ℓ)`.
#[derive(Debug, Clone)]
pub struct PermutationWeightTable {
    omegas: Vec<f64>,
    selected: usize,
    g0: f64,
    permutations: Vec<Vec<usize>>,
    /// `c_ℓ` per permutation
    cumulative_rates: Vec<Vec<f64>>,
    ordering_probabilities: Vec<f64>,
    per_permutation_ptilde: Vec<f64>,
    weights: Vec<f64>,
    cumulative_weights: Vec<f64>,
    alphas: AlphaWeights,
    total: f64,
}

impl PermutationWeightTable {
    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.permutations
    }

    /// Sampling weight of each permutation under the truncated law.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Untruncated probability of each ordering.
    pub fn ordering_probabilities(&self) -> &[f64] {
        &self.ordering_probabilities
    }

    pub fn per_permutation_ptilde(&self) -> &[f64] {
        &self.per_permutation_ptilde
    }

    pub fn cumulative_rates(&self, perm: usize) -> &[f64] {
        &self.cumulative_rates[perm]
    }

    pub fn alphas(&self) -> &AlphaWeights {
        &self.alphas
    }

    /// `P̃` for the GSC scenario.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn selected(&self) -> usize {
        self.selected
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn len(&self) -> usize {
        self.permutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutations.is_empty()
    }

    /// Permutation index for a uniform variate `u ∈ [0,1)`.
    pub fn pick(&self, u: f64) -> usize {
        let target = u * self.cumulative_weights[self.cumulative_weights.len() - 1];
        self.cumulative_weights.partition_point(|&c| c <= target).min(self.cumulative_weights.len() - 1)
    }

    /// Whether this table was built for exactly these arguments.
    pub fn matches(&self, omegas: &[f64], selected: usize, g0: f64) -> bool {
        self.omegas == omegas && self.selected == selected && self.g0 == g0
    }
}

pub fn ordered_permutation_table(omegas: &[f64], selected: usize, g0: f64) -> Result<PermutationWeightTable> {
    check_g0(g0)?;
    let l = omegas.len();
    if l > MAX_ORDERED_BRANCHES {
        return Err(Error::Size(format!(
            "ordered scenario enumerates L! orderings; L must be <= {MAX_ORDERED_BRANCHES}, got {l}"
        )));
    }
    FadingScenario::OrderedInidRayleigh { omegas: omegas.to_vec(), selected }.validate()?;
    let alphas = AlphaWeights::new(l, selected)?;
    let t = g0 * g0;

    let mut permutations = Vec::new();
    let mut cumulative_rates = Vec::new();
    let mut ordering_probabilities = Vec::new();
    let mut per_permutation_ptilde = Vec::new();
    let mut means = vec![0.0; l];
    for perm in (0..l).permutations(l) {
        let mut rate = 0.0;
        let mut prob = 1.0;
        let mut rates = Vec::with_capacity(l);
        for (pos, &branch) in perm.iter().enumerate() {
            rate += 1.0 / omegas[branch];
            prob /= omegas[branch] * rate;
            rates.push(rate);
            // α_ℓ X_ℓ is exponential with mean α_ℓ / c_ℓ
            means[pos] = alphas.alphas[pos] / rate;
        }
        per_permutation_ptilde.push(hypoexp_cdf(&means, t)?);
        ordering_probabilities.push(prob);
        cumulative_rates.push(rates);
        permutations.push(perm);
    }

    let raw: Vec<f64> = ordering_probabilities.iter().zip(&per_permutation_ptilde).map(|(w, p)| w * p).collect();
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(domain(format!("truncation probability underflowed at gamma0 = {g0}")));
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let cumulative_weights = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();

    Ok(PermutationWeightTable {
        omegas: omegas.to_vec(),
        selected,
        g0,
        permutations,
        cumulative_rates,
        ordering_probabilities,
        per_permutation_ptilde,
        weights,
        cumulative_weights,
        alphas,
        total: total.min(1.0),
    })
}

/// `P(Σ_{i≤N} h⁽ⁱ⁾ ≤ γ₀²)` for independent exponential gains.
pub fn mrc_outage_ordered(omegas: &[f64], selected: usize, g0: f64) -> Result<f64> {
    Ok(ordered_permutation_table(omegas, selected, g0)?.total())
}

/// `P̃` for any scenario.
pub fn mrc_outage(scenario: &FadingScenario, g0: f64) -> Result<f64> {
    match scenario {
        FadingScenario::InidRayleigh { omegas } => mrc_outage_inid_rayleigh(omegas, g0),
        &FadingScenario::ExpCorrRayleigh { sigma, rho, branches } => mrc_outage_corr_rayleigh(sigma, rho, branches, g0),
        &FadingScenario::IidRice { k, omega, branches } => mrc_outage_iid_rice(k, omega, branches, g0),
        FadingScenario::OrderedInidRayleigh { omegas, selected } => mrc_outage_ordered(omegas, *selected, g0),
    }
}

/// `Πᵢ (1 − e^{−γ₀²/Ωᵢ})`, the probability that every envelope is below `γ₀`.
pub fn box_probability(omegas: &[f64], g0: f64) -> f64 {
    omegas.iter().map(|o| -(-g0 * g0 / o).exp_m1()).product()
}
