//! The Γ functional and closed-form asymptotic quantities.
//!
//! `Γ(μ) = max Σ_t θ_t g_t φ_κ(α_t)` over `α ∈ [0,1]^N` with `Σ_t θ_t α_t ≤ μ`,
//! where `φ_κ(α) = κα + 2√(α(1−α))`. Each term is concave, so the maximiser
//! is found by water-filling on the budget multiplier.

use crate::error::{check_len, Error, Result};

const BUDGET_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 400;

/// `φ_κ(α) = κα + 2√(α(1−α))`.
pub fn phi_kappa(alpha: f64, kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(phi_unchecked(alpha, kappa))
}

fn phi_unchecked(alpha: f64, kappa: f64) -> f64 {
    kappa * alpha + 2.0 * (alpha * (1.0 - alpha)).max(0.0).sqrt()
}

/// The stationary allocation for slope `u`: the root of
/// `(1 − 2α)/√(α(1−α)) = u`.
fn allocation(u: f64) -> f64 {
    (0.5 * (1.0 - u / (u * u + 4.0).sqrt())).clamp(0.0, 1.0)
}

/// Maximiser of the Γ program.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSolution {
    pub alphas: Vec<f64>,
    pub value: f64,
    pub multiplier: f64,
    pub budget: f64,
    pub budget_active: bool,
}

/// Validated inputs of the Γ program.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProblem {
    weights: Vec<f64>,
    densities: Vec<f64>,
    kappa: f64,
}

impl GammaProblem {
    pub fn new(weights: &[f64], densities: &[f64], kappa: f64) -> Result<Self> {
        check_len(weights.len(), densities.len())?;
        if weights.is_empty() {
            return Err(Error::invalid("at least one block is required"));
        }
        if weights.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::invalid("weights must be positive"));
        }
        if densities.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("densities must be positive"));
        }
        let total: f64 = densities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("densities sum to {total}, not 1")));
        }
        if !kappa.is_finite() {
            return Err(Error::invalid("kappa must be finite"));
        }
        Ok(Self {
            weights: weights.to_vec(),
            densities: densities.to_vec(),
            kappa,
        })
    }

    /// `Σ_t θ_t g_t φ_κ(α_t)` for clamped allocations.
    pub fn objective(&self, alphas: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.densities)
            .zip(alphas)
            .map(|((g, th), a)| th * g * phi_unchecked(a.clamp(0.0, 1.0), self.kappa))
            .sum()
    }

    pub fn spent(&self, alphas: &[f64]) -> f64 {
        self.densities.iter().zip(alphas).map(|(t, a)| t * a).sum()
    }

    fn allocations(&self, multiplier: f64) -> Vec<f64> {
        self.weights
            .iter()
            .map(|g| allocation(multiplier / g - self.kappa))
            .collect()
    }

    /// Water-filling solution for budget `μ ∈ (0, 1)`.
    pub fn solve(&self, budget: f64) -> Result<GammaSolution> {
        if !(budget > 0.0 && budget < 1.0) {
            return Err(Error::invalid(format!("budget mu = {budget} outside (0, 1)")));
        }
        let free = self.allocations(0.0);
        if self.spent(&free) <= budget {
            return Ok(GammaSolution {
                value: self.objective(&free),
                alphas: free,
                multiplier: 0.0,
                budget,
                budget_active: false,
            });
        }
        let max_g = self.weights.iter().cloned().fold(0.0, f64::max);
        let mut hi = 10.0 * max_g * (self.kappa + 2.0 / (budget * (1.0 - budget)).sqrt()).abs();
        hi = hi.max(1.0);
        // The bracket above can fall short for strongly negative skew.
        while self.spent(&self.allocations(hi)) > budget {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NoConvergence { iterations: 0 });
            }
        }
        let mut lo = 0.0;
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if self.spent(&self.allocations(mid)) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let alphas = self.allocations(hi);
        let spent = self.spent(&alphas);
        if spent > budget + BUDGET_TOL || budget - spent > BUDGET_TOL {
            return Err(Error::NoConvergence {
                iterations: MAX_BISECTIONS,
            });
        }
        Ok(GammaSolution {
            value: self.objective(&alphas),
            alphas,
            multiplier: hi,
            budget,
            budget_active: true,
        })
    }
}

/// `Γ_{g,θ,κ}(μ)` and its maximiser.
pub fn gamma_functional(weights: &[f64], densities: &[f64], kappa: f64, budget: f64) -> Result<GammaSolution> {
    GammaProblem::new(weights, densities, kappa)?.solve(budget)
}

/// Balanced two-block value `Γ_g^{(2)}(μ)` with unit first weight and `κ = 0`.
pub fn gamma_two_block(g: f64, budget: f64) -> Result<f64> {
    Ok(gamma_functional(&[1.0, g], &[0.5, 0.5], 0.0, budget)?.value)
}

/// `F_μ(g) = Γ_g^{(2)}(μ) / (1 + g)`.
pub fn normalized_gain(g: f64, budget: f64) -> Result<f64> {
    Ok(gamma_two_block(g, budget)? / (1.0 + g))
}

/// Which block dominates a two-block instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Weak,
    Crossover,
    Strong,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Crossover => "crossover",
            Regime::Strong => "strong",
        }
    }
}

/// Ratio `gθ₂/θ₁` at or below which the weak regime is reported.
pub const WEAK_RATIO: f64 = 0.1;
/// Ratio `gθ₂/θ₁` at or above which the strong regime is reported.
pub const STRONG_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Leading-order value of `Γ_g^{(2)}(μ)` in the reported regime.
    pub leading_value: f64,
    /// The full two-block value, for comparison.
    pub full_value: f64,
    /// `Δ_m = (m₁^{3/4} + g m₂^{3/4}) / m`.
    pub error_scale: f64,
}

/// `max_{0 ≤ α ≤ cap} φ_κ(α)`.
fn phi_sup(kappa: f64, cap: f64) -> f64 {
    let cap = cap.clamp(0.0, 1.0);
    let peak = allocation(-kappa).min(cap);
    phi_unchecked(peak, kappa)
}

/// Classifies a two-block problem (`g₁ = 1`, `g₂ = g`) and returns the
/// leading-order value of the matching regime.
pub fn two_block_regimes(g: f64, densities: [f64; 2], kappa: f64, budget: f64, m: usize) -> Result<RegimeReport> {
    let full_value = gamma_functional(&[1.0, g], &densities, kappa, budget)?.value;
    let [th1, th2] = densities;
    let ratio = g * th2 / th1;
    let (regime, leading_value) = if ratio <= WEAK_RATIO {
        (Regime::Weak, th1 * phi_sup(kappa, budget / th1))
    } else if ratio >= STRONG_RATIO {
        (Regime::Strong, g * th2 * phi_sup(kappa, budget / th2))
    } else {
        (Regime::Crossover, full_value)
    };
    let (m1, m2) = (th1 * m as f64, th2 * m as f64);
    let error_scale = (m1.powf(0.75) + g * m2.powf(0.75)) / m as f64;
    Ok(RegimeReport {
        regime,
        leading_value,
        full_value,
        error_scale,
    })
}

/// Best univariate value `2·mean(c)·√(μ(1−μ))`.
pub fn univariate_baseline(coefficients: &[f64], budget: f64) -> Result<f64> {
    if coefficients.is_empty() {
        return Err(Error::invalid("no coefficients"));
    }
    if !(budget > 0.0 && budget < 0.5) {
        return Err(Error::invalid(format!("budget mu = {budget} outside (0, 1/2)")));
    }
    let mean = coefficients.iter().sum::<f64>() / coefficients.len() as f64;
    Ok(2.0 * mean * (budget * (1.0 - budget)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub budget: f64,
    pub multivariate: f64,
    pub univariate: f64,
}

/// Balanced 𝔽₂ two-block comparison: `Γ_g^{(2)}(μ)` against the univariate
/// value `(1 + g)√(μ(1−μ))`.
pub fn multivariate_vs_univariate_curve(g: f64, budgets: &[f64]) -> Result<Vec<CurvePoint>> {
    budgets
        .iter()
        .map(|&mu| {
            Ok(CurvePoint {
                budget: mu,
                multivariate: gamma_two_block(g, mu)?,
                univariate: univariate_baseline(&[1.0, g], mu)?,
            })
        })
        .collect()
}

/// `n` evenly spaced points `start, start + step, …`.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| start + k as f64 * step).collect()
}
