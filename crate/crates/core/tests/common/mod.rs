//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use multidqi::field::PrimeField;
use multidqi::hamdqi::{BlockPauliHamiltonian, Polynomial};
use multidqi::problem::{BlockStructure, WeightedMaxLinsatInstance};
use multidqi::spectral::DistanceHypothesis;
use multidqi::CenteredStats;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CAP: u64 = 1 << 22;

/// `K_k(q; m) = Σ_i (−1)^i C(q, i) C(m − q, k − i)` in machine integers.
pub fn kraw_direct(k: usize, q: usize, m: usize) -> i128 {
    (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            sign * binom(q, i) * binom(m - q, k - i)
        })
        .sum()
}

pub fn binom(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

fn phi(alpha: f64, kappa: f64) -> f64 {
    let a = alpha.clamp(0.0, 1.0);
    kappa * a + 2.0 * (a * (1.0 - a)).sqrt()
}

/// Two-block Γ by direct search along the budget line `θ₁α₁ + θ₂α₂ = μ`
/// (plus the interior point when the budget is slack): a coarse grid
/// followed by golden-section refinement of the concave profile.
pub fn grid_gamma_two(weights: [f64; 2], densities: [f64; 2], kappa: f64, budget: f64) -> f64 {
    let value = |a1: f64, a2: f64| {
        densities[0] * weights[0] * phi(a1, kappa) + densities[1] * weights[1] * phi(a2, kappa)
    };
    let lo = ((budget - densities[1]) / densities[0]).max(0.0);
    let hi = (budget / densities[0]).min(1.0);
    let on_line = |a1: f64| value(a1, ((budget - densities[0] * a1) / densities[1]).clamp(0.0, 1.0));
    let steps = 4000;
    let mut best = (lo, on_line(lo));
    for s in 0..=steps {
        let a1 = lo + (hi - lo) * s as f64 / steps as f64;
        let v = on_line(a1);
        if v > best.1 {
            best = (a1, v);
        }
    }
    let width = (hi - lo) / steps as f64;
    let (mut a, mut b) = ((best.0 - width).max(lo), (best.0 + width).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if on_line(c) >= on_line(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut result = best.1.max(on_line((a + b) / 2.0));
    // Unconstrained block optima, when they fit inside the budget.
    let free = 0.5 * (1.0 + kappa / (kappa * kappa + 4.0).sqrt());
    if densities[0] * free + densities[1] * free <= budget {
        result = result.max(value(free, free));
    }
    result
}

/// Random 𝔽₂ instances with `m ∈ 10..=14`, `n ≤ 10` and at least one
/// admissible degree under `2l + 1 < d⊥`.
pub fn binary_fixtures(count: usize) -> Vec<(WeightedMaxLinsatInstance, usize)> {
    let field = PrimeField::new(2).unwrap();
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(10..=14);
        let n = (m - rng.gen_range(2..=3)).min(10);
        let blocks = if seed % 3 == 0 {
            let a = m / 3;
            BlockStructure::contiguous(&[a, a, m - 2 * a], vec![1.0, 0.6, 2.3]).unwrap()
        } else {
            BlockStructure::contiguous(&[m / 2, m - m / 2], vec![1.0, 1.0 + rng.gen::<f64>() * 2.0]).unwrap()
        };
        let inst = WeightedMaxLinsatInstance::random(field, n, blocks, 1, seed).unwrap();
        let d = inst.matrix().dual_min_distance(CAP).unwrap();
        let l = DistanceHypothesis::Expectation.max_budget(d, 4);
        if l >= 1 {
            out.push((inst, l));
        }
        seed += 1;
    }
    out
}

/// A `p = 3` instance with `d⊥ ≥ 4`, so that `l = 1` satisfies both
/// distance hypotheses.
pub fn ternary_fixture(r: usize) -> (WeightedMaxLinsatInstance, usize) {
    let field = PrimeField::new(3).unwrap();
    for seed in 0.. {
        let blocks = BlockStructure::contiguous(&[3, 3], vec![1.0, 1.8]).unwrap();
        let inst = WeightedMaxLinsatInstance::random(field, 4, blocks, r, 1000 + seed).unwrap();
        if inst.matrix().rank() == 4 && inst.matrix().dual_min_distance(CAP).unwrap().unwrap_or(usize::MAX) >= 4 {
            return (inst, 1);
        }
    }
    unreachable!()
}

/// `f̄ Σ g_t m_t + (φ/√p) wᵀAw / wᵀw`.
pub fn spectral_prediction(inst: &WeightedMaxLinsatInstance, stats: &CenteredStats, quotient: f64) -> f64 {
    let blocks = inst.blocks();
    let base: f64 = blocks
        .weights()
        .iter()
        .zip(blocks.sizes())
        .map(|(g, m)| g * m as f64)
        .sum();
    stats.mean * base + stats.objective_scale() * quotient
}

pub fn random_positive(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| 0.1 + rng.gen::<f64>()).collect()
}

pub fn random_polynomial(degree: usize, seed: u64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Dyadic coefficients keep the exact rational forms small.
    let coeffs = (0..=degree).map(|_| (rng.gen_range(-16i32..=16) as f64) / 8.0).collect::<Vec<_>>();
    let mut coeffs = coeffs;
    if coeffs[degree] == 0.0 {
        coeffs[degree] = 1.0;
    }
    Polynomial::new(coeffs).unwrap()
}

/// `Tr(P_y P(H_g)) / 2^n` from dense matrices; equals `r_y` when the
/// operators are independent, because distinct Paulis are trace-orthogonal.
pub fn trace_projection(h: &BlockPauliHamiltonian, poly: &Polynomial, y: &[bool]) -> f64 {
    let dense = h.dense().unwrap();
    let p_of_h = poly.eval_matrix(&dense);
    let op = h.product(y).unwrap().dense().unwrap();
    let dim = dense.nrows() as f64;
    let t: Complex64 = (op.adjoint() * p_of_h).trace();
    t.re / dim
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}
