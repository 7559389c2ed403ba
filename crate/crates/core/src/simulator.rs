//! Dense state-vector construction of multivariate DQI states.
//!
//! Two independent routes build the same state:
//!
//! * the direct route evaluates `Σ_j w_j |P(j)⟩` in the computational basis,
//!   where `|P(j)⟩ ∝ Σ_x Π_t e_{j_t}(h-values of block t at x) |x⟩` and `e_k`
//!   is the elementary symmetric polynomial;
//! * the Fourier route enumerates weighted error patterns `y`, places their
//!   amplitudes on the syndromes `Bᵀy`, discards patterns the decoder gets
//!   wrong, and applies the inverse Fourier transform over 𝔽_p^n.
//!
//! Basis states are indexed in mixed radix with `x_0` most significant.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::decoding::SyndromeDecoder;
use crate::error::{check_cap, check_len, Error, Result};
use crate::krawtchouk::{binomial_f64, kraw_table_f64};
use crate::layers::{for_each_error, layer_size};
use crate::problem::{
    index_to_vector, root_of_unity, vector_to_index, CenteredStats, WeightedMaxLinsatInstance,
};
use crate::spectral::{DegreeIndexSet, DistanceHypothesis};

/// Default cap on the state dimension `p^n`.
pub const DEFAULT_STATE_CAP: u64 = 1 << 22;

/// Complex amplitudes over `𝔽_p^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    p: u32,
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(p: u32, n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_len((p as usize).pow(n as u32), amps.len())?;
        Ok(Self { p, n, amps })
    }

    pub fn uniform(p: u32, n: usize) -> Self {
        let dim = (p as usize).pow(n as u32);
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            p,
            n,
            amps: vec![a; dim],
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, x: &[u32]) -> Complex64 {
        self.amps[vector_to_index(x, self.p) as usize]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// Scales to unit norm; fails on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sq().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Inconsistent("cannot normalise a zero state".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    /// Rotates the global phase so the largest-magnitude amplitude is real
    /// and positive. Ties go to the lowest index.
    pub fn phase_aligned(mut self) -> Self {
        let mut best = 0;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > self.amps[best].norm() + 1e-12 {
                best = i;
            }
        }
        let pivot = self.amps[best];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            self.amps.iter_mut().for_each(|a| *a *= phase);
        }
        self
    }

    /// Largest amplitude-wise distance after aligning both global phases.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let a = self.clone().phase_aligned();
        let b = other.clone().phase_aligned();
        a.amps
            .iter()
            .zip(&b.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// `p n` header, then `index re im` for each amplitude above `1e-14`.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.p, self.n);
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > 1e-14 {
                let _ = writeln!(out, "{i} {:.17e} {:.17e}", a.re, a.im);
            }
        }
        out
    }
}

/// Quantum Fourier transform over `𝔽_p^n`, one radix-`p` pass per
/// coordinate. `inverse` selects `ω^{-sx}`.
pub fn fourier_transform(p: u32, n: usize, input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let p = p as usize;
    let sign = if inverse { -1 } else { 1 };
    let table: Vec<Complex64> = (0..p).map(|k| root_of_unity(p, sign * k as i64)).collect();
    let scale = 1.0 / (p as f64).sqrt();
    let mut data = input.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); p];
    for axis in 0..n {
        let stride = p.pow((n - 1 - axis) as u32);
        let block = stride * p;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                for (a, slot) in scratch.iter_mut().enumerate() {
                    *slot = (0..p)
                        .map(|s| table[(a * s) % p] * data[base + offset + s * stride])
                        .sum::<Complex64>()
                        * scale;
                }
                for (a, &v) in scratch.iter().enumerate() {
                    data[base + offset + a * stride] = v;
                }
            }
        }
    }
    data
}

fn check_dim(inst: &WeightedMaxLinsatInstance, cap: u64) -> Result<()> {
    check_cap((inst.p() as f64).powi(inst.n() as i32), cap)
}

/// Elementary symmetric polynomials `e_0..=e_{degree}` of `values`.
pub fn elementary_symmetric(values: impl IntoIterator<Item = f64>, degree: usize) -> Vec<f64> {
    let mut e = vec![0.0; degree + 1];
    e[0] = 1.0;
    let mut seen = 0usize;
    for v in values {
        seen += 1;
        for k in (1..=degree.min(seen)).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// Per-block elementary symmetric polynomials of the `h`-values at `x`.
fn block_polynomials(
    inst: &WeightedMaxLinsatInstance,
    stats: &CenteredStats,
    x: &[u32],
    degrees: &[usize],
) -> Vec<Vec<f64>> {
    let bx = inst.matrix().mul_vec(x).expect("x has length n");
    degrees
        .iter()
        .enumerate()
        .map(|(t, &d)| {
            elementary_symmetric(inst.blocks().members(t).iter().map(|&i| stats.h(i, bx[i])), d)
        })
        .collect()
}

/// `(p^n Π_t C(m_t, j_t))^{-1/2}`.
fn basis_normalizer(inst: &WeightedMaxLinsatInstance, j: &[usize]) -> f64 {
    let sizes = inst.blocks().sizes();
    let binoms: f64 = sizes.iter().zip(j).map(|(&m, &k)| binomial_f64(m, k)).product();
    1.0 / ((inst.p() as f64).powi(inst.n() as i32) * binoms).sqrt()
}

fn check_blocks(inst: &WeightedMaxLinsatInstance, index: &DegreeIndexSet) -> Result<()> {
    if index.sizes() != inst.blocks().sizes().as_slice() {
        return Err(Error::invalid("degree index set does not match the instance blocks"));
    }
    Ok(())
}

/// `|P(j)⟩` evaluated through elementary symmetric polynomials.
pub fn block_symmetric_state(inst: &WeightedMaxLinsatInstance, j: &[usize], cap: u64) -> Result<StateVector> {
    check_dim(inst, cap)?;
    let sizes = inst.blocks().sizes();
    check_len(sizes.len(), j.len())?;
    if j.iter().zip(&sizes).any(|(a, b)| a > b) {
        return Err(Error::invalid("block degree exceeds block size"));
    }
    let stats = inst.centered_stats();
    let norm = basis_normalizer(inst, j);
    let (p, n) = (inst.p() as u32, inst.n());
    let amps = (0..(p as u64).pow(n as u32))
        .into_par_iter()
        .map(|idx| {
            let x = index_to_vector(idx, p, n);
            let e = block_polynomials(inst, &stats, &x, j);
            let value: f64 = e.iter().zip(j).map(|(e, &k)| e[k]).product();
            Complex64::new(norm * value, 0.0)
        })
        .collect();
    StateVector::new(p, n, amps)
}

/// 𝔽₂ form of `|P(j)⟩`: amplitude `Π_t K_{j_t}(q_t(x); m_t)` times the
/// normaliser, with `q_t(x) = |(Bx − v)_{S_t}|`.
pub fn block_symmetric_state_binary(inst: &WeightedMaxLinsatInstance, j: &[usize], cap: u64) -> Result<StateVector> {
    if inst.p() != 2 {
        return Err(Error::invalid("the Krawtchouk form needs p = 2"));
    }
    check_dim(inst, cap)?;
    let sizes = inst.blocks().sizes();
    check_len(sizes.len(), j.len())?;
    let tables: Vec<Vec<Vec<f64>>> = sizes.iter().map(|&m| kraw_table_f64(m)).collect();
    let norm = basis_normalizer(inst, j);
    let n = inst.n();
    let amps = (0..1u64 << n)
        .into_par_iter()
        .map(|idx| {
            let q = unsatisfied_per_block(inst, &index_to_vector(idx, 2, n));
            let value: f64 = (0..j.len()).map(|t| tables[t][j[t]][q[t]]).product();
            Complex64::new(norm * value, 0.0)
        })
        .collect();
    StateVector::new(2, n, amps)
}

/// `q_t(x)`: number of violated constraints in each block.
pub fn unsatisfied_per_block(inst: &WeightedMaxLinsatInstance, x: &[u32]) -> Vec<usize> {
    let sat = inst.block_satisfied(x).expect("x has length n");
    sat.iter()
        .enumerate()
        .map(|(t, &s)| inst.blocks().members(t).len() - s)
        .collect()
}

/// Every `|P(j)⟩` for `j ∈ T_l`, in index order.
pub fn basis_states(inst: &WeightedMaxLinsatInstance, index: &DegreeIndexSet, cap: u64) -> Result<Vec<StateVector>> {
    check_dim(inst, cap)?;
    check_blocks(inst, index)?;
    let stats = inst.centered_stats();
    let (p, n) = (inst.p() as u32, inst.n());
    let degrees = max_degrees(index);
    let norms: Vec<f64> = index.iter().map(|j| basis_normalizer(inst, j)).collect();
    let columns: Vec<Vec<f64>> = (0..(p as u64).pow(n as u32))
        .into_par_iter()
        .map(|idx| {
            let e = block_polynomials(inst, &stats, &index_to_vector(idx, p, n), &degrees);
            index
                .iter()
                .zip(&norms)
                .map(|(j, nm)| nm * j.iter().enumerate().map(|(t, &k)| e[t][k]).product::<f64>())
                .collect()
        })
        .collect();
    (0..index.len())
        .map(|k| StateVector::new(p, n, columns.iter().map(|c| Complex64::new(c[k], 0.0)).collect()))
        .collect()
}

fn max_degrees(index: &DegreeIndexSet) -> Vec<usize> {
    (0..index.sizes().len())
        .map(|t| index.iter().map(|j| j[t]).max().unwrap_or(0))
        .collect()
}

/// Gram matrix `⟨P(j)|P(k)⟩` of a family of states.
pub fn gram_matrix(states: &[StateVector]) -> Vec<Vec<Complex64>> {
    states
        .iter()
        .map(|a| states.iter().map(|b| a.inner(b)).collect())
        .collect()
}

/// `Σ_j w_j |P(j)⟩`, renormalised.
pub fn dqi_state_direct(
    inst: &WeightedMaxLinsatInstance,
    index: &DegreeIndexSet,
    w: &[f64],
    cap: u64,
) -> Result<StateVector> {
    check_dim(inst, cap)?;
    check_blocks(inst, index)?;
    check_len(index.len(), w.len())?;
    let stats = inst.centered_stats();
    let (p, n) = (inst.p() as u32, inst.n());
    let degrees = max_degrees(index);
    let coeffs: Vec<f64> = index
        .iter()
        .zip(w)
        .map(|(j, wj)| wj * basis_normalizer(inst, j))
        .collect();
    let amps = (0..(p as u64).pow(n as u32))
        .into_par_iter()
        .map(|idx| {
            let e = block_polynomials(inst, &stats, &index_to_vector(idx, p, n), &degrees);
            let value: f64 = index
                .iter()
                .zip(&coeffs)
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| c * j.iter().enumerate().map(|(t, &k)| e[t][k]).product::<f64>())
                .sum();
            Complex64::new(value, 0.0)
        })
        .collect();
    StateVector::new(p, n, amps)?.normalized()
}

/// Multiplies each amplitude by `Σ_{i∈S_t} h_i(b_i·x)`.
pub fn apply_block_operator(inst: &WeightedMaxLinsatInstance, block: usize, state: &StateVector) -> StateVector {
    let stats = inst.centered_stats();
    let (p, n) = (state.p(), state.n());
    let amps = state
        .amplitudes()
        .par_iter()
        .enumerate()
        .map(|(idx, a)| {
            let x = index_to_vector(idx as u64, p, n);
            let bx = inst.matrix().mul_vec(&x).expect("x has length n");
            let sum: f64 = inst.blocks().members(block).iter().map(|&i| stats.h(i, bx[i])).sum();
            a * sum
        })
        .collect();
    StateVector { p, n, amps }
}

/// A decoded error pattern: its layer in `T_l`, its syndrome index and its
/// support.
#[derive(Debug, Clone)]
struct PlanEntry {
    syndrome: usize,
    support: Vec<(usize, u32)>,
}

/// Fourier-route enumeration, independent of the targets `L_i` and of `w`.
///
/// For each `j ∈ T_l` the plan stores the patterns `y ∈ E_j` that the decoder
/// recovers from `Bᵀy`, together with the layer sizes `|E_j|`.
#[derive(Debug, Clone)]
pub struct FourierPlan {
    p: u32,
    n: usize,
    index: DegreeIndexSet,
    layers: Vec<Vec<PlanEntry>>,
    layer_sizes: Vec<f64>,
}

impl FourierPlan {
    /// Enumerates every layer of `index` and keeps the correctly decoded
    /// patterns. `cap` bounds both `Σ_j |E_j|` and `p^n`.
    pub fn new(
        inst: &WeightedMaxLinsatInstance,
        index: &DegreeIndexSet,
        decoder: &dyn SyndromeDecoder,
        cap: u64,
    ) -> Result<Self> {
        check_dim(inst, cap)?;
        check_blocks(inst, index)?;
        let p = inst.p() as u32;
        let sizes = inst.blocks().sizes();
        let layer_sizes: Vec<f64> = index.iter().map(|j| layer_size(&sizes, j, p)).collect();
        check_cap(layer_sizes.iter().sum(), cap)?;
        let members: Vec<Vec<usize>> = (0..sizes.len())
            .map(|t| inst.blocks().members(t).to_vec())
            .collect();
        let layers = (0..index.len())
            .into_par_iter()
            .map(|k| {
                let mut kept = Vec::new();
                let mut failure = None;
                for_each_error(&members, index.get(k), p, |support| {
                    if failure.is_some() {
                        return;
                    }
                    let y = crate::layers::dense(support, inst.m());
                    let s = inst.matrix().syndrome(&y).expect("y has length m");
                    match decoder.decode(&s) {
                        Ok(decoded) if decoded == y => kept.push(PlanEntry {
                            syndrome: vector_to_index(&s, p) as usize,
                            support: support.to_vec(),
                        }),
                        Ok(_) | Err(Error::DecodingFailure) => {}
                        Err(e) => failure = Some(e),
                    }
                });
                match failure {
                    Some(e) => Err(e),
                    None => Ok(kept),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            p,
            n: inst.n(),
            index: index.clone(),
            layers,
            layer_sizes,
        })
    }

    pub fn index(&self) -> &DegreeIndexSet {
        &self.index
    }

    /// `γ_j = 1 − |D_j|/|E_j|` for every layer.
    pub fn failure_rates(&self) -> Vec<f64> {
        self.layers
            .iter()
            .zip(&self.layer_sizes)
            .map(|(kept, size)| 1.0 - kept.len() as f64 / size)
            .collect()
    }

    /// Fourier-domain amplitudes `Σ_j w_j/√|E_j|·Σ_{y∈D_j} Π_i χ̃_i(y_i) |Bᵀy⟩`.
    ///
    /// Layers are accumulated sequentially in index order so the result is
    /// reproducible bit for bit.
    pub fn spectrum(&self, stats: &CenteredStats, w: &[f64]) -> Result<Vec<Complex64>> {
        check_len(self.index.len(), w.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); (self.p as usize).pow(self.n as u32)];
        let sizes = self.index.sizes();
        for (k, kept) in self.layers.iter().enumerate() {
            if w[k] == 0.0 {
                continue;
            }
            let binoms: f64 = sizes
                .iter()
                .zip(self.index.get(k))
                .map(|(&m, &j)| binomial_f64(m, j))
                .product();
            let coeff = w[k] / binoms.sqrt();
            for entry in kept {
                let phase: Complex64 = entry
                    .support
                    .iter()
                    .map(|&(i, v)| stats.chi_tilde(i, v))
                    .product();
                out[entry.syndrome] += phase * coeff;
            }
        }
        Ok(out)
    }

    /// Runs the full route for targets `stats` and coefficients `w`.
    pub fn construct(&self, stats: &CenteredStats, w: &[f64]) -> Result<FourierOutcome> {
        let spectrum = self.spectrum(stats, w)?;
        let kept_norm_sq = spectrum.iter().map(Complex64::norm_sqr).sum();
        let amps = fourier_transform(self.p, self.n, &spectrum, true);
        let state = StateVector::new(self.p, self.n, amps)?.normalized()?;
        Ok(FourierOutcome { state, kept_norm_sq })
    }
}

#[derive(Debug, Clone)]
pub struct FourierOutcome {
    /// The normalised output state.
    pub state: StateVector,
    /// Squared norm before normalisation.
    pub kept_norm_sq: f64,
}

/// Fourier-route construction of `Σ_j w_j |P(j)⟩` with the given decoder.
pub fn fourier_construction(
    inst: &WeightedMaxLinsatInstance,
    index: &DegreeIndexSet,
    w: &[f64],
    decoder: &dyn SyndromeDecoder,
    cap: u64,
) -> Result<FourierOutcome> {
    FourierPlan::new(inst, index, decoder, cap)?.construct(&inst.centered_stats(), w)
}

/// `Σ_x |amp(x)|² F_g(x) / Σ_x |amp(x)|²`.
pub fn exact_expectation(inst: &WeightedMaxLinsatInstance, state: &StateVector) -> Result<f64> {
    if state.p() as usize != inst.p() || state.n() != inst.n() {
        return Err(Error::invalid("state does not match the instance"));
    }
    let (p, n) = (state.p(), state.n());
    let (num, den) = state
        .amplitudes()
        .par_iter()
        .enumerate()
        .map(|(idx, a)| {
            let prob = a.norm_sqr();
            if prob == 0.0 {
                return (0.0, 0.0);
            }
            let value = inst
                .evaluate_objective(&index_to_vector(idx as u64, p, n))
                .expect("x has length n");
            (prob * value, prob)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(num / den)
}

/// Flat combination over the rectangle `R = Π_t {J_t + 1, …, J_t + r_t − 1}`.
#[derive(Debug, Clone)]
pub struct RectangularState {
    pub index: DegreeIndexSet,
    pub weights: Vec<f64>,
    pub state: StateVector,
}

/// `|ρ_{J,r}⟩`. With `strict` set the call fails unless
/// `2(Σ_t J_t + Σ_t r_t + 1) < d⊥`.
pub fn rho_jr_state(
    inst: &WeightedMaxLinsatInstance,
    peaks: &[usize],
    widths: &[usize],
    strict: bool,
    cap: u64,
) -> Result<RectangularState> {
    let sizes = inst.blocks().sizes();
    check_len(sizes.len(), peaks.len())?;
    check_len(sizes.len(), widths.len())?;
    if widths.iter().any(|&r| r < 2) {
        return Err(Error::invalid("rectangle widths must be at least 2"));
    }
    if (0..sizes.len()).any(|t| peaks[t] + widths[t] - 1 > sizes[t]) {
        return Err(Error::invalid("rectangle exceeds a block size"));
    }
    if strict {
        let d = inst.matrix().dual_min_distance(cap)?;
        let reach = peaks.iter().sum::<usize>() + widths.iter().sum::<usize>() + 1;
        if d.is_some_and(|d| 2 * reach >= d) {
            return Err(Error::MinDistanceViolated {
                l: reach,
                distance: d.unwrap_or(usize::MAX),
                needed: 2 * reach + 1,
            });
        }
    }
    let budget: usize = peaks.iter().zip(widths).map(|(j, r)| j + r - 1).sum();
    let index = DegreeIndexSet::enumerate(&sizes, budget, cap)?;
    let count: usize = widths.iter().map(|r| r - 1).product();
    let value = 1.0 / (count as f64).sqrt();
    let weights: Vec<f64> = index
        .iter()
        .map(|j| {
            let inside = (0..j.len()).all(|t| j[t] > peaks[t] && j[t] < peaks[t] + widths[t]);
            if inside {
                value
            } else {
                0.0
            }
        })
        .collect();
    let state = dqi_state_direct(inst, &index, &weights, cap)?;
    Ok(RectangularState {
        index,
        weights,
        state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub epsilon: f64,
    /// `β_t = ½ − √(α_t(1 − α_t))` with `α_t = J_t/m_t`.
    pub centers: Vec<f64>,
    /// Probability mass on `S_ε`.
    pub mass: f64,
    /// `|S_ε|`.
    pub count: u64,
    /// Expected `F_g/m` conditioned on landing in `S_ε`.
    pub conditional_mean: f64,
    /// `Σ_t 2 g_t θ_t √(α_t(1 − α_t))`.
    pub predicted: f64,
}

/// Measures `|ρ_{J,r}⟩` against `S_ε = {x : |q_t(x)/m_t − β_t| ≤ ε ∀t}`.
pub fn concentration_experiment(
    inst: &WeightedMaxLinsatInstance,
    peaks: &[usize],
    widths: &[usize],
    epsilon: f64,
    cap: u64,
) -> Result<ConcentrationReport> {
    if inst.p() != 2 {
        return Err(Error::invalid("concentration experiments need p = 2"));
    }
    let rect = rho_jr_state(inst, peaks, widths, false, cap)?;
    concentration_of_state(inst, &rect.state, peaks, epsilon)
}

/// Concentration statistics of an arbitrary 𝔽₂ state around the centres set
/// by `peaks`.
pub fn concentration_of_state(
    inst: &WeightedMaxLinsatInstance,
    state: &StateVector,
    peaks: &[usize],
    epsilon: f64,
) -> Result<ConcentrationReport> {
    let sizes = inst.blocks().sizes();
    check_len(sizes.len(), peaks.len())?;
    let alphas: Vec<f64> = peaks.iter().zip(&sizes).map(|(&j, &m)| j as f64 / m as f64).collect();
    let centers: Vec<f64> = alphas.iter().map(|a| 0.5 - (a * (1.0 - a)).sqrt()).collect();
    let m = inst.m() as f64;
    let predicted: f64 = alphas
        .iter()
        .zip(inst.blocks().weights())
        .zip(&sizes)
        .map(|((a, g), &mt)| 2.0 * g * (mt as f64 / m) * (a * (1.0 - a)).sqrt())
        .sum();
    let n = inst.n();
    let total = state.norm_sq();
    let (mass, count, weighted) = state
        .amplitudes()
        .par_iter()
        .enumerate()
        .map(|(idx, a)| {
            let x = index_to_vector(idx as u64, 2, n);
            let q = unsatisfied_per_block(inst, &x);
            let inside = q
                .iter()
                .zip(&sizes)
                .zip(&centers)
                .all(|((&q, &mt), b)| (q as f64 / mt as f64 - b).abs() <= epsilon);
            if !inside {
                return (0.0, 0u64, 0.0);
            }
            let prob = a.norm_sqr() / total;
            let value = inst.evaluate_objective(&x).expect("x has length n") / m;
            (prob, 1, prob * value)
        })
        .reduce(|| (0.0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(ConcentrationReport {
        epsilon,
        centers,
        mass,
        count,
        conditional_mean: if mass > 0.0 { weighted / mass } else { f64::NAN },
        predicted,
    })
}

/// Largest `l` for which the chosen hypothesis holds, capped by `limit`.
pub fn admissible_budget(
    inst: &WeightedMaxLinsatInstance,
    hypothesis: DistanceHypothesis,
    limit: usize,
    cap: u64,
) -> Result<usize> {
    let d = inst.matrix().dual_min_distance(cap)?;
    Ok(hypothesis.max_budget(d, limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldMatrix, PrimeField};
    use crate::problem::BlockStructure;

    fn single() -> WeightedMaxLinsatInstance {
        let b = FieldMatrix::from_rows(PrimeField::new(2).unwrap(), &[vec![1]]).unwrap();
        WeightedMaxLinsatInstance::binary(b, &[0], BlockStructure::uniform(1).unwrap()).unwrap()
    }

    #[test]
    fn degree_zero_is_uniform() {
        let inst = WeightedMaxLinsatInstance::random(
            PrimeField::new(3).unwrap(),
            3,
            BlockStructure::contiguous(&[2, 3], vec![1.0, 2.0]).unwrap(),
            1,
            1,
        )
        .unwrap();
        let s = block_symmetric_state(&inst, &[0, 0], DEFAULT_STATE_CAP).unwrap();
        assert!(s.distance_up_to_phase(&StateVector::uniform(3, 3)) < 1e-15);
    }

    #[test]
    fn single_constraint_first_degree() {
        let s = block_symmetric_state(&single(), &[1], DEFAULT_STATE_CAP).unwrap();
        let h = 0.5f64.sqrt();
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[1].re + h).abs() < 1e-15);
    }

    #[test]
    fn binary_form_matches_symmetric_polynomials() {
        let blocks = BlockStructure::contiguous(&[4, 3], vec![1.0, 2.0]).unwrap();
        let inst = WeightedMaxLinsatInstance::random(PrimeField::new(2).unwrap(), 5, blocks, 1, 3).unwrap();
        for j in [[0, 0], [1, 2], [3, 1], [4, 3]] {
            let a = block_symmetric_state(&inst, &j, DEFAULT_STATE_CAP).unwrap();
            let b = block_symmetric_state_binary(&inst, &j, DEFAULT_STATE_CAP).unwrap();
            assert!(a.distance_up_to_phase(&b) < 1e-12);
        }
    }

    #[test]
    fn fourier_roundtrip_preserves_norm() {
        let data: Vec<Complex64> = (0..27).map(|k| Complex64::new(k as f64, (k * k % 5) as f64)).collect();
        let fwd = fourier_transform(3, 3, &data, false);
        let back = fourier_transform(3, 3, &fwd, true);
        let n0: f64 = data.iter().map(Complex64::norm_sqr).sum();
        let n1: f64 = fwd.iter().map(Complex64::norm_sqr).sum();
        assert!((n0 - n1).abs() < 1e-10 * n0);
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn elementary_symmetric_small() {
        assert_eq!(elementary_symmetric([1.0, 2.0, 3.0], 3), vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elementary_symmetric([1.0, 2.0], 3), vec![1.0, 3.0, 2.0, 0.0]);
    }

    #[test]
    fn phase_alignment() {
        let s = StateVector::new(2, 1, vec![Complex64::new(0.0, 0.6), Complex64::new(0.0, -0.8)]).unwrap();
        let a = s.phase_aligned();
        assert!((a.amplitudes()[1] - Complex64::new(0.8, 0.0)).norm() < 1e-15);
        assert!((a.amplitudes()[0] - Complex64::new(-0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dump_skips_zeros() {
        let s = StateVector::new(2, 1, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(s.dump().lines().count(), 2);
        assert!(s.dump().starts_with("2 1\n0 "));
    }
}
