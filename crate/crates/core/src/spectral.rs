//! The block-degree index set `T_l`, the spectral matrix `A` on it, its top
//! eigenpair, the product-form ansatz and the finite-size expectation formula.
//!
//! `T_l = {j ∈ ℤ^N : 0 ≤ j_t ≤ m_t, Σ_t j_t ≤ l}` in lexicographic order.
//! `A` couples `k` and `k + e_t` with weight `g_t √((k_t + 1)(m_t − k_t))`
//! and carries `κ Σ_t g_t j_t` on the diagonal.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::asymptotics::GammaSolution;
use crate::error::{check_cap, check_len, Error, Result};
use crate::problem::WeightedMaxLinsatInstance;

/// Default cap on `|T_l|`.
pub const DEFAULT_INDEX_CAP: u64 = 5_000_000;
/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 1_000_000;

/// `T_l` with its lexicographic index map.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeIndexSet {
    sizes: Vec<usize>,
    budget: usize,
    members: Vec<Vec<usize>>,
    index_of: HashMap<Vec<usize>, usize>,
}

impl DegreeIndexSet {
    pub fn enumerate(sizes: &[usize], budget: usize, cap: u64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("at least one block is required"));
        }
        check_cap(count_lattice(sizes, budget), cap)?;
        let mut members = Vec::new();
        let mut current = vec![0usize; sizes.len()];
        fill(sizes, budget, 0, &mut current, &mut members);
        let index_of = members
            .iter()
            .enumerate()
            .map(|(i, j)| (j.clone(), i))
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            budget,
            members,
            index_of,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> &[usize] {
        &self.members[index]
    }

    pub fn index_of(&self, degrees: &[usize]) -> Option<usize> {
        self.index_of.get(degrees).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(Vec::as_slice)
    }

    /// Index of `j + e_t`, if it lies in the set.
    pub fn raise(&self, index: usize, block: usize) -> Option<usize> {
        let mut j = self.members[index].clone();
        j[block] += 1;
        self.index_of(&j)
    }
}

fn count_lattice(sizes: &[usize], budget: usize) -> f64 {
    // Number of tuples with j_t ≤ m_t and Σ j_t ≤ budget, by convolution.
    let mut ways = vec![0.0f64; budget + 1];
    ways[0] = 1.0;
    for &m in sizes {
        let mut next = vec![0.0; budget + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for j in 0..=m.min(budget - s) {
                next[s + j] += w;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

fn fill(sizes: &[usize], remaining: usize, t: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if t == sizes.len() {
        out.push(current.clone());
        return;
    }
    for j in 0..=sizes[t].min(remaining) {
        current[t] = j;
        fill(sizes, remaining - j, t + 1, current, out);
    }
    current[t] = 0;
}

/// Sparse symmetric matrix `A^{(g,l,κ)}` on `T_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    index: DegreeIndexSet,
    weights: Vec<f64>,
    skew: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SpectralMatrix {
    pub fn build(index: DegreeIndexSet, weights: &[f64], skew: f64) -> Result<Self> {
        check_len(index.sizes().len(), weights.len())?;
        let rows = (0..index.len())
            .into_par_iter()
            .map(|row| {
                let j = index.get(row);
                let mut entries = Vec::with_capacity(2 * j.len() + 1);
                let diag = skew * weights.iter().zip(j).map(|(g, &jt)| g * jt as f64).sum::<f64>();
                if diag != 0.0 {
                    entries.push((row, diag));
                }
                for (t, &g) in weights.iter().enumerate() {
                    let m = index.sizes()[t] as f64;
                    if j[t] > 0 {
                        let mut k = j.to_vec();
                        k[t] -= 1;
                        let col = index.index_of(&k).expect("T_l is closed under lowering");
                        entries.push((col, g * (j[t] as f64 * (m - j[t] as f64 + 1.0)).sqrt()));
                    }
                    if let Some(col) = index.raise(row, t) {
                        let jt = j[t] as f64;
                        entries.push((col, g * ((jt + 1.0) * (m - jt)).sqrt()));
                    }
                }
                entries.sort_by_key(|e| e.0);
                entries
            })
            .collect();
        Ok(Self {
            index,
            weights: weights.to_vec(),
            skew,
            rows,
        })
    }

    /// Convenience: enumerate `T_l` and build.
    pub fn for_blocks(sizes: &[usize], weights: &[f64], budget: usize, skew: f64, cap: u64) -> Result<Self> {
        Self::build(DegreeIndexSet::enumerate(sizes, budget, cap)?, weights, skew)
    }

    pub fn index(&self) -> &DegreeIndexSet {
        &self.index
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn skew(&self) -> f64 {
        self.skew
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, row: usize) -> &[(usize, f64)] {
        &self.rows[row]
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .binary_search_by_key(&col, |e| e.0)
            .map_or(0.0, |k| self.rows[row][k].1)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(c, a)| a * v[c]).sum())
            .collect()
    }

    /// `wᵀAw / wᵀw`.
    pub fn rayleigh(&self, w: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        let norm: f64 = w.iter().map(|x| x * x).sum();
        if norm == 0.0 {
            return Err(Error::invalid("zero vector"));
        }
        let aw = self.matvec(w);
        Ok(w.iter().zip(&aw).map(|(a, b)| a * b).sum::<f64>() / norm)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                out[(i, j)] = a;
            }
        }
        out
    }

    /// Largest eigenvalue and a unit eigenvector, dense up to
    /// [`DENSE_LIMIT`] and by shifted power iteration beyond.
    pub fn lambda_max(&self) -> Result<EigenPair> {
        if self.dim() <= DENSE_LIMIT {
            Ok(self.lambda_max_dense())
        } else {
            self.lambda_max_power(POWER_TOL, POWER_MAX_ITER)
        }
    }

    pub fn lambda_max_dense(&self) -> EigenPair {
        let eig = SymmetricEigen::new(self.to_dense());
        let (k, &value) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("dimension is at least one");
        let vector = eig.eigenvectors.column(k).iter().copied().collect();
        EigenPair::new(value, vector)
    }

    /// Power iteration on `A + cI`, `c` one above the largest absolute row sum,
    /// started from the normalised all-ones vector.
    pub fn lambda_max_power(&self, tol: f64, max_iter: usize) -> Result<EigenPair> {
        let shift = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.1.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        let n = self.dim();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut previous = f64::NAN;
        for iter in 0..max_iter {
            let av = self.matvec(&v);
            let value: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
            let mut next: Vec<f64> = av.iter().zip(&v).map(|(a, x)| a + shift * x).collect();
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            next.iter_mut().for_each(|x| *x /= norm);
            v = next;
            if iter > 0 && (value - previous).abs() <= tol * value.abs().max(1.0) {
                let av = self.matvec(&v);
                let value = v.iter().zip(&av).map(|(a, b)| a * b).sum();
                return Ok(EigenPair::new(value, v));
            }
            previous = value;
        }
        Err(Error::NoConvergence { iterations: max_iter })
    }

    /// `max_{j∈T_l} Σ_t g_t((m_t − j_t)x_t + j_t/x_t + κ j_t)`, an upper bound
    /// on the largest eigenvalue for any positive `x`.
    pub fn collatz_wielandt_bound(&self, x: &[f64]) -> Result<f64> {
        check_len(self.weights.len(), x.len())?;
        if x.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("test vector must be positive"));
        }
        let sizes = self.index.sizes();
        Ok(self
            .index
            .iter()
            .map(|j| {
                (0..j.len())
                    .map(|t| {
                        let (m, jt) = (sizes[t] as f64, j[t] as f64);
                        self.weights[t] * ((m - jt) * x[t] + jt / x[t] + self.skew * jt)
                    })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `dim nnz` header followed by `row col value` triples in row order.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.dim(), self.nnz());
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                let _ = writeln!(out, "{i} {j} {a:.17e}");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

impl EigenPair {
    /// Normalises the vector and fixes its sign so the entries sum to a
    /// nonnegative number.
    fn new(value: f64, mut vector: Vec<f64>) -> Self {
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = if vector.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        vector.iter_mut().for_each(|x| *x *= sign / norm);
        Self { value, vector }
    }
}

/// Dual-distance hypotheses used by the finite-size results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceHypothesis {
    /// `2l < d⊥`: the block-symmetric states are orthonormal.
    Orthogonality,
    /// `2l + 1 < d⊥`: the expectation formula holds exactly.
    Expectation,
}

impl DistanceHypothesis {
    pub fn label(self) -> &'static str {
        match self {
            DistanceHypothesis::Orthogonality => "2l<d",
            DistanceHypothesis::Expectation => "2l+1<d",
        }
    }

    /// `dual_distance = None` means the dual code is trivial.
    pub fn holds(self, budget: usize, dual_distance: Option<usize>) -> bool {
        let Some(d) = dual_distance else { return true };
        match self {
            DistanceHypothesis::Orthogonality => 2 * budget < d,
            DistanceHypothesis::Expectation => 2 * budget + 1 < d,
        }
    }

    pub fn check(self, budget: usize, dual_distance: Option<usize>) -> Result<()> {
        if self.holds(budget, dual_distance) {
            return Ok(());
        }
        Err(Error::MinDistanceViolated {
            l: budget,
            distance: dual_distance.unwrap_or(usize::MAX),
            needed: match self {
                DistanceHypothesis::Orthogonality => 2 * budget + 1,
                DistanceHypothesis::Expectation => 2 * budget + 2,
            },
        })
    }

    /// Largest `l` for which the hypothesis holds.
    pub fn max_budget(self, dual_distance: Option<usize>, limit: usize) -> usize {
        (0..=limit)
            .rev()
            .find(|&l| self.holds(l, dual_distance))
            .unwrap_or(0)
    }
}

/// Product-form coefficients `w_j = Π_t a^{(t)}_{j_t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCoefficients {
    /// `a^{(t)}_j` for `j = 0..=m_t`.
    pub factors: Vec<Vec<f64>>,
    /// Window tops `J_t`.
    pub peaks: Vec<usize>,
    /// Window widths `r_t`.
    pub widths: Vec<usize>,
}

impl AnsatzCoefficients {
    /// The coefficient vector on `T_l`.
    pub fn tensor(&self, index: &DegreeIndexSet) -> Vec<f64> {
        index
            .iter()
            .map(|j| {
                j.iter()
                    .zip(&self.factors)
                    .map(|(&jt, a)| a.get(jt).copied().unwrap_or(0.0))
                    .product()
            })
            .collect()
    }
}

/// Flat-window ansatz: `J_t = ⌊α_t m_t⌋`, `r_t = ⌊√J_t⌋`, and
/// `a^{(t)} = r_t^{-1/2}` on `{J_t − r_t + 1, …, J_t}`; `a^{(t)} = δ_0` when
/// `J_t = 0`.
pub fn product_ansatz(sizes: &[usize], budget: usize, solution: &GammaSolution) -> Result<AnsatzCoefficients> {
    check_len(sizes.len(), solution.alphas.len())?;
    let mut peaks: Vec<usize> = sizes
        .iter()
        .zip(&solution.alphas)
        .map(|(&m, &a)| ((a * m as f64 + 1e-9).floor() as usize).min(m))
        .collect();
    while peaks.iter().sum::<usize>() > budget {
        let t = (0..peaks.len()).max_by_key(|&t| peaks[t]).expect("nonempty");
        peaks[t] -= 1;
    }
    Ok(windows(sizes, &peaks))
}

fn windows(sizes: &[usize], peaks: &[usize]) -> AnsatzCoefficients {
    let widths: Vec<usize> = peaks.iter().map(|&j| (j as f64).sqrt().floor() as usize).collect();
    let factors = sizes
        .iter()
        .zip(peaks.iter().zip(&widths))
        .map(|(&m, (&peak, &width))| {
            let mut a = vec![0.0; m + 1];
            if peak == 0 {
                a[0] = 1.0;
            } else {
                let value = 1.0 / (width as f64).sqrt();
                for slot in &mut a[peak + 1 - width..=peak] {
                    *slot = value;
                }
            }
            a
        })
        .collect();
    AnsatzCoefficients {
        factors,
        peaks: peaks.to_vec(),
        widths,
    }
}

/// Ansatz for `μ = l/m`, solving the Γ program on the block densities.
pub fn product_ansatz_for(sizes: &[usize], weights: &[f64], budget: usize, skew: f64) -> Result<AnsatzCoefficients> {
    let m: usize = sizes.iter().sum();
    if budget == 0 {
        return Ok(windows(sizes, &vec![0; sizes.len()]));
    }
    let densities: Vec<f64> = sizes.iter().map(|&s| s as f64 / m as f64).collect();
    let mu = (budget as f64 / m as f64).min(1.0 - 1e-12);
    let solution = crate::asymptotics::gamma_functional(weights, &densities, skew, mu)?;
    product_ansatz(sizes, budget, &solution)
}

/// `⟨s⟩ = f̄ Σ_t g_t m_t + (φ/√p) wᵀAw/wᵀw`.
///
/// With `strict` set, the dual distance is enumerated (under `cap`) and the
/// call fails unless `2l + 1 < d⊥`.
pub fn expected_value(
    inst: &WeightedMaxLinsatInstance,
    matrix: &SpectralMatrix,
    w: &[f64],
    strict: bool,
    cap: u64,
) -> Result<f64> {
    let blocks = inst.blocks();
    if matrix.index().sizes() != blocks.sizes().as_slice() || matrix.weights() != blocks.weights() {
        return Err(Error::invalid("spectral matrix does not match the instance blocks"));
    }
    let stats = inst.centered_stats();
    if (matrix.skew() - stats.skew).abs() > 1e-12 {
        return Err(Error::invalid("spectral matrix skew does not match the instance"));
    }
    if strict {
        let d = inst.matrix().dual_min_distance(cap)?;
        DistanceHypothesis::Expectation.check(matrix.index().budget(), d)?;
    }
    Ok(stats.mean * blocks.total_weight() + stats.objective_scale() * matrix.rayleigh(w)?)
}
