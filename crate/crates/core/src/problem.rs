//! Weighted Max-LINSAT instances with a block weight structure.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_cap, check_len, Error, Result};
use crate::field::{join, parse_numbers, FieldMatrix, PrimeField};

/// Partition of the constraint indices into weighted blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    assignment: Vec<usize>,
    weights: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl BlockStructure {
    /// `assignment[i]` is the block of constraint `i`; every block must be
    /// non-empty and every weight positive and finite.
    pub fn new(assignment: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("at least one block is required"));
        }
        if let Some(g) = weights.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::invalid(format!("block weight {g} is not positive")));
        }
        let mut members = vec![Vec::new(); weights.len()];
        for (i, &t) in assignment.iter().enumerate() {
            members
                .get_mut(t)
                .ok_or_else(|| Error::invalid(format!("block id {t} out of range")))?
                .push(i);
        }
        if let Some(t) = members.iter().position(Vec::is_empty) {
            return Err(Error::invalid(format!("block {t} is empty")));
        }
        Ok(Self {
            assignment,
            weights,
            members,
        })
    }

    /// Consecutive blocks of the given sizes.
    pub fn contiguous(sizes: &[usize], weights: Vec<f64>) -> Result<Self> {
        check_len(sizes.len(), weights.len())?;
        let assignment = sizes
            .iter()
            .enumerate()
            .flat_map(|(t, &s)| std::iter::repeat(t).take(s))
            .collect();
        Self::new(assignment, weights)
    }

    /// A single block of weight one.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::contiguous(&[m], vec![1.0])
    }

    pub fn block_count(&self) -> usize {
        self.weights.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_of(&self, constraint: usize) -> usize {
        self.assignment[constraint]
    }

    pub fn members(&self, block: usize) -> &[usize] {
        &self.members[block]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        let m = self.constraint_count() as f64;
        self.members.iter().map(|s| s.len() as f64 / m).collect()
    }

    /// `Σ_t g_t m_t`, the largest possible objective value.
    pub fn total_weight(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.members)
            .map(|(g, s)| g * s.len() as f64)
            .sum()
    }
}

/// Weighted Max-LINSAT: maximise `Σ_t g_t Σ_{i∈S_t} f_i(b_i·x)` where
/// `f_i = +1` on `L_i` and `-1` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMaxLinsatInstance {
    matrix: FieldMatrix,
    targets: Vec<Vec<u32>>,
    membership: Vec<Vec<bool>>,
    target_size: usize,
    blocks: BlockStructure,
}

impl WeightedMaxLinsatInstance {
    pub fn new(matrix: FieldMatrix, targets: Vec<Vec<u32>>, blocks: BlockStructure) -> Result<Self> {
        let field = matrix.field();
        let p = field.order();
        check_len(matrix.rows(), targets.len())?;
        check_len(matrix.rows(), blocks.constraint_count())?;
        let mut membership = Vec::with_capacity(targets.len());
        let mut sorted_targets = Vec::with_capacity(targets.len());
        let target_size = targets.first().map_or(0, Vec::len);
        for (i, set) in targets.into_iter().enumerate() {
            let mut mask = vec![false; p];
            for &y in &set {
                field.check_element(y)?;
                if std::mem::replace(&mut mask[y as usize], true) {
                    return Err(Error::invalid(format!("target set {i} repeats {y}")));
                }
            }
            if set.len() != target_size {
                return Err(Error::NonUniformTargets {
                    index: i,
                    expected: target_size,
                    found: set.len(),
                });
            }
            let mut set = set;
            set.sort_unstable();
            sorted_targets.push(set);
            membership.push(mask);
        }
        if target_size == 0 || target_size >= p {
            return Err(Error::invalid(format!(
                "target size r = {target_size} must satisfy 1 <= r <= p - 1"
            )));
        }
        Ok(Self {
            matrix,
            targets: sorted_targets,
            membership,
            target_size,
            blocks,
        })
    }

    /// 𝔽₂ instance with `L_i = {v_i}`.
    pub fn binary(matrix: FieldMatrix, v: &[u32], blocks: BlockStructure) -> Result<Self> {
        let targets = v.iter().map(|&vi| vec![vi]).collect();
        Self::new(matrix, targets, blocks)
    }

    pub fn field(&self) -> PrimeField {
        self.matrix.field()
    }

    pub fn p(&self) -> usize {
        self.field().order()
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn r(&self) -> usize {
        self.target_size
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn targets(&self) -> &[Vec<u32>] {
        &self.targets
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    /// For 𝔽₂ instances, the vector `v` with `L_i = {v_i}`.
    pub fn binary_targets(&self) -> Option<Vec<u32>> {
        (self.p() == 2).then(|| self.targets.iter().map(|s| s[0]).collect())
    }

    pub fn is_satisfied(&self, constraint: usize, value: u32) -> bool {
        self.membership[constraint][value as usize]
    }

    /// `f_i(value) ∈ {+1, -1}`.
    pub fn constraint_value(&self, constraint: usize, value: u32) -> f64 {
        if self.is_satisfied(constraint, value) {
            1.0
        } else {
            -1.0
        }
    }

    /// Number of satisfied constraints in each block.
    pub fn block_satisfied(&self, x: &[u32]) -> Result<Vec<usize>> {
        let bx = self.matrix.mul_vec(x)?;
        let mut counts = vec![0usize; self.blocks.block_count()];
        for (i, &value) in bx.iter().enumerate() {
            if self.is_satisfied(i, value) {
                counts[self.blocks.block_of(i)] += 1;
            }
        }
        Ok(counts)
    }

    /// `F_g(x)`.
    pub fn evaluate_objective(&self, x: &[u32]) -> Result<f64> {
        let counts = self.block_satisfied(x)?;
        Ok(self.objective_from_counts(&counts))
    }

    /// `Σ_t g_t (2·sat_t − m_t)`, summed in block order.
    pub fn objective_from_counts(&self, satisfied: &[usize]) -> f64 {
        satisfied
            .iter()
            .enumerate()
            .map(|(t, &s)| {
                let m_t = self.blocks.members(t).len() as f64;
                self.blocks.weights()[t] * (2.0 * s as f64 - m_t)
            })
            .sum()
    }

    /// Weighted fraction of satisfied constraints, `Σ_t g_t sat_t / Σ_t g_t m_t`.
    pub fn satisfaction_ratio(&self, x: &[u32]) -> Result<f64> {
        let counts = self.block_satisfied(x)?;
        let sat: f64 = counts
            .iter()
            .zip(self.blocks.weights())
            .map(|(&c, g)| g * c as f64)
            .sum();
        Ok(sat / self.blocks.total_weight())
    }

    /// Exhaustive maximisation over all `p^n` assignments. Ties go to the
    /// lexicographically smallest assignment.
    pub fn brute_force_optimum(&self, cap: u64) -> Result<(Vec<u32>, f64)> {
        let p = self.p() as u64;
        let n = self.n();
        check_cap((p as f64).powi(n as i32), cap)?;
        let total = p.pow(n as u32);
        let (best_index, best_value) = (0..total)
            .into_par_iter()
            .map(|idx| {
                let x = index_to_vector(idx, p as u32, n);
                let counts = self.block_satisfied(&x).expect("length is n");
                (idx, self.objective_from_counts(&counts))
            })
            .reduce(
                || (u64::MAX, f64::NEG_INFINITY),
                |a, b| {
                    if a.1 > b.1 || (a.1 == b.1 && a.0 < b.0) {
                        a
                    } else {
                        b
                    }
                },
            );
        Ok((index_to_vector(best_index, p as u32, n), best_value))
    }

    pub fn centered_stats(&self) -> CenteredStats {
        CenteredStats::new(self)
    }

    /// Random instance: i.i.d. uniform entries of `B` and uniform `r`-subsets
    /// `L_i`, deterministic in `seed`.
    pub fn random(
        field: PrimeField,
        n: usize,
        blocks: BlockStructure,
        r: usize,
        seed: u64,
    ) -> Result<Self> {
        let p = field.order();
        if r == 0 || r >= p {
            return Err(Error::invalid(format!("r = {r} must satisfy 1 <= r <= p - 1")));
        }
        let m = blocks.constraint_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..m * n).map(|_| rng.gen_range(0..p as u32)).collect();
        let matrix = FieldMatrix::new(field, m, n, entries)?;
        let targets = (0..m)
            .map(|_| {
                sample(&mut rng, p, r)
                    .into_iter()
                    .map(|v| v as u32)
                    .collect()
            })
            .collect();
        Self::new(matrix, targets, blocks)
    }

    /// Text format: header `p n m N r`, a weight line, a partition line
    /// (block id per constraint), the `m` rows of `B`, then one line per `L_i`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            self.p(),
            self.n(),
            self.m(),
            self.blocks.block_count(),
            self.r()
        );
        let _ = writeln!(out, "{}", join(self.blocks.weights()));
        let _ = writeln!(out, "{}", join(self.blocks.assignment()));
        for i in 0..self.m() {
            let _ = writeln!(out, "{}", join(self.matrix.row(i)));
        }
        for set in &self.targets {
            let _ = writeln!(out, "{}", join(set));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing {what}")))
        };
        let (ln, header) = next("header")?;
        let head = parse_numbers::<usize>(header, ln)?;
        let [p, n, m, blocks_n, r] = head[..] else {
            return Err(Error::parse(ln, "header must be `p n m N r`"));
        };
        let field = PrimeField::new(p as u32)?;
        let (ln, w) = next("weights")?;
        let weights = parse_numbers::<f64>(w, ln)?;
        if weights.len() != blocks_n {
            return Err(Error::parse(ln, format!("expected {blocks_n} weights")));
        }
        let (ln, part) = next("partition")?;
        let assignment = parse_numbers::<usize>(part, ln)?;
        if assignment.len() != m {
            return Err(Error::parse(ln, format!("expected {m} block ids")));
        }
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, row) = next("matrix row")?;
            let row = parse_numbers::<u32>(row, ln)?;
            if row.len() != n {
                return Err(Error::parse(ln, format!("expected {n} entries")));
            }
            rows.push(row);
        }
        let mut targets = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, set) = next("target set")?;
            let set = parse_numbers::<u32>(set, ln)?;
            if set.len() != r {
                return Err(Error::parse(ln, format!("expected {r} target elements")));
            }
            targets.push(set);
        }
        let matrix = if m == 0 {
            FieldMatrix::zeros(field, 0, n)
        } else {
            FieldMatrix::from_rows(field, &rows)?
        };
        Self::new(matrix, targets, BlockStructure::new(assignment, weights)?)
    }
}

/// Decodes a mixed-radix index into `x`, most significant coordinate first.
pub fn index_to_vector(mut index: u64, p: u32, n: usize) -> Vec<u32> {
    let mut x = vec![0u32; n];
    for slot in x.iter_mut().rev() {
        *slot = (index % p as u64) as u32;
        index /= p as u64;
    }
    x
}

pub fn vector_to_index(x: &[u32], p: u32) -> u64 {
    x.iter().fold(0u64, |acc, &v| acc * p as u64 + v as u64)
}

/// Centered and rescaled constraint statistics.
///
/// With `f̄ = 2r/p − 1` and `φ = √(4r(1 − r/p))`, the rescaled functions
/// `h_i = (√p/φ)(f_i − f̄)` satisfy `h_i² = 1 + κ h_i`.
#[derive(Debug, Clone)]
pub struct CenteredStats {
    pub mean: f64,
    pub scale: f64,
    pub skew: f64,
    p: usize,
    h_table: Vec<Vec<f64>>,
    fourier_table: Vec<Vec<Complex64>>,
}

impl CenteredStats {
    fn new(inst: &WeightedMaxLinsatInstance) -> Self {
        let p = inst.p();
        let (mean, scale, skew) = centered_constants(p, inst.r());
        let sqrt_p = (p as f64).sqrt();
        let h_table: Vec<Vec<f64>> = (0..inst.m())
            .map(|i| {
                (0..p as u32)
                    .map(|y| sqrt_p / scale * (inst.constraint_value(i, y) - mean))
                    .collect()
            })
            .collect();
        let fourier_table = h_table
            .iter()
            .map(|h| {
                (0..p)
                    .map(|a| {
                        let sum: Complex64 = h
                            .iter()
                            .enumerate()
                            .map(|(y, &hv)| root_of_unity(p, (a * y) as i64) * (hv / sqrt_p))
                            .sum();
                        if a == 0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            sum / sqrt_p
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            mean,
            scale,
            skew,
            p,
            h_table,
            fourier_table,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `h_i(y)`.
    pub fn h(&self, constraint: usize, y: u32) -> f64 {
        self.h_table[constraint][y as usize]
    }

    /// `χ̃_i(a)`, the Fourier transform of `h_i/√p`; zero at `a = 0`.
    pub fn chi_tilde(&self, constraint: usize, a: u32) -> Complex64 {
        self.fourier_table[constraint][a as usize]
    }

    /// `φ/√p`, the factor converting spectral quantities into objective units.
    pub fn objective_scale(&self) -> f64 {
        self.scale / (self.p as f64).sqrt()
    }
}

/// `(f̄, φ, κ)` for a field of size `p` and target size `r`.
pub fn centered_constants(p: usize, r: usize) -> (f64, f64, f64) {
    let (pf, rf) = (p as f64, r as f64);
    let mean = 2.0 * rf / pf - 1.0;
    let scale = (4.0 * rf * (1.0 - rf / pf)).sqrt();
    let skew = (pf - 2.0 * rf) / (rf * (pf - rf)).sqrt();
    (mean, scale, skew)
}

/// `ω^k` with `ω = e^{2πi/p}`.
pub fn root_of_unity(p: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(p as i64);
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / p as f64)
}

/// Replaces each constraint with a negative coefficient by the complementary
/// target set and the absolute coefficient. The signed objective
/// `Σ_i c_i f_i(b_i·x)` is unchanged.
pub fn normalize_signed(
    field: PrimeField,
    targets: &[Vec<u32>],
    coefficients: &[f64],
) -> Result<(Vec<Vec<u32>>, Vec<f64>)> {
    check_len(targets.len(), coefficients.len())?;
    let mut out_targets = Vec::with_capacity(targets.len());
    let mut out_coeffs = Vec::with_capacity(targets.len());
    for (set, &c) in targets.iter().zip(coefficients) {
        if c < 0.0 {
            out_targets.push(
                (0..field.modulus())
                    .filter(|y| !set.contains(y))
                    .collect(),
            );
            out_coeffs.push(-c);
        } else {
            out_targets.push(set.clone());
            out_coeffs.push(c);
        }
    }
    Ok((out_targets, out_coeffs))
}

/// `Σ_i c_i f_i(b_i·x)` for arbitrary real coefficients and target sets.
pub fn evaluate_signed(
    matrix: &FieldMatrix,
    targets: &[Vec<u32>],
    coefficients: &[f64],
    x: &[u32],
) -> Result<f64> {
    check_len(matrix.rows(), targets.len())?;
    check_len(matrix.rows(), coefficients.len())?;
    let bx = matrix.mul_vec(x)?;
    Ok(bx
        .iter()
        .zip(targets)
        .zip(coefficients)
        .map(|((v, set), c)| if set.contains(v) { *c } else { -*c })
        .sum())
}
