//! DQI for block-structured commuting Pauli Hamiltonians.
//!
//! `H_g = Σ_t g_t Σ_a P_{t,a}` with mutually commuting Hermitian Paulis.
//! Because the Paulis commute and square to the identity, a polynomial
//! `P(H_g)` expands as `Σ_y r_y P_y` with `P_y = Π_i P_i^{y_i}`, and `r_y`
//! depends on `y` only through its block Hamming weights.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decoding::{BoundedDistanceDecoder, SyndromeDecoder};
use crate::error::{check_cap, Error, Result};
use crate::field::{FieldMatrix, PrimeField};
use crate::krawtchouk::{binomial_f64, pascal};
use crate::layers::for_each_error;
use crate::spectral::DegreeIndexSet;

/// Largest qubit count handled by the dense routines (`2^n ≤ 256`).
pub const DENSE_QUBIT_LIMIT: usize = 8;

/// Default tolerance for the dense cross-checks.
pub const DENSE_TOLERANCE: f64 = 1e-8;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

fn i_power(k: u8) -> Complex64 {
    I_POWERS[(k % 4) as usize]
}

/// An `n`-qubit Pauli `i^k Z^α X^β`.
///
/// The symplectic representation is `(α, β) ∈ 𝔽₂^{2n}`; the phase is
/// tracked exactly as a power of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    z: Vec<bool>,
    x: Vec<bool>,
    phase: u8,
}

fn dot(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(p, q)| **p && **q).count()
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![false; n],
            x: vec![false; n],
            phase: 0,
        }
    }

    /// `i^phase Z^z X^x`.
    pub fn from_parts(z: Vec<bool>, x: Vec<bool>, phase: u8) -> Result<Self> {
        if z.len() != x.len() {
            return Err(Error::LengthMismatch {
                expected: z.len(),
                actual: x.len(),
            });
        }
        Ok(Self { z, x, phase: phase % 4 })
    }

    /// The Hermitian Pauli `± i^{−α·β} Z^α X^β`.
    pub fn hermitian(z: Vec<bool>, x: Vec<bool>, negative: bool) -> Result<Self> {
        let overlap = dot(&z, &x) as u8;
        let phase = (4 - overlap % 4) % 4 + if negative { 2 } else { 0 };
        Self::from_parts(z, x, phase)
    }

    /// Parses a label such as `XIZY`, `+ZZ` or `-YX`; character `q` acts
    /// on qubit `q`.
    pub fn parse(label: &str) -> Result<Self> {
        let label = label.trim();
        let (negative, body) = match label.as_bytes().first() {
            Some(b'-') => (true, &label[1..]),
            Some(b'+') => (false, &label[1..]),
            _ => (false, label),
        };
        if body.is_empty() {
            return Err(Error::invalid("empty Pauli label"));
        }
        let mut z = Vec::with_capacity(body.len());
        let mut x = Vec::with_capacity(body.len());
        for c in body.chars() {
            let (zb, xb) = match c {
                'I' => (false, false),
                'X' => (false, true),
                'Y' => (true, true),
                'Z' => (true, false),
                other => return Err(Error::invalid(format!("bad Pauli letter {other:?}"))),
            };
            z.push(zb);
            x.push(xb);
        }
        Self::hermitian(z, x, negative)
    }

    pub fn qubits(&self) -> usize {
        self.z.len()
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// `(α, β)` as 0/1 entries.
    pub fn symplectic(&self) -> Vec<u32> {
        self.z.iter().chain(&self.x).map(|&b| u32::from(b)).collect()
    }

    pub fn is_identity(&self) -> bool {
        !self.z.iter().chain(&self.x).any(|&b| b)
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + dot(&self.z, &self.x)) % 2 == 0
    }

    /// `±1` for Hermitian operators relative to the canonical form.
    pub fn sign(&self) -> Option<i8> {
        match (self.phase as usize + dot(&self.z, &self.x)) % 4 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Symplectic form `α·β′ + α′·β` over 𝔽₂ is zero.
    pub fn commutes_with(&self, other: &Self) -> bool {
        (dot(&self.z, &other.x) + dot(&other.z, &self.x)) % 2 == 0
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.qubits() != other.qubits() {
            return Err(Error::LengthMismatch {
                expected: self.qubits(),
                actual: other.qubits(),
            });
        }
        let swap = (2 * dot(&self.x, &other.z)) as u8;
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        Ok(Self {
            z,
            x,
            phase: (self.phase + other.phase + swap % 4) % 4,
        })
    }

    /// Image of basis state `col`: `(row, value)` with
    /// `P|col⟩ = value·|row⟩`; bit `q` of the index is qubit `q`.
    pub fn apply_basis(&self, col: usize) -> (usize, Complex64) {
        let mut row = col;
        for (q, &b) in self.x.iter().enumerate() {
            if b {
                row ^= 1 << q;
            }
        }
        let parity = self
            .z
            .iter()
            .enumerate()
            .filter(|(q, &b)| b && (row >> q) & 1 == 1)
            .count();
        let mut value = i_power(self.phase);
        if parity % 2 == 1 {
            value = -value;
        }
        (row, value)
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = dense_dim(self.qubits())?;
        let mut out = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, value) = self.apply_basis(col);
            out[(row, col)] = value;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Relative to the Hermitian canonical form.
        let prefix = ["", "i", "-", "-i"][(self.phase as usize + dot(&self.z, &self.x)) % 4];
        f.write_str(prefix)?;
        for (&z, &x) in self.z.iter().zip(&self.x) {
            f.write_str(match (z, x) {
                (false, false) => "I",
                (false, true) => "X",
                (true, true) => "Y",
                (true, false) => "Z",
            })?;
        }
        Ok(())
    }
}

fn dense_dim(n: usize) -> Result<usize> {
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::EnumerationTooLarge {
            size: (n as f64).exp2(),
            cap: 1 << DENSE_QUBIT_LIMIT,
        });
    }
    Ok(1 << n)
}

/// `H_g = Σ_t g_t Σ_a P_{t,a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPauliHamiltonian {
    qubits: usize,
    weights: Vec<f64>,
    blocks: Vec<Vec<PauliOperator>>,
}

impl BlockPauliHamiltonian {
    /// Checks qubit counts, Hermiticity and distinctness. Commutation is
    /// checked separately by [`Self::commutation_check`].
    pub fn new(qubits: usize, weights: Vec<f64>, blocks: Vec<Vec<PauliOperator>>) -> Result<Self> {
        if weights.len() != blocks.len() {
            return Err(Error::LengthMismatch {
                expected: blocks.len(),
                actual: weights.len(),
            });
        }
        if blocks.is_empty() || blocks.iter().any(Vec::is_empty) {
            return Err(Error::invalid("every block needs at least one operator"));
        }
        if let Some(g) = weights.iter().find(|g| !g.is_finite()) {
            return Err(Error::invalid(format!("non-finite block weight {g}")));
        }
        let mut seen = HashSet::new();
        for op in blocks.iter().flatten() {
            if op.qubits() != qubits {
                return Err(Error::LengthMismatch {
                    expected: qubits,
                    actual: op.qubits(),
                });
            }
            if !op.is_hermitian() {
                return Err(Error::invalid(format!("{op} is not Hermitian")));
            }
            if !seen.insert(op.symplectic()) {
                return Err(Error::invalid(format!("operator {op} repeats up to sign")));
            }
        }
        Ok(Self {
            qubits,
            weights,
            blocks,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn blocks(&self) -> &[Vec<PauliOperator>] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn operator_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Operators in block order.
    pub fn operators(&self) -> impl Iterator<Item = &PauliOperator> {
        self.blocks.iter().flatten()
    }

    /// Flat operator indices of each block.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let ids = (start..start + b.len()).collect();
                start += b.len();
                ids
            })
            .collect()
    }

    /// Fails with the first non-commuting pair (flat indices).
    pub fn commutation_check(&self) -> Result<()> {
        let ops: Vec<_> = self.operators().collect();
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                if !ops[i].commutes_with(ops[j]) {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        Ok(())
    }

    /// `m × 2n` matrix over 𝔽₂ whose rows are `symp(P_i)`, so that
    /// `symp(P_y) = B_Hᵀ y`.
    pub fn symplectic_matrix(&self) -> FieldMatrix {
        let rows: Vec<Vec<u32>> = self.operators().map(PauliOperator::symplectic).collect();
        FieldMatrix::from_rows(PrimeField::new(2).expect("2 is prime"), &rows).expect("uniform row length")
    }

    /// Ordered product `Π_i P_i^{y_i}`.
    pub fn product(&self, y: &[bool]) -> Result<PauliOperator> {
        if y.len() != self.operator_count() {
            return Err(Error::LengthMismatch {
                expected: self.operator_count(),
                actual: y.len(),
            });
        }
        let mut acc = PauliOperator::identity(self.qubits);
        for (op, _) in self.operators().zip(y).filter(|(_, &b)| b) {
            acc = acc.mul(op)?;
        }
        Ok(acc)
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = dense_dim(self.qubits)?;
        let mut out = DMatrix::zeros(dim, dim);
        for (block, &g) in self.blocks.iter().zip(&self.weights) {
            for op in block {
                for col in 0..dim {
                    let (row, value) = op.apply_basis(col);
                    out[(row, col)] += value * g;
                }
            }
        }
        Ok(out)
    }

    /// Sorted eigenvalues of the dense `H_g`.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigenvalues(self.dense()?))
    }

    /// `‖H_g‖₂`.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.spectrum()?.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
    }

    /// Text form: an `n N` header, then per block a weight line followed by
    /// one Pauli label per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.qubits, self.blocks.len());
        for (block, g) in self.blocks.iter().zip(&self.weights) {
            let _ = writeln!(out, "{g}");
            for op in block {
                let _ = writeln!(out, "{op}");
            }
        }
        out
    }

    /// Parses [`Self::to_text`] output. Blank lines and `#` comments are
    /// skipped; any numeric line opens a new block with that weight.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line_no, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let head: Vec<usize> = crate::field::parse_numbers(header, line_no)?;
        let [qubits, count] = head[..] else {
            return Err(Error::parse(line_no, "header must be `n N`"));
        };
        let mut weights = Vec::new();
        let mut blocks: Vec<Vec<PauliOperator>> = Vec::new();
        for (line_no, line) in lines {
            if let Ok(g) = line.parse::<f64>() {
                weights.push(g);
                blocks.push(Vec::new());
                continue;
            }
            let op = PauliOperator::parse(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
            blocks
                .last_mut()
                .ok_or_else(|| Error::parse(line_no, "Pauli before the first weight line"))?
                .push(op);
        }
        if blocks.len() != count {
            return Err(Error::parse(0, format!("header announces {count} blocks, found {}", blocks.len())));
        }
        Self::new(qubits, weights, blocks)
    }
}

/// Real polynomial `a_0 + a_1 x + … + a_l x^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(Vec<f64>);

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("polynomial needs finite coefficients"));
        }
        Ok(Self(coefficients))
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_matrix(&self, h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = h.nrows();
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for &c in self.0.iter().rev() {
            acc = &acc * h;
            for d in 0..dim {
                acc[(d, d)] += Complex64::new(c, 0.0);
            }
        }
        acc
    }

    fn exact(&self) -> Result<Vec<BigRational>> {
        self.0.iter().map(|&c| to_rational(c)).collect()
    }
}

fn to_rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::invalid(format!("{v} has no exact rational form")))
}

fn eval_exact(coefficients: &[BigRational], x: &BigRational) -> BigRational {
    coefficients
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Coefficients of `P(H_g)` in the Pauli-product expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct HamCoefficients {
    pub index: DegreeIndexSet,
    /// Exact `r_j` for each `j` in `index`.
    pub exact: Vec<BigRational>,
    pub r: Vec<f64>,
    /// `γ_j = √(Π C(m_t, j_t)) r_j / 𝒩`.
    pub gamma: Vec<f64>,
    /// `𝒩 = √(Σ_j Π C(m_t, j_t) r_j²)`.
    pub normalization: f64,
}

impl HamCoefficients {
    pub fn r_of(&self, degrees: &[usize]) -> Option<f64> {
        self.index.index_of(degrees).map(|k| self.r[k])
    }
}

/// Odometer over `0..=sizes[t]` per block.
fn for_each_tuple(sizes: &[usize], mut visit: impl FnMut(&[usize])) {
    let mut s = vec![0usize; sizes.len()];
    loop {
        visit(&s);
        let mut t = s.len();
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            if s[t] < sizes[t] {
                s[t] += 1;
                break;
            }
            s[t] = 0;
        }
    }
}

/// Values `P(Σ_t g_t(m_t − 2 s_t))` over all flip-count tuples `s`.
fn flip_values(h: &BlockPauliHamiltonian, poly: &[BigRational]) -> Result<Vec<(Vec<usize>, BigRational)>> {
    let sizes = h.sizes();
    let weights: Vec<BigRational> = h.weights.iter().map(|&g| to_rational(g)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for_each_tuple(&sizes, |s| {
        let mut x = BigRational::zero();
        for ((g, &m), &st) in weights.iter().zip(&sizes).zip(s) {
            x += g * BigRational::from_integer(BigInt::from(m as i64 - 2 * st as i64));
        }
        out.push((s.to_vec(), eval_exact(poly, &x)));
    });
    Ok(out)
}

/// Exact `r_j = 2^{−m} Σ_s Π_t K_{s_t}(j_t; m_t) P(Σ_t g_t(m_t − 2s_t))`.
pub fn r_krawtchouk(h: &BlockPauliHamiltonian, poly: &Polynomial, degrees: &[usize], cap: u64) -> Result<BigRational> {
    let sizes = h.sizes();
    check_cap(sizes.iter().map(|&m| (m + 1) as f64).product(), cap)?;
    let values = flip_values(h, &poly.exact()?)?;
    r_from_values(&sizes, &values, degrees)
}

fn r_from_values(sizes: &[usize], values: &[(Vec<usize>, BigRational)], degrees: &[usize]) -> Result<BigRational> {
    if degrees.len() != sizes.len() || degrees.iter().zip(sizes).any(|(j, m)| j > m) {
        return Err(Error::invalid(format!("degree tuple {degrees:?} outside block sizes {sizes:?}")));
    }
    let table = pascal(sizes.iter().copied().max().unwrap_or(0));
    let total: usize = sizes.iter().sum();
    let sum = values
        .par_iter()
        .map(|(s, value)| {
            let mut k = BigInt::one();
            for ((&st, &jt), &mt) in s.iter().zip(degrees).zip(sizes) {
                k *= table.kraw(st, jt, mt);
            }
            value * BigRational::from_integer(k)
        })
        .reduce(BigRational::zero, |a, b| a + b);
    Ok(sum / BigRational::from_integer(BigInt::one() << total))
}

/// Exact `r_y` by direct multinomial expansion of `P(Σ_i c_i z_i)` with
/// `z_i² = 1`, where `c_i` is the weight of the block holding operator `i`.
pub fn r_multinomial(h: &BlockPauliHamiltonian, poly: &Polynomial, y: &[bool], cap: u64) -> Result<BigRational> {
    let m = h.operator_count();
    if y.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: y.len(),
        });
    }
    let count: f64 = (0..=poly.degree()).map(|k| binomial_f64(k + m - 1, k)).sum();
    check_cap(count, cap)?;
    let mut coeffs = Vec::with_capacity(m);
    for (block, &g) in h.blocks.iter().zip(&h.weights) {
        for _ in block {
            coeffs.push(to_rational(g)?);
        }
    }
    let a = poly.exact()?;
    let mut factorial = vec![BigInt::one()];
    for k in 1..=poly.degree() {
        let next = &factorial[k - 1] * BigInt::from(k);
        factorial.push(next);
    }
    let mut total = BigRational::zero();
    let mut mu = vec![0usize; m];
    for (k, ak) in a.iter().enumerate() {
        if ak.is_zero() {
            continue;
        }
        let mut inner = BigRational::zero();
        compositions(k, 0, &mut mu, &mut |mu: &[usize]| {
            if mu.iter().zip(y).any(|(&e, &b)| (e % 2 == 1) != b) {
                return;
            }
            let mut term = BigRational::from_integer(factorial[k].clone());
            for (i, &e) in mu.iter().enumerate() {
                term /= BigRational::from_integer(factorial[e].clone());
                for _ in 0..e {
                    term *= &coeffs[i];
                }
            }
            inner += term;
        });
        total += ak * inner;
    }
    Ok(total)
}

fn compositions(remaining: usize, at: usize, mu: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if at + 1 == mu.len() {
        mu[at] = remaining;
        visit(mu);
        return;
    }
    for e in 0..=remaining {
        mu[at] = e;
        compositions(remaining - e, at + 1, mu, visit);
    }
    mu[at] = 0;
}

/// Computes `r_j`, `γ_j` and `𝒩` on the degree lattice `T_l`, `l = deg P`.
pub fn ham_coefficients(h: &BlockPauliHamiltonian, poly: &Polynomial, cap: u64) -> Result<HamCoefficients> {
    let sizes = h.sizes();
    check_cap(sizes.iter().map(|&m| (m + 1) as f64).product(), cap)?;
    let index = DegreeIndexSet::enumerate(&sizes, poly.degree(), cap)?;
    let values = flip_values(h, &poly.exact()?)?;
    let exact: Vec<BigRational> = index
        .iter()
        .map(|j| r_from_values(&sizes, &values, j))
        .collect::<Result<_>>()?;
    let r: Vec<f64> = exact.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let layer: Vec<f64> = index
        .iter()
        .map(|j| sizes.iter().zip(j).map(|(&m, &jt)| binomial_f64(m, jt)).product())
        .collect();
    let normalization = r.iter().zip(&layer).map(|(v, c)| c * v * v).sum::<f64>().sqrt();
    if !(normalization > 0.0) {
        return Err(Error::invalid("P(H_g) vanishes in the Pauli expansion"));
    }
    let gamma = r
        .iter()
        .zip(&layer)
        .map(|(v, c)| c.sqrt() * v / normalization)
        .collect();
    Ok(HamCoefficients {
        index,
        exact,
        r,
        gamma,
        normalization,
    })
}

/// Calls `visit(y, r_y)` for every `y` in the support `Σ_t |y_t| ≤ l`.
fn for_each_supported(h: &BlockPauliHamiltonian, coeffs: &HamCoefficients, mut visit: impl FnMut(&[bool], f64) -> Result<()>) -> Result<()> {
    let members = h.members();
    let m = h.operator_count();
    let mut status = Ok(());
    for (k, j) in coeffs.index.iter().enumerate() {
        let r = coeffs.r[k];
        for_each_error(&members, j, 2, |support| {
            if status.is_err() {
                return;
            }
            let mut y = vec![false; m];
            for &(i, _) in support {
                y[i] = true;
            }
            status = visit(&y, r);
        });
        status.clone()?;
    }
    status
}

fn max_abs(a: &DMatrix<Complex64>) -> f64 {
    a.iter().fold(0.0, |acc: f64, v| acc.max(v.norm()))
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: DMatrix<Complex64>) -> Vec<f64> {
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `‖A‖₁` of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm(a: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(a.clone()).iter().map(|v| v.abs()).sum()
}

/// Normalizes `M M†` to unit trace.
fn density_from(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let rho = m * m.adjoint();
    let trace = rho.trace().re;
    if !(trace > 0.0) {
        return Err(Error::invalid("state has zero norm"));
    }
    Ok(rho / Complex64::new(trace, 0.0))
}

#[derive(Debug, Clone)]
pub struct DensityReport {
    pub rho: DMatrix<Complex64>,
    /// Max-norm gap between the two constructions of `P(H_g)`, relative to
    /// `max(1, max|P(H_g)|)`.
    pub path_gap: f64,
}

/// `ρ_P = P²(H_g)/Tr P²(H_g)`, building `P(H_g)` both as a dense matrix
/// polynomial and through the `r_j` expansion and checking they agree.
pub fn dense_rho_p(h: &BlockPauliHamiltonian, poly: &Polynomial, cap: u64) -> Result<DensityReport> {
    h.commutation_check()?;
    let direct = poly.eval_matrix(&h.dense()?);
    let coeffs = ham_coefficients(h, poly, cap)?;
    let dim = direct.nrows();
    let mut expanded = DMatrix::<Complex64>::zeros(dim, dim);
    for_each_supported(h, &coeffs, |y, r| {
        if r != 0.0 {
            let op = h.product(y)?;
            for col in 0..dim {
                let (row, value) = op.apply_basis(col);
                expanded[(row, col)] += value * r;
            }
        }
        Ok(())
    })?;
    let path_gap = max_abs(&(&direct - &expanded)) / max_abs(&direct).max(1.0);
    if path_gap > DENSE_TOLERANCE {
        return Err(Error::ToleranceExceeded {
            what: "matrix polynomial vs Pauli expansion".into(),
            measured: path_gap,
            tolerance: DENSE_TOLERANCE,
        });
    }
    Ok(DensityReport {
        rho: density_from(&direct)?,
        path_gap,
    })
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub rho: DMatrix<Complex64>,
    /// `Σ_y |⟨y|R⟩|²` after preparing the reference register.
    pub reference_norm: f64,
    /// Number of supported error patterns `y`.
    pub support: usize,
}

/// Simulates the protocol on sparse registers: the reference state
/// `Σ_y (r_y/𝒩)|y⟩`, controlled `P_y` onto half of `|Φ⟩`, the Bell
/// relabeling to `|y⟩|symp(P_y)⟩` (keeping the phase of `P_y`), decoding
/// `y` from `B_Hᵀy` with a bounded-distance decoder of radius `l`, the
/// inverse relabeling and the partial trace.
pub fn protocol_simulation(h: &BlockPauliHamiltonian, poly: &Polynomial, cap: u64) -> Result<ProtocolReport> {
    h.commutation_check()?;
    let dim = dense_dim(h.qubits)?;
    let coeffs = ham_coefficients(h, poly, cap)?;

    // Reference register.
    let mut reference: Vec<(Vec<bool>, f64)> = Vec::new();
    for_each_supported(h, &coeffs, |y, r| {
        reference.push((y.to_vec(), r / coeffs.normalization));
        Ok(())
    })?;
    let reference_norm: f64 = reference.iter().map(|(_, a)| a * a).sum();
    if (reference_norm - 1.0).abs() > 1e-10 {
        return Err(Error::ToleranceExceeded {
            what: "reference state norm".into(),
            measured: (reference_norm - 1.0).abs(),
            tolerance: 1e-10,
        });
    }

    // Controlled Paulis and Bell relabeling: |y⟩ ⊗ i^k |symp(P_y)⟩.
    let entangled: Vec<(Vec<bool>, Vec<u32>, Complex64)> = reference
        .iter()
        .map(|(y, a)| {
            let op = h.product(y)?;
            Ok((y.clone(), op.symplectic(), i_power(op.phase()) * *a))
        })
        .collect::<Result<_>>()?;

    // Uncompute y with the decoder; every supported y must be recovered.
    let b = h.symplectic_matrix();
    let decoder = BoundedDistanceDecoder::new(&b, poly.degree(), cap)?;
    let mut disentangled: Vec<(Vec<u32>, Complex64)> = Vec::with_capacity(entangled.len());
    for (y, symp, amp) in entangled {
        let decoded = decoder.decode(&symp)?;
        if decoded.iter().zip(&y).any(|(&d, &bit)| (d == 1) != bit) {
            return Err(Error::DecoderAmbiguity);
        }
        disentangled.push((symp, amp));
    }

    // Inverse relabeling: Σ_s c_s (Z^α X^β ⊗ I)|Φ⟩, i.e. M = Σ_s c_s Z^α X^β / √2^n.
    let n = h.qubits;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (symp, amp) in &disentangled {
        let z = symp[..n].iter().map(|&v| v == 1).collect();
        let x = symp[n..].iter().map(|&v| v == 1).collect();
        let op = PauliOperator::from_parts(z, x, 0)?;
        for col in 0..dim {
            let (row, value) = op.apply_basis(col);
            m[(row, col)] += value * *amp * scale;
        }
    }
    let rho = m.clone() * m.adjoint();
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::ToleranceExceeded {
            what: "post-selection-free output trace".into(),
            measured: (trace - 1.0).abs(),
            tolerance: 1e-8,
        });
    }
    Ok(ProtocolReport {
        rho: density_from(&m)?,
        reference_norm,
        support: disentangled.len(),
    })
}

/// Chebyshev series `Σ_k c_k T_k(x/R)` on `[−R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSeries {
    pub coefficients: Vec<f64>,
    pub radius: f64,
}

impl ChebyshevSeries {
    /// Interpolates `f` at the `degree + 1` Chebyshev nodes.
    pub fn fit(f: impl Fn(f64) -> f64, degree: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("Chebyshev radius must be positive"));
        }
        let nodes = degree + 1;
        let samples: Vec<(f64, f64)> = (0..nodes)
            .map(|j| {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / nodes as f64;
                (theta, f(radius * theta.cos()))
            })
            .collect();
        let coefficients = (0..nodes)
            .map(|k| {
                let c: f64 = samples.iter().map(|(t, v)| v * (k as f64 * t).cos()).sum::<f64>() * 2.0 / nodes as f64;
                if k == 0 {
                    c / 2.0
                } else {
                    c
                }
            })
            .collect();
        Ok(Self {
            coefficients,
            radius,
        })
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x / self.radius;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coefficients[0] + t * b1 - b2
    }

    /// Monomial coefficients in `x`.
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        let len = self.coefficients.len();
        let mut out = vec![0.0; len];
        let mut prev = vec![0.0; len];
        prev[0] = 1.0;
        let mut cur = vec![0.0; len];
        if len > 1 {
            cur[1] = 1.0 / self.radius;
        }
        for (k, &c) in self.coefficients.iter().enumerate() {
            let basis = if k == 0 { &prev } else { &cur };
            out.iter_mut().zip(basis).for_each(|(o, b)| *o += c * b);
            if k >= 1 && k + 1 < len {
                let mut next: Vec<f64> = prev.iter().map(|v| -v).collect();
                for i in 0..len - 1 {
                    next[i + 1] += 2.0 * cur[i] / self.radius;
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        Polynomial::new(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsReport {
    pub degree: usize,
    pub norm: f64,
    /// `‖ρ_P − e^{−βH}/Z‖₁`.
    pub distance: f64,
    pub delta: f64,
}

/// Degree `⌈1.12 β ‖H‖ + 0.648 ln(2/δ)⌉`.
pub fn gibbs_degree(beta: f64, norm: f64, delta: f64) -> usize {
    (1.12 * beta * norm + 0.648 * (2.0 / delta).ln()).ceil().max(0.0) as usize
}

/// Trace distance between `ρ_P` and the Gibbs state, with `P` the Chebyshev
/// interpolant of `x ↦ e^{−βx/2}` on `[−‖H‖, ‖H‖]` at the prescribed degree.
/// Both states are diagonal in the eigenbasis of `H_g`.
pub fn gibbs_distance(h: &BlockPauliHamiltonian, beta: f64, delta: f64) -> Result<GibbsReport> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta must be a finite non-negative number"));
    }
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::invalid("delta must lie in (0, 2)"));
    }
    h.commutation_check()?;
    let spectrum = h.spectrum()?;
    let norm = spectrum.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    let degree = gibbs_degree(beta, norm, delta);
    let series = ChebyshevSeries::fit(|x| (-beta * x / 2.0).exp(), degree, if norm > 0.0 { norm } else { 1.0 })?;
    let p_sq: Vec<f64> = spectrum.iter().map(|&e| series.eval(e).powi(2)).collect();
    let gibbs: Vec<f64> = spectrum.iter().map(|&e| (-beta * (e - spectrum[0])).exp()).collect();
    let (zp, zg): (f64, f64) = (p_sq.iter().sum(), gibbs.iter().sum());
    let distance = p_sq.iter().zip(&gibbs).map(|(a, b)| (a / zp - b / zg).abs()).sum();
    let report = GibbsReport {
        degree,
        norm,
        distance,
        delta,
    };
    if !(distance <= delta) {
        return Err(Error::ToleranceExceeded {
            what: format!("Gibbs distance at degree {degree}"),
            measured: distance,
            tolerance: delta,
        });
    }
    Ok(report)
}

fn random_clifford(gens: &mut [(Vec<bool>, Vec<bool>)], n: usize, rng: &mut ChaCha8Rng) {
    for _ in 0..6 * n {
        let q = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 => gens.iter_mut().for_each(|(z, x)| std::mem::swap(&mut z[q], &mut x[q])),
            1 => gens.iter_mut().for_each(|(z, x)| z[q] ^= x[q]),
            _ if n > 1 => {
                let mut t = rng.gen_range(0..n - 1);
                if t >= q {
                    t += 1;
                }
                gens.iter_mut().for_each(|(z, x)| {
                    x[t] ^= x[q];
                    z[q] ^= z[t];
                });
            }
            _ => {}
        }
    }
}

/// Random commuting block Hamiltonian from a scrambled stabilizer group.
///
/// The group is generated by `Z_1 … Z_n` conjugated by a random Clifford
/// circuit. With `independent`, the operators are distinct generators, so
/// `B_H` has full row rank and the decoder is injective at any degree;
/// otherwise they are distinct random non-identity products of generators.
pub fn random_commuting_hamiltonian(
    qubits: usize,
    sizes: &[usize],
    weights: &[f64],
    independent: bool,
    seed: u64,
) -> Result<BlockPauliHamiltonian> {
    let m: usize = sizes.iter().sum();
    if qubits == 0 || qubits > 20 {
        return Err(Error::invalid("fixture qubit count must be in 1..=20"));
    }
    if independent && m > qubits {
        return Err(Error::invalid(format!("{m} independent operators need at least {m} qubits")));
    }
    if m >= 1 << qubits {
        return Err(Error::invalid("too many operators for the stabilizer group"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens: Vec<(Vec<bool>, Vec<bool>)> = (0..qubits)
        .map(|q| {
            let mut z = vec![false; qubits];
            z[q] = true;
            (z, vec![false; qubits])
        })
        .collect();
    random_clifford(&mut gens, qubits, &mut rng);
    let masks: Vec<u64> = if independent {
        let mut ids: Vec<u64> = (0..qubits as u64).map(|q| 1 << q).collect();
        ids.shuffle(&mut rng);
        ids.truncate(m);
        ids
    } else {
        let mut chosen = Vec::new();
        let mut seen = HashSet::new();
        while chosen.len() < m {
            let mask = rng.gen_range(1..1u64 << qubits);
            if seen.insert(mask) {
                chosen.push(mask);
            }
        }
        chosen
    };
    let mut ops = masks.into_iter().map(|mask| {
        let mut z = vec![false; qubits];
        let mut x = vec![false; qubits];
        for (q, (gz, gx)) in gens.iter().enumerate() {
            if (mask >> q) & 1 == 1 {
                z.iter_mut().zip(gz).for_each(|(a, b)| *a ^= b);
                x.iter_mut().zip(gx).for_each(|(a, b)| *a ^= b);
            }
        }
        PauliOperator::hermitian(z, x, rng.gen_bool(0.5))
    });
    let mut blocks = Vec::with_capacity(sizes.len());
    for &size in sizes {
        blocks.push((&mut ops).take(size).collect::<Result<Vec<_>>>()?);
    }
    BlockPauliHamiltonian::new(qubits, weights.to_vec(), blocks)
}
