//! Prime-field arithmetic, dense matrices over 𝔽_p and linear-code utilities.
//!
//! Field elements are plain `u32` values in `[0, p)`. Matrices are stored
//! row-major. A matrix `B` with `m` rows and `n` columns defines the linear
//! code `C = {Bx}`; its dual is `C⊥ = {y : Bᵀy = 0}`.

use std::fmt;

use crate::error::{check_cap, check_len, Error, Result};

/// Default cap on the number of vectors any exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;

/// The prime field 𝔽_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u32,
}

impl PrimeField {
    /// Builds 𝔽_p, checking primality by trial division.
    pub fn new(modulus: u32) -> Result<Self> {
        if !is_prime(modulus as u64) {
            return Err(Error::NotPrime(modulus as u64));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn order(self) -> usize {
        self.modulus as usize
    }

    pub fn reduce(self, value: i64) -> u32 {
        value.rem_euclid(self.modulus as i64) as u32
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.modulus as u64) as u32
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.modulus as u64 - b as u64) % self.modulus as u64) as u32
    }

    pub fn neg(self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.modulus as u64) as u32
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let mut result = 1 % self.modulus;
        let mut acc = base % self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, acc);
            }
            acc = self.mul(acc, acc);
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse. Panics on zero, which has none.
    pub fn inv(self, a: u32) -> u32 {
        assert!(a % self.modulus != 0, "zero has no inverse");
        self.pow(a, self.modulus as u64 - 2)
    }

    /// Smallest generator of the multiplicative group.
    pub fn primitive_element(self) -> u32 {
        let p = self.modulus as u64;
        if p == 2 {
            return 1;
        }
        let order = p - 1;
        let factors = prime_factors(order);
        (2..self.modulus)
            .find(|&g| factors.iter().all(|&q| self.pow(g, order / q) != 1))
            .expect("every prime field has a generator")
    }

    pub fn check_element(self, value: u32) -> Result<u32> {
        if value < self.modulus {
            Ok(value)
        } else {
            Err(Error::invalid(format!(
                "{value} is not an element of F_{}",
                self.modulus
            )))
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Number of nonzero coordinates.
pub fn hamming_weight(v: &[u32]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

/// Dense row-major matrix over 𝔽_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl FieldMatrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        check_len(rows * cols, entries.len())?;
        for &e in &entries {
            field.check_element(e)?;
        }
        Ok(Self {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len(cols, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::new(field, rows.len(), cols, entries)
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, size: usize) -> Self {
        let mut out = Self::zeros(field, size, size);
        for i in 0..size {
            out.entries[i * size + i] = 1 % field.modulus();
        }
        out
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u32) {
        self.entries[row * self.cols + col] = value % self.field.modulus();
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            entries.extend_from_slice(self.row(r));
        }
        Self {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            entries,
        }
    }

    /// `b_i · x` for a single row.
    pub fn row_dot(&self, row: usize, x: &[u32]) -> u32 {
        let p = self.field.modulus() as u64;
        let acc = self
            .row(row)
            .iter()
            .zip(x)
            .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p);
        acc as u32
    }

    /// `Bx`, of length `rows`.
    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| self.row_dot(i, x)).collect())
    }

    /// `Bᵀy`, of length `cols`.
    pub fn syndrome(&self, y: &[u32]) -> Result<Vec<u32>> {
        check_len(self.rows, y.len())?;
        let p = self.field.modulus() as u64;
        let mut out = vec![0u64; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0 {
                continue;
            }
            for (acc, &b) in out.iter_mut().zip(self.row(i)) {
                *acc = (*acc + yi as u64 * b as u64) % p;
            }
        }
        Ok(out.into_iter().map(|v| v as u32).collect())
    }

    /// Row rank over 𝔽_p.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.row_reduce().len()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    fn row_reduce(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(found) = (pivot_row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(found, pivot_row);
            let scale = f.inv(self.get(pivot_row, col));
            for c in 0..self.cols {
                let v = f.mul(self.get(pivot_row, c), scale);
                self.entries[pivot_row * self.cols + c] = v;
            }
            for r in 0..self.rows {
                let factor = self.get(r, col);
                if r == pivot_row || factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(pivot_row, c)));
                    self.entries[r * self.cols + c] = v;
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Basis of the right kernel `{z : Bz = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let f = self.field;
        let mut work = self.clone();
        let pivots = work.row_reduce();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u32; self.cols];
                v[fc] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(work.get(r, fc));
                }
                v
            })
            .collect()
    }

    /// Basis of the dual code `{y : Bᵀy = 0}`.
    pub fn dual_basis(&self) -> Vec<Vec<u32>> {
        self.transpose().kernel_basis()
    }

    /// Solves the square system `Bx = t`; `None` when `B` is singular.
    pub fn solve_square(&self, rhs: &[u32]) -> Result<Option<Vec<u32>>> {
        if self.rows != self.cols {
            return Err(Error::invalid("solve_square needs a square matrix"));
        }
        check_len(self.rows, rhs.len())?;
        let n = self.rows;
        let mut aug = Self::zeros(self.field, n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug.entries[i * (n + 1) + j] = self.get(i, j);
            }
            aug.entries[i * (n + 1) + n] = rhs[i];
        }
        let pivots = aug.row_reduce();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Ok(None);
        }
        Ok(Some((0..n).map(|i| aug.get(i, n)).collect()))
    }

    /// Minimum Hamming weight of a nonzero dual codeword, or `None` when the
    /// dual code is trivial. Enumerates `p^(m - rank)` combinations of a dual
    /// basis in lexicographic order of coefficient tuples.
    pub fn dual_min_distance(&self, cap: u64) -> Result<Option<usize>> {
        let basis = self.dual_basis();
        if basis.is_empty() {
            return Ok(None);
        }
        let p = self.field.modulus();
        check_cap((p as f64).powi(basis.len() as i32), cap)?;
        let k = basis.len();
        let mut digits = vec![0u32; k];
        let mut current = vec![0u32; self.rows];
        let mut best = usize::MAX;
        // Odometer over coefficient tuples: stepping digit d (with or without
        // wrap-around) always adds basis[d] once, since p·basis[d] = 0.
        loop {
            let mut d = k;
            loop {
                if d == 0 {
                    return Ok(Some(best));
                }
                d -= 1;
                for (c, &b) in current.iter_mut().zip(&basis[d]) {
                    *c = self.field.add(*c, b);
                }
                digits[d] += 1;
                if digits[d] < p {
                    break;
                }
                digits[d] = 0;
            }
            let w = hamming_weight(&current);
            if w > 0 && w < best {
                best = w;
            }
        }
    }

    /// Parses the text format: a header `p m n` followed by `m` rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
        let head = parse_numbers::<u64>(header, hl + 1)?;
        if head.len() != 3 {
            return Err(Error::parse(hl + 1, "header must be `p m n`"));
        }
        let field = PrimeField::new(head[0] as u32)?;
        let (rows, cols) = (head[1] as usize, head[2] as usize);
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "missing matrix rows"))?;
            let row = parse_numbers::<u32>(line, ln + 1)?;
            if row.len() != cols {
                return Err(Error::parse(ln + 1, format!("expected {cols} entries")));
            }
            entries.extend(row);
        }
        Self::new(field, rows, cols, entries)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.field.modulus(), self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "{}", join(self.row(i)))?;
        }
        Ok(())
    }
}

pub(crate) fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn parse_numbers<T: std::str::FromStr>(line: &str, line_no: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::parse(line_no, format!("bad number `{tok}`")))
        })
        .collect()
}

/// Where a dual distance value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceSource {
    Computed,
    Asserted,
}

/// A parity-check matrix together with (optionally) its dual distance.
///
/// `dual_distance == Some((None, _))` records that the dual code is trivial,
/// i.e. the distance is effectively infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    parity_check: FieldMatrix,
    dual_distance: Option<(Option<usize>, DistanceSource)>,
}

impl CodeSpec {
    pub fn new(parity_check: FieldMatrix) -> Self {
        Self {
            parity_check,
            dual_distance: None,
        }
    }

    /// Computes the dual distance by enumeration.
    pub fn computed(parity_check: FieldMatrix, cap: u64) -> Result<Self> {
        let d = parity_check.dual_min_distance(cap)?;
        Ok(Self {
            parity_check,
            dual_distance: Some((d, DistanceSource::Computed)),
        })
    }

    /// Records a distance known analytically (e.g. for Reed–Solomon duals).
    pub fn asserted(parity_check: FieldMatrix, distance: Option<usize>) -> Self {
        Self {
            parity_check,
            dual_distance: Some((distance, DistanceSource::Asserted)),
        }
    }

    pub fn parity_check(&self) -> &FieldMatrix {
        &self.parity_check
    }

    pub fn dual_distance(&self) -> Option<(Option<usize>, DistanceSource)> {
        self.dual_distance
    }
}
