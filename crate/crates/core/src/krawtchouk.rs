//! Exact binary Krawtchouk polynomials
//! `K_k(q; m) = Σ_a (−1)^a C(q, a) C(m − q, k − a)`.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Pascal triangle of exact binomials, rows `0..=max`.
#[derive(Debug, Clone)]
pub struct Pascal {
    rows: Vec<Vec<BigInt>>,
}

impl Pascal {
    pub fn new(max: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max + 1);
        for n in 0..=max {
            let mut row = vec![BigInt::one(); n + 1];
            for k in 1..n {
                row[k] = &rows[n - 1][k - 1] + &rows[n - 1][k];
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `C(n, k)`, zero when `k > n`.
    pub fn binom(&self, n: usize, k: usize) -> BigInt {
        if k > n {
            BigInt::zero()
        } else {
            self.rows[n][k].clone()
        }
    }

    fn binom_ref(&self, n: usize, k: usize) -> Option<&BigInt> {
        (k <= n).then(|| &self.rows[n][k])
    }

    /// `K_k(q; m)`; the caller guarantees `k, q ≤ m ≤ max`.
    pub fn kraw(&self, k: usize, q: usize, m: usize) -> BigInt {
        let mut acc = BigInt::zero();
        for a in 0..=k.min(q) {
            let (Some(c1), Some(c2)) = (self.binom_ref(q, a), self.binom_ref(m - q, k - a)) else {
                continue;
            };
            let term = c1 * c2;
            if a % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
}

static SHARED: RwLock<Option<Arc<Pascal>>> = RwLock::new(None);

/// Shared Pascal triangle covering at least rows `0..=max`, grown on demand.
pub fn pascal(max: usize) -> Arc<Pascal> {
    if let Some(table) = SHARED.read().expect("pascal lock").as_ref() {
        if table.max() >= max {
            return Arc::clone(table);
        }
    }
    let mut guard = SHARED.write().expect("pascal lock");
    match guard.as_ref() {
        Some(table) if table.max() >= max => Arc::clone(table),
        _ => {
            let table = Arc::new(Pascal::new(max.max(64)));
            *guard = Some(Arc::clone(&table));
            table
        }
    }
}

fn check_range(k: usize, q: usize, m: usize) -> Result<()> {
    if k > m || q > m {
        return Err(Error::invalid(format!(
            "Krawtchouk arguments out of range: k = {k}, q = {q}, m = {m}"
        )));
    }
    Ok(())
}

/// `K_k(q; m)` exactly.
pub fn kraw(k: usize, q: usize, m: usize) -> Result<BigInt> {
    check_range(k, q, m)?;
    Ok(pascal(m).kraw(k, q, m))
}

/// `Σ_q C(m, q) K_j(q; m)² − 2^m C(m, j)`, which vanishes identically.
pub fn orthogonality_defect(j: usize, m: usize) -> Result<BigInt> {
    check_range(j, 0, m)?;
    let table = pascal(m);
    let sum: BigInt = (0..=m)
        .map(|q| {
            let kv = table.kraw(j, q, m);
            table.binom(m, q) * &kv * &kv
        })
        .sum();
    Ok(sum - (BigInt::one() << m) * table.binom(m, j))
}

/// Coefficients `c_d` with `K_i K_j = Σ_d c_d K_d` on `{0..m}`, where
/// `c_{i+j−2k} = C(m − i − j + 2k, k) C(i + j − 2k, j − k)` for
/// `max(0, i + j − m) ≤ k ≤ min(i, j)`.
pub fn multiplication_expansion(i: usize, j: usize, m: usize) -> Result<BTreeMap<usize, BigInt>> {
    check_range(i, 0, m)?;
    check_range(j, 0, m)?;
    let table = pascal(m);
    let lo = (i + j).saturating_sub(m);
    let mut out = BTreeMap::new();
    for k in lo..=i.min(j) {
        let d = i + j - 2 * k;
        let c = table.binom(m + 2 * k - i - j, k) * table.binom(d, j - k);
        if !c.is_zero() {
            out.insert(d, c);
        }
    }
    Ok(out)
}

/// Table `K_k(q; m)` as `f64`, indexed `[k][q]`.
pub fn kraw_table_f64(m: usize) -> Vec<Vec<f64>> {
    let table = pascal(m);
    (0..=m)
        .map(|k| {
            (0..=m)
                .map(|q| table.kraw(k, q, m).to_f64().expect("finite"))
                .collect()
        })
        .collect()
}

/// `C(n, k)` as `f64`.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
