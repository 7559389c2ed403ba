//! Syndrome decoders, imperfect-decoder failure accounting, the averaged
//! lower bound for imperfect decoding, and the weighted Prange algorithm.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_cap, check_len, Error, Result};
use crate::field::{hamming_weight, FieldMatrix, PrimeField};
use crate::layers::{dense, for_each_error, layer_size};
use crate::problem::{vector_to_index, WeightedMaxLinsatInstance};
use crate::simulator::{exact_expectation, FourierPlan};
use crate::spectral::{DegreeIndexSet, DistanceHypothesis, SpectralMatrix};

/// Maps a syndrome `Bᵀy` back to an error pattern `y`.
pub trait SyndromeDecoder: Sync {
    /// Returns the decoded error or [`Error::DecodingFailure`].
    fn decode(&self, syndrome: &[u32]) -> Result<Vec<u32>>;
}

/// Number of patterns of Hamming weight at most `radius` in `𝔽_p^m`.
fn ball_size(m: usize, radius: usize, p: u32) -> f64 {
    (0..=radius.min(m)).map(|w| layer_size(&[m], &[w], p)).sum()
}

/// Weight-layered search for the lightest `y` with `Bᵀy = s` and
/// `|y| ≤ radius`; the first hit in enumeration order wins.
///
/// When the dual distance is recorded in `code` and `2·radius + 1 ≤ d⊥`, a
/// second solution within the radius is reported as
/// [`Error::DecoderAmbiguity`].
pub fn bdd_decode(code: &crate::field::CodeSpec, syndrome: &[u32], radius: usize, cap: u64) -> Result<Vec<u32>> {
    let b = code.parity_check();
    check_len(b.cols(), syndrome.len())?;
    let (m, p) = (b.rows(), b.field().modulus());
    check_cap(ball_size(m, radius, p), cap)?;
    let unique = code
        .dual_distance()
        .is_some_and(|(d, _)| d.map_or(true, |d| 2 * radius < d));
    let all = vec![(0..m).collect::<Vec<_>>()];
    let mut found: Option<Vec<u32>> = None;
    let mut ambiguous = false;
    for w in 0..=radius.min(m) {
        for_each_error(&all, &[w], p, |support| {
            if ambiguous || (found.is_some() && !unique) {
                return;
            }
            let y = dense(support, m);
            if b.syndrome(&y).expect("length m") == syndrome {
                if found.is_some() {
                    ambiguous = true;
                } else {
                    found = Some(y);
                }
            }
        });
        if found.is_some() && !unique {
            break;
        }
    }
    if ambiguous {
        return Err(Error::DecoderAmbiguity);
    }
    found.ok_or(Error::DecodingFailure)
}

/// Bounded-distance decoder backed by a syndrome table of all patterns of
/// weight at most `radius` (the lightest, then first-enumerated, wins).
#[derive(Debug, Clone)]
pub struct BoundedDistanceDecoder {
    radius: usize,
    table: HashMap<Vec<u32>, Vec<u32>>,
}

impl BoundedDistanceDecoder {
    pub fn new(matrix: &FieldMatrix, radius: usize, cap: u64) -> Result<Self> {
        let (m, p) = (matrix.rows(), matrix.field().modulus());
        check_cap(ball_size(m, radius, p), cap)?;
        let all = vec![(0..m).collect::<Vec<_>>()];
        let mut table = HashMap::new();
        for w in 0..=radius.min(m) {
            for_each_error(&all, &[w], p, |support| {
                let y = dense(support, m);
                let s = matrix.syndrome(&y).expect("length m");
                table.entry(s).or_insert(y);
            });
        }
        Ok(Self { radius, table })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

impl SyndromeDecoder for BoundedDistanceDecoder {
    fn decode(&self, syndrome: &[u32]) -> Result<Vec<u32>> {
        self.table.get(syndrome).cloned().ok_or(Error::DecodingFailure)
    }
}

/// Reed–Solomon parameters for `Bᵀ` with rows `(1, X_i, …, X_i^{n−1})`:
/// the syndrome is `S_k = Σ_i e_i X_i^k` for `k < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReedSolomonParams {
    field: PrimeField,
    locators: Vec<u32>,
    syndrome_len: usize,
    inverses: Vec<u32>,
    /// `powers[i][k] = X_i^k` for `k < n`.
    powers: Vec<Vec<u32>>,
    /// Inverse of every field element, kept for small fields only.
    inverse_table: Option<Vec<u32>>,
}

/// Largest field for which [`ReedSolomonParams`] tabulates inverses.
const INVERSE_TABLE_LIMIT: u32 = 1 << 16;

impl ReedSolomonParams {
    pub fn new(field: PrimeField, locators: Vec<u32>, syndrome_len: usize) -> Result<Self> {
        let mut seen = HashSet::new();
        for &x in &locators {
            if x == 0 || x >= field.modulus() || !seen.insert(x) {
                return Err(Error::invalid("locators must be distinct nonzero field elements"));
            }
        }
        if syndrome_len == 0 {
            return Err(Error::invalid("syndrome length must be positive"));
        }
        let inverses = locators.iter().map(|&x| field.inv(x)).collect();
        let powers = locators
            .iter()
            .map(|&x| (0..syndrome_len).map(|k| field.pow(x, k as u64)).collect())
            .collect();
        let inverse_table = (field.modulus() <= INVERSE_TABLE_LIMIT)
            .then(|| (0..field.modulus()).map(|a| if a == 0 { 0 } else { field.inv(a) }).collect());
        Ok(Self {
            field,
            locators,
            syndrome_len,
            inverses,
            powers,
            inverse_table,
        })
    }

    fn inv(&self, a: u32) -> u32 {
        match &self.inverse_table {
            Some(table) => table[a as usize],
            None => self.field.inv(a),
        }
    }

    /// Reads the locators from a Vandermonde matrix, checking its structure.
    pub fn from_vandermonde(matrix: &FieldMatrix) -> Result<Self> {
        let f = matrix.field();
        let locators: Vec<u32> = (0..matrix.rows())
            .map(|i| if matrix.cols() > 1 { matrix.get(i, 1) } else { 0 })
            .collect();
        for (i, &x) in locators.iter().enumerate() {
            for k in 0..matrix.cols() {
                if matrix.get(i, k) != f.pow(x, k as u64) {
                    return Err(Error::invalid("matrix is not of Vandermonde form"));
                }
            }
        }
        Self::new(f, locators, matrix.cols())
    }

    pub fn locators(&self) -> &[u32] {
        &self.locators
    }

    /// Largest radius the syndrome length supports, `⌊(n − 1)/2⌋`.
    pub fn design_radius(&self) -> usize {
        (self.syndrome_len - 1) / 2
    }
}

fn poly_eval(f: PrimeField, coeffs: &[u32], z: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, z), c))
}

/// Berlekamp–Massey decoding of a Reed–Solomon syndrome: locator synthesis,
/// exhaustive root search over `𝔽_p^*`, then Forney magnitudes. The result
/// is re-encoded and checked before it is returned.
pub fn bm_decode(params: &ReedSolomonParams, syndrome: &[u32], radius: usize) -> Result<Vec<u32>> {
    let f = params.field;
    check_len(params.syndrome_len, syndrome.len())?;
    if 2 * radius >= params.syndrome_len + 1 && radius > 0 {
        return Err(Error::invalid(format!(
            "radius {radius} too large for {} syndromes",
            params.syndrome_len
        )));
    }
    let m = params.locators.len();
    if syndrome.iter().all(|&s| s == 0) {
        return Ok(vec![0; m]);
    }
    // Locator polynomial Λ(z) = Π (1 − X_i z), coefficients low degree first.
    let mut lambda = Vec::with_capacity(syndrome.len() + 2);
    lambda.push(1u32);
    let mut prev = lambda.clone();
    let mut next = Vec::with_capacity(syndrome.len() + 2);
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u32;
    for k in 0..syndrome.len() {
        let mut disc = syndrome[k];
        for i in 1..=len.min(lambda.len() - 1) {
            disc = f.add(disc, f.mul(lambda[i], syndrome[k - i]));
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let scale = f.mul(disc, params.inv(prev_disc));
        next.clear();
        next.extend_from_slice(&lambda);
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i + shift] = f.sub(next[i + shift], f.mul(scale, c));
        }
        if 2 * len <= k {
            // prev ← Λ, Λ ← next; the old prev buffer is reused next round.
            std::mem::swap(&mut prev, &mut lambda);
            std::mem::swap(&mut lambda, &mut next);
            len = k + 1 - len;
            prev_disc = disc;
            shift = 1;
        } else {
            std::mem::swap(&mut lambda, &mut next);
            shift += 1;
        }
    }
    while lambda.len() > 1 && *lambda.last().expect("nonempty") == 0 {
        lambda.pop();
    }
    if len > radius || lambda.len() - 1 != len {
        return Err(Error::DecodingFailure);
    }
    let positions: Vec<usize> = (0..m)
        .filter(|&i| poly_eval(f, &lambda, params.inverses[i]) == 0)
        .collect();
    if positions.len() != len {
        return Err(Error::DecodingFailure);
    }
    // Ω = S·Λ mod z^n, Λ' its formal derivative.
    let n = syndrome.len();
    let mut omega = vec![0u32; n];
    for (i, &l) in lambda.iter().enumerate() {
        for (k, &s) in syndrome.iter().enumerate() {
            if i + k < n {
                omega[i + k] = f.add(omega[i + k], f.mul(l, s));
            }
        }
    }
    let derivative: Vec<u32> = lambda
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| f.mul(c, (i as u64 % f.modulus() as u64) as u32))
        .collect();
    let mut error = vec![0u32; m];
    for &i in &positions {
        let x = params.locators[i];
        let x_inv = params.inverses[i];
        let denom = poly_eval(f, &derivative, x_inv);
        if denom == 0 {
            return Err(Error::DecodingFailure);
        }
        let num = f.mul(x, poly_eval(f, &omega, x_inv));
        error[i] = f.neg(f.mul(num, params.inv(denom)));
    }
    let consistent = (0..n).all(|k| {
        let s = positions
            .iter()
            .fold(0, |acc, &i| f.add(acc, f.mul(error[i], params.powers[i][k])));
        s == syndrome[k]
    });
    if !consistent || hamming_weight(&error) > radius {
        return Err(Error::DecodingFailure);
    }
    Ok(error)
}

/// Reed–Solomon decoder wrapping [`bm_decode`].
#[derive(Debug, Clone)]
pub struct ReedSolomonDecoder {
    params: ReedSolomonParams,
    radius: usize,
}

impl ReedSolomonDecoder {
    pub fn new(params: ReedSolomonParams, radius: usize) -> Self {
        Self { params, radius }
    }
}

impl SyndromeDecoder for ReedSolomonDecoder {
    fn decode(&self, syndrome: &[u32]) -> Result<Vec<u32>> {
        bm_decode(&self.params, syndrome, self.radius)
    }
}

/// Bounded-distance decoder that additionally fails on a listed set of
/// error patterns. Correctly decoded patterns stay syndrome-injective.
#[derive(Debug, Clone)]
pub struct FailureAnnotatedDecoder {
    inner: BoundedDistanceDecoder,
    failures: HashSet<Vec<u32>>,
}

impl FailureAnnotatedDecoder {
    pub fn new(inner: BoundedDistanceDecoder, failures: HashSet<Vec<u32>>) -> Self {
        Self { inner, failures }
    }
}

impl SyndromeDecoder for FailureAnnotatedDecoder {
    fn decode(&self, syndrome: &[u32]) -> Result<Vec<u32>> {
        let y = self.inner.decode(syndrome)?;
        if self.failures.contains(&y) {
            Err(Error::DecodingFailure)
        } else {
            Ok(y)
        }
    }
}

/// Decoder choices for the Fourier route.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderModel {
    BoundedDistance { radius: usize },
    ReedSolomon { radius: usize },
    TableWithFailures { radius: usize, failures: Vec<Vec<u32>> },
}

impl DecoderModel {
    /// Builds the decoder for parity-check matrix `matrix`.
    pub fn instantiate(&self, matrix: &FieldMatrix, cap: u64) -> Result<Box<dyn SyndromeDecoder>> {
        Ok(match self {
            DecoderModel::BoundedDistance { radius } => Box::new(BoundedDistanceDecoder::new(matrix, *radius, cap)?),
            DecoderModel::ReedSolomon { radius } => Box::new(ReedSolomonDecoder::new(
                ReedSolomonParams::from_vandermonde(matrix)?,
                *radius,
            )),
            DecoderModel::TableWithFailures { radius, failures } => {
                for y in failures {
                    check_len(matrix.rows(), y.len())?;
                }
                Box::new(FailureAnnotatedDecoder::new(
                    BoundedDistanceDecoder::new(matrix, *radius, cap)?,
                    failures.iter().cloned().collect(),
                ))
            }
        })
    }

    /// Fails unless `2l + 1 < d⊥` for bounded-distance models.
    pub fn check_sufficient(&self, dual_distance: Option<usize>) -> Result<()> {
        match self {
            DecoderModel::BoundedDistance { radius } => {
                DistanceHypothesis::Expectation.check(*radius, dual_distance)
            }
            _ => Ok(()),
        }
    }
}

/// Parses a failure set: one bitstring per line.
pub fn parse_failure_set(text: &str) -> Result<Vec<Vec<u32>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::parse(i + 1, format!("unexpected character `{c}`"))),
                })
                .collect()
        })
        .collect()
}

pub fn write_failure_set(failures: &[Vec<u32>]) -> String {
    failures
        .iter()
        .map(|y| y.iter().map(|v| if *v == 0 { '0' } else { '1' }).collect::<String>() + "\n")
        .collect()
}

/// Exact decoder failure rates per layer of `T_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureProfile {
    pub index: DegreeIndexSet,
    /// `γ_j = |F_j|/|E_j|`.
    pub gamma: Vec<f64>,
    pub gamma_max: f64,
    /// `γ̃^{(0)}_{j,t}`, `None` where `j + e_t ∉ T_l`.
    pub tilde0: Vec<Vec<Option<f64>>>,
    /// `γ̃^{(1)}_{j,t}` for `j` with `j_t ≥ 1`, `None` elsewhere.
    pub tilde1: Vec<Vec<Option<f64>>>,
    pub tilde_max: f64,
}

impl FailureProfile {
    /// CSV with header `j_tuple,gamma,gtilde0,gtilde1`; block tuples and
    /// per-block rates are `;`-separated, undefined rates are `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j_tuple,gamma,gtilde0,gtilde1\n");
        let fmt = |v: &[Option<f64>]| {
            v.iter()
                .map(|x| x.map_or("nan".to_string(), |x| format!("{x:.12}")))
                .collect::<Vec<_>>()
                .join(";")
        };
        for (k, j) in self.index.iter().enumerate() {
            let tuple = j.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
            let _ = writeln!(
                out,
                "{tuple},{:.12},{},{}",
                self.gamma[k],
                fmt(&self.tilde0[k]),
                fmt(&self.tilde1[k])
            );
        }
        out
    }
}

/// Enumerates every layer `E_j` and counts failures of `decoder`.
pub fn failure_profile(
    matrix: &FieldMatrix,
    decoder: &dyn SyndromeDecoder,
    members: &[Vec<usize>],
    budget: usize,
    cap: u64,
) -> Result<FailureProfile> {
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    check_len(matrix.rows(), sizes.iter().sum())?;
    let index = DegreeIndexSet::enumerate(&sizes, budget, cap)?;
    let p = matrix.field().modulus();
    let layer_sizes: Vec<f64> = index.iter().map(|j| layer_size(&sizes, j, p)).collect();
    check_cap(layer_sizes.iter().sum(), cap)?;
    let m = matrix.rows();
    let block_of: Vec<usize> = {
        let mut out = vec![0; m];
        for (t, s) in members.iter().enumerate() {
            for &i in s {
                out[i] = t;
            }
        }
        out
    };
    // For each layer: total failures, and per block the failures with y_i = 0
    // and y_i ≠ 0 summed over i ∈ S_t.
    let counts = (0..index.len())
        .into_par_iter()
        .map(|k| {
            let mut total = 0u64;
            let mut zero = vec![0u64; sizes.len()];
            let mut nonzero = vec![0u64; sizes.len()];
            let mut err = None;
            for_each_error(members, index.get(k), p, |support| {
                if err.is_some() {
                    return;
                }
                let y = dense(support, m);
                let s = matrix.syndrome(&y).expect("length m");
                let ok = match decoder.decode(&s) {
                    Ok(d) => d == y,
                    Err(Error::DecodingFailure) => false,
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
                if ok {
                    return;
                }
                total += 1;
                let mut hits = vec![0u64; sizes.len()];
                for &(i, _) in support {
                    hits[block_of[i]] += 1;
                }
                for t in 0..sizes.len() {
                    nonzero[t] += hits[t];
                    zero[t] += sizes[t] as u64 - hits[t];
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok((total, zero, nonzero)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let gamma: Vec<f64> = counts
        .iter()
        .zip(&layer_sizes)
        .map(|(c, s)| c.0 as f64 / s)
        .collect();
    let gamma_max = gamma.iter().cloned().fold(0.0, f64::max);
    let n_blocks = sizes.len();
    let mut tilde0 = vec![vec![None; n_blocks]; index.len()];
    let mut tilde1 = vec![vec![None; n_blocks]; index.len()];
    let mut tilde_max: f64 = 0.0;
    for k in 0..index.len() {
        let j = index.get(k);
        for t in 0..n_blocks {
            if j[t] >= 1 {
                tilde1[k][t] = Some(counts[k].2[t] as f64 / (j[t] as f64 * layer_sizes[k]));
            }
        }
    }
    for k in 0..index.len() {
        let j = index.get(k);
        for t in 0..n_blocks {
            let Some(up) = index.raise(k, t) else { continue };
            let t0 = counts[k].1[t] as f64 / ((sizes[t] - j[t]) as f64 * layer_sizes[k]);
            tilde0[k][t] = Some(t0);
            let t1 = tilde1[up][t].expect("raised layer has j_t >= 1");
            tilde_max = tilde_max.max(0.5 * (t0 + t1));
        }
    }
    Ok(FailureProfile {
        index,
        gamma,
        gamma_max,
        tilde0,
        tilde1,
        tilde_max,
    })
}

/// `wᵀAw/‖w‖² − 2·γ̃_max/(1 − γ_max)·Σ_t g_t(m_t + 1)` for the `κ = 0`
/// matrix `A`.
pub fn theorem_bound(w: &[f64], matrix: &SpectralMatrix, profile: &FailureProfile) -> Result<f64> {
    if w.iter().any(|&x| x < 0.0) {
        return Err(Error::invalid("coefficients must be nonnegative"));
    }
    if profile.gamma_max >= 1.0 {
        return Err(Error::invalid("gamma_max = 1: every pattern of some layer fails"));
    }
    if matrix.index() != &profile.index {
        return Err(Error::invalid("profile and matrix use different index sets"));
    }
    let penalty: f64 = matrix
        .weights()
        .iter()
        .zip(matrix.index().sizes())
        .map(|(g, &m)| g * (m as f64 + 1.0))
        .sum();
    Ok(matrix.rayleigh(w)? - 2.0 * profile.tilde_max / (1.0 - profile.gamma_max) * penalty)
}

/// Monte-Carlo estimate of the expectation averaged over uniform targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Averages the imperfect-decoder expectation over `samples` uniformly random
/// 𝔽₂ target vectors `v`, keeping `B`, the blocks and the decoder fixed.
pub fn imperfect_expectation_monte_carlo(
    inst: &WeightedMaxLinsatInstance,
    index: &DegreeIndexSet,
    w: &[f64],
    decoder: &dyn SyndromeDecoder,
    samples: usize,
    seed: u64,
    cap: u64,
) -> Result<MonteCarloEstimate> {
    if inst.p() != 2 {
        return Err(Error::invalid("the averaged bound is stated over F_2"));
    }
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let plan = FourierPlan::new(inst, index, decoder, cap)?;
    let values = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let v: Vec<u32> = (0..inst.m()).map(|_| rng.gen_range(0..2)).collect();
            let sample = WeightedMaxLinsatInstance::binary(inst.matrix().clone(), &v, inst.blocks().clone())?;
            let outcome = plan.construct(&sample.centered_stats(), w)?;
            exact_expectation(&sample, &outcome.state)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
    Ok(MonteCarloEstimate {
        samples,
        mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

/// Default number of Prange trials.
pub const DEFAULT_PRANGE_TRIALS: usize = 200;
/// Resampling attempts inside the heaviest block before greedy extension.
pub const HEAVY_BLOCK_RESAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct PrangeOutcome {
    pub best_assignment: Vec<u32>,
    pub best_value: f64,
    /// Weighted satisfaction ratio of each trial.
    pub trial_ratios: Vec<f64>,
}

impl PrangeOutcome {
    pub fn best_ratio(&self) -> f64 {
        self.trial_ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean trial ratio and the half-width of its 95% normal interval.
    pub fn mean_ratio(&self) -> (f64, f64) {
        let n = self.trial_ratios.len() as f64;
        let mean = self.trial_ratios.iter().sum::<f64>() / n;
        if n < 2.0 {
            return (mean, f64::NAN);
        }
        let var = self.trial_ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, 1.96 * (var / n).sqrt())
    }
}

/// Weighted Prange: pick `n` rows, heaviest blocks first, satisfy them
/// exactly with uniformly chosen targets, and keep the best of `trials`.
pub fn weighted_prange(inst: &WeightedMaxLinsatInstance, trials: usize, seed: u64) -> Result<PrangeOutcome> {
    let n = inst.n();
    let rank = inst.matrix().rank();
    if rank < n {
        return Err(Error::RankDeficient { rank, needed: n });
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let blocks = inst.blocks();
    let mut order: Vec<usize> = (0..blocks.block_count()).collect();
    order.sort_by(|&a, &b| blocks.weights()[b].total_cmp(&blocks.weights()[a]).then(a.cmp(&b)));
    let trials_out = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let rows = information_set(inst, &order, &mut rng);
            let sub = inst.matrix().select_rows(&rows);
            let rhs: Vec<u32> = rows
                .iter()
                .map(|&i| *inst.targets()[i].choose(&mut rng).expect("r >= 1"))
                .collect();
            let x = sub
                .solve_square(&rhs)?
                .ok_or_else(|| Error::Inconsistent("information set is singular".into()))?;
            let value = inst.evaluate_objective(&x)?;
            let ratio = inst.satisfaction_ratio(&x)?;
            Ok((x, value, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, t) in trials_out.iter().enumerate() {
        if t.1 > trials_out[best].1 {
            best = k;
        }
    }
    Ok(PrangeOutcome {
        best_assignment: trials_out[best].0.clone(),
        best_value: trials_out[best].1,
        trial_ratios: trials_out.iter().map(|t| t.2).collect(),
    })
}

/// `n` linearly independent rows. If the heaviest block holds at least `n`
/// rows, up to [`HEAVY_BLOCK_RESAMPLES`] random `n`-subsets of it are tried;
/// otherwise rows are added greedily, heaviest block first, each block in
/// random order.
fn information_set(inst: &WeightedMaxLinsatInstance, order: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = inst.n();
    let heavy = inst.blocks().members(order[0]);
    if heavy.len() >= n {
        for _ in 0..HEAVY_BLOCK_RESAMPLES {
            let rows: Vec<usize> = heavy.choose_multiple(rng, n).copied().collect();
            if inst.matrix().select_rows(&rows).rank() == n {
                return rows;
            }
        }
    }
    let mut rows = Vec::with_capacity(n);
    let mut basis = EchelonBasis::new(inst.field());
    for &t in order {
        let mut pool = inst.blocks().members(t).to_vec();
        pool.shuffle(rng);
        for i in pool {
            if basis.insert(inst.matrix().row(i)) {
                rows.push(i);
            }
            if rows.len() == n {
                return rows;
            }
        }
    }
    rows
}

/// Incrementally grown row-echelon basis for independence tests.
struct EchelonBasis {
    field: PrimeField,
    rows: Vec<(usize, Vec<u32>)>,
}

impl EchelonBasis {
    fn new(field: PrimeField) -> Self {
        Self { field, rows: Vec::new() }
    }

    /// Adds `row` if it is independent of the rows seen so far.
    fn insert(&mut self, row: &[u32]) -> bool {
        let f = self.field;
        let mut v = row.to_vec();
        for (pivot, b) in &self.rows {
            let c = v[*pivot];
            if c != 0 {
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(v[pivot]);
        v.iter_mut().for_each(|x| *x = f.mul(*x, inv));
        self.rows.push((pivot, v));
        true
    }
}

/// Syndrome-table index of a pattern, used by callers that key on
/// syndromes directly.
pub fn syndrome_index(matrix: &FieldMatrix, y: &[u32]) -> Result<u64> {
    Ok(vector_to_index(&matrix.syndrome(y)?, matrix.field().modulus()))
}
