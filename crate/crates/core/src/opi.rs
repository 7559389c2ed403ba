//! Weighted optimal polynomial intersection (OPI).
//!
//! For a prime `p` and `n < p − 1`, each `y = γ^i ∈ 𝔽_p^*` contributes the
//! constraint `Q(y) ∈ F_y` on a polynomial `Q` of degree below `n`, with
//! `|F_y| = ⌊p/2⌋`. Half of the constraints carry weight 1 and half weight
//! `g`. The dual code of the resulting Vandermonde matrix is Reed–Solomon
//! with distance `n + 1`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::gamma_functional;
use crate::decoding::{
    weighted_prange, DecoderModel, ReedSolomonDecoder, ReedSolomonParams, DEFAULT_PRANGE_TRIALS,
};
use crate::error::{Error, Result};
use crate::field::{FieldMatrix, PrimeField};
use crate::problem::{BlockStructure, WeightedMaxLinsatInstance};
use crate::simulator::{exact_expectation, FourierPlan, StateVector};
use crate::spectral::{expected_value, SpectralMatrix, DEFAULT_INDEX_CAP};

/// How constraint `i` (for `y = γ^i`) is assigned to a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockAssignment {
    /// Even exponents in block 0, odd exponents in block 1.
    Alternating,
    /// A uniformly random balanced split, drawn from the seed.
    RandomBalanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpiInstance {
    pub p: u32,
    pub n: usize,
    pub primitive: u32,
    pub weight: f64,
    pub assignment: BlockAssignment,
}

/// Builds the weighted OPI instance and its Max-LINSAT form.
pub fn build_opi_instance(
    p: u32,
    n: usize,
    g: f64,
    seed: u64,
    assignment: BlockAssignment,
) -> Result<(OpiInstance, WeightedMaxLinsatInstance)> {
    let field = PrimeField::new(p)?;
    if p < 3 {
        return Err(Error::invalid("OPI needs an odd prime"));
    }
    if n == 0 || n >= p as usize - 1 {
        return Err(Error::invalid(format!("need 0 < n < p - 1, got n = {n}")));
    }
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::invalid("weight g must be positive"));
    }
    let m = p as usize - 1;
    let primitive = field.primitive_element();
    let rows: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            let y = field.pow(primitive, i as u64);
            (0..n).map(|k| field.pow(y, k as u64)).collect()
        })
        .collect();
    let matrix = FieldMatrix::from_rows(field, &rows)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = (p / 2) as usize;
    let targets: Vec<Vec<u32>> = (0..m)
        .map(|_| {
            let mut all: Vec<u32> = (0..p).collect();
            all.shuffle(&mut rng);
            all.truncate(half);
            all
        })
        .collect();
    let block_ids: Vec<usize> = match assignment {
        BlockAssignment::Alternating => (0..m).map(|i| i % 2).collect(),
        BlockAssignment::RandomBalanced => {
            let mut ids: Vec<usize> = (0..m).map(|i| usize::from(i >= m / 2)).collect();
            ids.shuffle(&mut rng);
            ids
        }
    };
    let blocks = BlockStructure::new(block_ids, vec![1.0, g])?;
    let inst = WeightedMaxLinsatInstance::new(matrix, targets, blocks)?;
    Ok((
        OpiInstance {
            p,
            n,
            primitive,
            weight: g,
            assignment,
        },
        inst,
    ))
}

/// `Γ_g(x) = max_{α₁+α₂≤x} √(α₁(1−α₁)) + g√(α₂(1−α₂))`.
pub fn gamma_g_of_x(g: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("x = {x} outside (0, 1)")));
    }
    Ok(gamma_functional(&[1.0, g], &[0.5, 0.5], 0.0, x / 2.0)?.value)
}

/// `R^DQI_g(x) = ½ + Γ_g(x)/(1 + g)`.
pub fn r_dqi(g: f64, x: f64) -> Result<f64> {
    Ok(0.5 + gamma_g_of_x(g, x)? / (1.0 + g))
}

/// Asymptotic weighted satisfaction ratio of weighted Prange.
pub fn r_prange(g: f64, x: f64) -> Result<f64> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::invalid("weight g must be positive"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("x = {x} outside [0, 1]")));
    }
    let (heavy, light) = if g >= 1.0 { (g, 1.0) } else { (1.0, g) };
    Ok(if x <= 0.5 {
        0.5 + heavy * x / (1.0 + g)
    } else {
        (heavy + light * x) / (1.0 + g)
    })
}

/// Strict margin required in [`dominance_scan`].
pub const DOMINANCE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceRow {
    pub g: f64,
    pub x: f64,
    pub r_dqi: f64,
    pub r_prange: f64,
}

/// Evaluates both ratio curves on the grid and fails on the first point
/// where DQI does not beat Prange by [`DOMINANCE_MARGIN`].
pub fn dominance_scan(gs: &[f64], xs: &[f64]) -> Result<Vec<DominanceRow>> {
    let mut rows = Vec::with_capacity(gs.len() * xs.len());
    for &g in gs {
        for &x in xs {
            let row = DominanceRow {
                g,
                x,
                r_dqi: r_dqi(g, x)?,
                r_prange: r_prange(g, x)?,
            };
            if row.r_dqi <= row.r_prange + DOMINANCE_MARGIN {
                return Err(Error::Dominated {
                    g,
                    x,
                    r_dqi: row.r_dqi,
                    r_prange: row.r_prange,
                });
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn dominance_csv(rows: &[DominanceRow]) -> String {
    let mut out = String::from("g,x,r_dqi,r_prange\n");
    for r in rows {
        let _ = writeln!(out, "{:.12},{:.12},{:.12},{:.12}", r.g, r.x, r.r_dqi, r.r_prange);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub radius: usize,
    pub dual_distance: Option<usize>,
    /// Expectation of `F_g` on the Fourier-route state (Berlekamp–Massey).
    pub simulated: f64,
    /// Expectation from the spectral formula.
    pub predicted: f64,
    /// Expectation of `F_g` on the uniform state.
    pub uniform: f64,
    /// Top eigenvalue of the spectral matrix.
    pub lambda_max: f64,
    /// Weighted satisfaction ratio of the DQI state.
    pub dqi_ratio: f64,
    /// Best weighted satisfaction ratio over the Prange trials.
    pub prange_ratio: f64,
}

/// Builds a small OPI instance, prepares the DQI state for the top
/// eigenvector of the spectral matrix through the Fourier route with
/// Berlekamp–Massey decoding at radius `⌊(n−1)/2⌋`, and compares it with the
/// spectral prediction and with weighted Prange.
pub fn end_to_end_small(p: u32, n: usize, g: f64, seed: u64, cap: u64) -> Result<EndToEndReport> {
    let (_, inst) = build_opi_instance(p, n, g, seed, BlockAssignment::Alternating)?;
    let params = ReedSolomonParams::from_vandermonde(inst.matrix())?;
    let radius = params.design_radius();
    let dual_distance = Some(n + 1);
    DecoderModel::BoundedDistance { radius }.check_sufficient(dual_distance)?;
    let stats = inst.centered_stats();
    let blocks = inst.blocks();
    let matrix = SpectralMatrix::for_blocks(&blocks.sizes(), blocks.weights(), radius, stats.skew, DEFAULT_INDEX_CAP)?;
    let top = matrix.lambda_max()?;
    let decoder = ReedSolomonDecoder::new(params, radius);
    let plan = FourierPlan::new(&inst, matrix.index(), &decoder, cap)?;
    let state = plan.construct(&stats, &top.vector)?.state;
    let simulated = exact_expectation(&inst, &state)?;
    let predicted = expected_value(&inst, &matrix, &top.vector, false, cap)?;
    let uniform = exact_expectation(&inst, &StateVector::uniform(p, n))?;
    let total = blocks.total_weight();
    let prange = weighted_prange(&inst, DEFAULT_PRANGE_TRIALS, seed)?;
    Ok(EndToEndReport {
        radius,
        dual_distance,
        simulated,
        predicted,
        uniform,
        lambda_max: top.value,
        dqi_ratio: 0.5 + simulated / (2.0 * total),
        prange_ratio: prange.best_ratio(),
    })
}
