//! Enumeration of error patterns by per-block Hamming weight.

use crate::krawtchouk::binomial_f64;

/// Calls `visit` with every sparse vector `y ∈ 𝔽_p^m` whose support meets
/// block `t` (given by `members[t]`) in exactly `weights[t]` positions.
///
/// The support is reported as `(position, value)` pairs sorted by block and
/// then by position; nonzero values run over `1..p`. The visiting order is
/// deterministic: supports in lexicographic order of position subsets, then
/// values in odometer order.
pub fn for_each_error<F>(members: &[Vec<usize>], weights: &[usize], p: u32, mut visit: F)
where
    F: FnMut(&[(usize, u32)]),
{
    let total: usize = weights.iter().sum();
    let mut positions = Vec::with_capacity(total);
    choose_blocks(members, weights, 0, &mut positions, &mut |pos: &[usize]| {
        let mut support: Vec<(usize, u32)> = pos.iter().map(|&i| (i, 1)).collect();
        loop {
            visit(&support);
            let mut k = support.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if support[k].1 + 1 < p {
                    support[k].1 += 1;
                    break;
                }
                support[k].1 = 1;
            }
        }
    });
}

fn choose_blocks<F>(members: &[Vec<usize>], weights: &[usize], t: usize, chosen: &mut Vec<usize>, visit: &mut F)
where
    F: FnMut(&[usize]),
{
    if t == members.len() {
        visit(chosen);
        return;
    }
    let base = chosen.len();
    combinations(&members[t], weights[t], 0, chosen, &mut |c: &mut Vec<usize>| {
        choose_blocks(members, weights, t + 1, c, visit);
    });
    chosen.truncate(base);
}

fn combinations<F>(pool: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, visit: &mut F)
where
    F: FnMut(&mut Vec<usize>),
{
    if k == 0 {
        let len = chosen.len();
        visit(chosen);
        chosen.truncate(len);
        return;
    }
    for i in start..=pool.len().saturating_sub(k) {
        if pool.len() < k {
            break;
        }
        chosen.push(pool[i]);
        combinations(pool, k - 1, i + 1, chosen, visit);
        chosen.pop();
    }
}

/// `|E_j| = Π_t C(m_t, j_t)(p − 1)^{j_t}`.
pub fn layer_size(sizes: &[usize], weights: &[usize], p: u32) -> f64 {
    sizes
        .iter()
        .zip(weights)
        .map(|(&m, &j)| binomial_f64(m, j) * ((p - 1) as f64).powi(j as i32))
        .product()
}

/// Expands a sparse support into a dense vector of length `m`.
pub fn dense(support: &[(usize, u32)], m: usize) -> Vec<u32> {
    let mut y = vec![0u32; m];
    for &(i, v) in support {
        y[i] = v;
    }
    y
}
