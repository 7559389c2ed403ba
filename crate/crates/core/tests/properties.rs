//! Property tests for the structural invariants of each module.

mod common;

use common::CAP;
use multidqi::asymptotics::{gamma_functional, GammaProblem};
use multidqi::decoding::{
    failure_profile, weighted_prange, BoundedDistanceDecoder, FailureAnnotatedDecoder, SyndromeDecoder,
};
use multidqi::field::{FieldMatrix, PrimeField};
use multidqi::hamdqi::{dense_rho_p, ham_coefficients, hermitian_eigenvalues, r_multinomial, random_commuting_hamiltonian};
use multidqi::krawtchouk::kraw;
use multidqi::opi::{r_dqi, r_prange};
use multidqi::problem::{
    evaluate_signed, index_to_vector, normalize_signed, BlockStructure, WeightedMaxLinsatInstance,
};
use multidqi::simulator::{
    apply_block_operator, basis_states, fourier_transform, StateVector,
};
use multidqi::spectral::{product_ansatz_for, DegreeIndexSet, SpectralMatrix};
use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::HashSet;

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = FieldMatrix> {
    (prime(), 1..=max_rows, 1..=max_cols).prop_flat_map(|(p, m, n)| {
        prop::collection::vec(0..p, m * n)
            .prop_map(move |e| FieldMatrix::new(PrimeField::new(p).unwrap(), m, n, e).unwrap())
    })
}

fn binary_instance() -> impl Strategy<Value = WeightedMaxLinsatInstance> {
    (2usize..=4, 2usize..=4, 2usize..=6, any::<u64>(), 0.2f64..3.0).prop_map(|(a, b, n, seed, g)| {
        let blocks = BlockStructure::contiguous(&[a, b], vec![1.0, g]).unwrap();
        WeightedMaxLinsatInstance::random(PrimeField::new(2).unwrap(), n, blocks, 1, seed).unwrap()
    })
}

fn span(field: PrimeField, basis: &[Vec<u32>], m: usize) -> HashSet<Vec<u32>> {
    let p = field.modulus();
    let mut out = HashSet::new();
    let total = (p as u64).pow(basis.len() as u32);
    for idx in 0..total {
        let coeffs = index_to_vector(idx, p, basis.len());
        let mut v = vec![0u32; m];
        for (c, b) in coeffs.iter().zip(basis) {
            for (x, &y) in v.iter_mut().zip(b) {
                *x = field.add(*x, field.mul(*c, y));
            }
        }
        out.insert(v);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn syndrome_vanishes_exactly_on_dual_codewords(b in matrix(6, 4)) {
        let f = b.field();
        let m = b.rows();
        let dual = span(f, &b.dual_basis(), m);
        let total = (f.modulus() as u64).pow(m as u32);
        for idx in 0..total {
            let y = index_to_vector(idx, f.modulus(), m);
            let zero = b.syndrome(&y).unwrap().iter().all(|&s| s == 0);
            prop_assert_eq!(zero, dual.contains(&y));
        }
    }

    #[test]
    fn rank_plus_dual_dimension_is_row_count(b in matrix(8, 6)) {
        prop_assert_eq!(b.rank() + b.dual_basis().len(), b.rows());
    }

    #[test]
    fn dual_distance_invariant_under_row_moves(b in matrix(7, 4), seed in any::<u64>()) {
        let f = b.field();
        let m = b.rows();
        let mut order: Vec<usize> = (0..m).collect();
        let shift = (seed % m as u64) as usize;
        order.rotate_left(shift);
        let scale = 1 + (seed % (f.modulus() as u64 - 1).max(1)) as u32 % (f.modulus() - 1).max(1);
        let rows: Vec<Vec<u32>> = order
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let c = if k % 2 == 0 { scale } else { 1 };
                b.row(i).iter().map(|&v| f.mul(c, v)).collect()
            })
            .collect();
        let moved = FieldMatrix::from_rows(f, &rows).unwrap();
        prop_assert_eq!(b.dual_min_distance(CAP).unwrap(), moved.dual_min_distance(CAP).unwrap());
    }

    #[test]
    fn signed_weights_normalize(b in matrix(5, 3), seed in any::<u64>()) {
        let f = b.field();
        let p = f.modulus();
        let m = b.rows();
        let mut state = seed;
        let mut next = || { state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); state >> 33 };
        let targets: Vec<Vec<u32>> = (0..m).map(|_| (0..p).filter(|_| next() % 2 == 0).collect()).collect();
        let coeffs: Vec<f64> = (0..m).map(|_| (next() % 7) as f64 - 3.0).collect();
        let (t2, c2) = normalize_signed(f, &targets, &coeffs).unwrap();
        prop_assert!(c2.iter().all(|&c| c >= 0.0));
        for idx in 0..(p as u64).pow(b.cols() as u32) {
            let x = index_to_vector(idx, p, b.cols());
            let before = evaluate_signed(&b, &targets, &coeffs, &x).unwrap();
            let after = evaluate_signed(&b, &t2, &c2, &x).unwrap();
            prop_assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_objective_counts_unsatisfied(inst in binary_instance()) {
        let v = inst.binary_targets().unwrap();
        let blocks = inst.blocks();
        for idx in 0..(1u64 << inst.n()) {
            let x = index_to_vector(idx, 2, inst.n());
            let bx = inst.matrix().mul_vec(&x).unwrap();
            let expected: f64 = (0..blocks.block_count())
                .map(|t| {
                    let wrong = blocks.members(t).iter().filter(|&&i| bx[i] != v[i]).count();
                    blocks.weights()[t] * (blocks.members(t).len() as f64 - 2.0 * wrong as f64)
                })
                .sum();
            prop_assert!((inst.evaluate_objective(&x).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn centered_decomposition(p in prime(), seed in any::<u64>(), r_frac in 0.0f64..1.0) {
        let r = 1 + ((p as f64 - 1.0) * r_frac) as usize % (p as usize - 1);
        let blocks = BlockStructure::uniform(3).unwrap();
        let inst = WeightedMaxLinsatInstance::random(PrimeField::new(p).unwrap(), 2, blocks, r, seed).unwrap();
        let stats = inst.centered_stats();
        for i in 0..3 {
            for y in 0..p {
                let f = if inst.is_satisfied(i, y) { 1.0 } else { -1.0 };
                let rebuilt = stats.mean + stats.objective_scale() * stats.h(i, y);
                prop_assert!((f - rebuilt).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn krawtchouk_symmetry_and_reciprocity(m in 0usize..=24, k_frac in 0.0f64..=1.0, q_frac in 0.0f64..=1.0) {
        let k = (k_frac * m as f64) as usize;
        let q = (q_frac * m as f64) as usize;
        let sign = if k % 2 == 0 { BigInt::from(1) } else { BigInt::from(-1) };
        prop_assert_eq!(kraw(k, q, m).unwrap(), sign * kraw(k, m - q, m).unwrap());
        let c = |a: usize, b: usize| BigInt::from(common::binom(a, b));
        prop_assert_eq!(c(m, q) * kraw(k, q, m).unwrap(), c(m, k) * kraw(q, k, m).unwrap());
    }

    #[test]
    fn dense_and_power_iteration_agree(a in 2usize..=9, b in 1usize..=9, l in 1usize..=6, g in 0.2f64..4.0, kappa in -1.5f64..1.5) {
        let matrix = SpectralMatrix::for_blocks(&[a, b], &[1.0, g], l, kappa, CAP).unwrap();
        let dense = matrix.lambda_max_dense().value;
        let power = matrix.lambda_max_power(1e-13, 200_000).unwrap().value;
        prop_assert!((dense - power).abs() <= 1e-8 * dense.abs().max(1.0));
    }

    #[test]
    fn spectral_sandwich_and_monotonicity(a in 2usize..=12, b in 2usize..=12, l in 1usize..=8, g in 0.2f64..4.0, x in prop::collection::vec(0.1f64..3.0, 2)) {
        let weights = [1.0, g];
        let matrix = SpectralMatrix::for_blocks(&[a, b], &weights, l, 0.0, CAP).unwrap();
        let lambda = matrix.lambda_max().unwrap().value;
        let ansatz = product_ansatz_for(&[a, b], &weights, l, 0.0).unwrap();
        let rayleigh = matrix.rayleigh(&ansatz.tensor(matrix.index())).unwrap();
        prop_assert!(rayleigh <= lambda * (1.0 + 1e-12) + 1e-12);
        prop_assert!(lambda <= matrix.collatz_wielandt_bound(&x).unwrap() * (1.0 + 1e-12) + 1e-12);
        let smaller = SpectralMatrix::for_blocks(&[a, b], &weights, l - 1, 0.0, CAP).unwrap();
        prop_assert!(smaller.lambda_max().unwrap().value <= lambda * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn gamma_concave_nondecreasing(g in 0.1f64..10.0, theta in 0.1f64..0.9, kappa in -1.0f64..1.0) {
        let problem = GammaProblem::new(&[1.0, g], &[theta, 1.0 - theta], kappa).unwrap();
        let mus: Vec<f64> = (1..50).map(|k| k as f64 * 0.01).collect();
        let values: Vec<f64> = mus.iter().map(|&mu| problem.solve(mu).unwrap().value).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        for w in values.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-8);
        }
        for &mu in &mus {
            let s = problem.solve(mu).unwrap();
            prop_assert!(problem.spent(&s.alphas) <= mu + 1e-9);
            prop_assert!((problem.objective(&s.alphas) - s.value).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_blocks_swap_symmetric(g1 in 0.1f64..5.0, g2 in 0.1f64..5.0, mu in 0.01f64..0.49, kappa in -1.0f64..1.0) {
        let a = gamma_functional(&[g1, g2], &[0.5, 0.5], kappa, mu).unwrap().value;
        let b = gamma_functional(&[g2, g1], &[0.5, 0.5], kappa, mu).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn fourier_preserves_norm(p in prime(), n in 1usize..=4, seed in any::<u64>()) {
        let dim = (p as usize).pow(n as u32);
        let mut s = seed;
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                Complex64::new((s >> 40) as f64 / 1e7 - 0.8, (s >> 20 & 0xfffff) as f64 / 1e6 - 0.5)
            })
            .collect();
        let before: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let out = fourier_transform(p, n, &amps, false);
        let after: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1.0));
        let back = fourier_transform(p, n, &out, true);
        for (a, b) in amps.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        let state = StateVector::new(p, n, amps).unwrap().normalized().unwrap();
        prop_assert!((state.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn block_operator_is_tridiagonal(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let field = PrimeField::new(p).unwrap();
        let blocks = BlockStructure::contiguous(&[3, 3], vec![1.0, 1.5]).unwrap();
        let inst = WeightedMaxLinsatInstance::random(field, 6, blocks, 1, seed).unwrap();
        prop_assume!(inst.matrix().rank() == 6);
        let index = DegreeIndexSet::enumerate(&[3, 3], 4, CAP).unwrap();
        let states = basis_states(&inst, &index, CAP).unwrap();
        let kappa = inst.centered_stats().skew;
        for (k, j) in index.iter().enumerate() {
            if j.iter().sum::<usize>() >= 4 {
                continue;
            }
            for t in 0..2 {
                let acted = apply_block_operator(&inst, t, &states[k]);
                let (m, jt) = (3.0, j[t] as f64);
                let mut expected = states[k].amplitudes().iter().map(|a| a * (kappa * jt)).collect::<Vec<_>>();
                if j[t] > 0 {
                    let mut lower = j.to_vec();
                    lower[t] -= 1;
                    let c = (jt * (m - jt + 1.0)).sqrt();
                    for (e, a) in expected.iter_mut().zip(states[index.index_of(&lower).unwrap()].amplitudes()) {
                        *e += a * c;
                    }
                }
                if let Some(up) = index.raise(k, t) {
                    let c = ((jt + 1.0) * (m - jt)).sqrt();
                    for (e, a) in expected.iter_mut().zip(states[up].amplitudes()) {
                        *e += a * c;
                    }
                }
                for (a, b) in acted.amplitudes().iter().zip(&expected) {
                    prop_assert!((a - b).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn decoder_output_is_sound_and_profile_relabel_invariant(seed in any::<u64>()) {
        let field = PrimeField::new(2).unwrap();
        let blocks = BlockStructure::contiguous(&[4, 4], vec![1.0, 2.0]).unwrap();
        let inst = WeightedMaxLinsatInstance::random(field, 5, blocks, 1, seed).unwrap();
        let b = inst.matrix();
        // Unique decoding keeps the profile free of tie-breaking effects.
        prop_assume!(b.dual_min_distance(CAP).unwrap().map_or(true, |d| d >= 3));
        let decoder = BoundedDistanceDecoder::new(b, 1, CAP).unwrap();
        for idx in 0..(1u64 << 5) {
            let s = index_to_vector(idx, 2, 5);
            if let Ok(y) = decoder.decode(&s) {
                prop_assert_eq!(b.syndrome(&y).unwrap(), s);
            }
        }
        // Swapping two rows inside block 0 and relabelling the failure set
        // accordingly leaves the profile unchanged.
        let failures: HashSet<Vec<u32>> = [vec![0, 1, 0, 0, 0, 0, 0, 0], vec![0, 0, 0, 0, 0, 1, 0, 0]].into_iter().collect();
        let members = vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]];
        let annotated = FailureAnnotatedDecoder::new(decoder.clone(), failures.clone());
        let before = failure_profile(b, &annotated, &members, 2, CAP).unwrap();
        let order = [1usize, 0, 2, 3, 4, 5, 6, 7];
        let swapped = b.select_rows(&order);
        let relabel = |y: &Vec<u32>| order.iter().map(|&i| y[i]).collect::<Vec<u32>>();
        let swapped_decoder = FailureAnnotatedDecoder::new(
            BoundedDistanceDecoder::new(&swapped, 1, CAP).unwrap(),
            failures.iter().map(relabel).collect(),
        );
        let after = failure_profile(&swapped, &swapped_decoder, &members, 2, CAP).unwrap();
        prop_assert_eq!(before.gamma.len(), after.gamma.len());
        for (x, y) in before.gamma.iter().zip(&after.gamma) {
            prop_assert!((x - y).abs() < 1e-15);
        }
        prop_assert!((before.tilde_max - after.tilde_max).abs() < 1e-15);
    }

    #[test]
    fn prange_never_beats_brute_force(p in prop::sample::select(vec![2u32, 3, 5]), seed in any::<u64>()) {
        let blocks = BlockStructure::contiguous(&[3, 3], vec![1.0, 2.0]).unwrap();
        let inst = WeightedMaxLinsatInstance::random(PrimeField::new(p).unwrap(), 3, blocks, (p as usize).div_ceil(2).min(p as usize - 1), seed).unwrap();
        prop_assume!(inst.matrix().rank() == 3);
        let (_, best) = inst.brute_force_optimum(CAP).unwrap();
        let prange = weighted_prange(&inst, 20, seed).unwrap();
        prop_assert!(prange.best_value <= best + 1e-12);
    }

    #[test]
    fn dqi_ratio_nondecreasing(g in 0.1f64..10.0) {
        let mut last = 0.0;
        for k in 1..100 {
            let v = r_dqi(g, k as f64 * 0.01).unwrap();
            prop_assert!(v >= last - 1e-12);
            last = v;
        }
        let heavy = g.max(1.0);
        let mid = 0.5 + heavy / (2.0 * (1.0 + g));
        prop_assert!((r_prange(g, 0.5).unwrap() - mid).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_invariants(n in 2usize..=5, seed in any::<u64>(), degree in 1usize..=3) {
        let h = random_commuting_hamiltonian(n, &[2, n - 1], &[1.0, 0.75], false, seed).unwrap();
        let poly = common::random_polynomial(degree, seed);
        // Layer constancy: every y with the same block weights has the same r.
        let coeffs = ham_coefficients(&h, &poly, CAP).unwrap();
        let m = h.operator_count();
        for mask in 0u32..(1 << m) {
            let y: Vec<bool> = (0..m).map(|i| (mask >> i) & 1 == 1).collect();
            let j: Vec<usize> = h.members().iter().map(|ids| ids.iter().filter(|&&i| y[i]).count()).collect();
            if let Some(k) = coeffs.index.index_of(&j) {
                prop_assert_eq!(r_multinomial(&h, &poly, &y, CAP).unwrap(), coeffs.exact[k].clone());
            }
        }
        // Products within the commuting family do not depend on factor order.
        let ops: Vec<_> = h.operators().cloned().collect();
        let forward = ops.iter().skip(1).fold(ops[0].clone(), |acc, op| acc.mul(op).unwrap());
        let backward = ops.iter().rev().skip(1).fold(ops[m - 1].clone(), |acc, op| acc.mul(op).unwrap());
        prop_assert_eq!(forward, backward);
        // ρ_P is a unit-trace positive semidefinite matrix.
        let rho = dense_rho_p(&h, &poly, CAP).unwrap().rho;
        prop_assert!((rho.trace().re - 1.0).abs() <= 1e-10);
        let eig = hermitian_eigenvalues(rho);
        prop_assert!(eig[0] >= -1e-12);
    }
}
