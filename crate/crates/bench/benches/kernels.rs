use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multidqi::asymptotics::gamma_functional;
use multidqi::decoding::{bm_decode, ReedSolomonParams};
use multidqi::simulator::dqi_state_direct;
use multidqi::spectral::SpectralMatrix;
use multidqi::{BlockStructure, PrimeField, WeightedMaxLinsatInstance};

const CAP: u64 = 1 << 24;

fn lambda_max(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_max");
    for (sizes, budget) in [(vec![40, 40], 10), (vec![20, 20, 20], 8), (vec![100, 100], 25)] {
        let matrix = SpectralMatrix::for_blocks(&sizes, &vec![1.0; sizes.len()], budget, 0.3, CAP).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{sizes:?}/l={budget}")), &matrix, |b, m| {
            b.iter(|| m.lambda_max().unwrap().value)
        });
    }
    group.finish();
}

fn gamma(c: &mut Criterion) {
    let weights: Vec<f64> = (1..=8).map(|k| k as f64 * 0.5).collect();
    let densities = vec![0.125; 8];
    c.bench_function("gamma_functional/N=8", |b| {
        b.iter(|| gamma_functional(black_box(&weights), &densities, 0.2, black_box(0.3)).unwrap().value)
    });
}

fn direct_state(c: &mut Criterion) {
    let blocks = BlockStructure::contiguous(&[7, 7], vec![1.0, 2.0]).unwrap();
    let inst = WeightedMaxLinsatInstance::random(PrimeField::new(2).unwrap(), 12, blocks, 1, 3).unwrap();
    let matrix = SpectralMatrix::for_blocks(&[7, 7], &[1.0, 2.0], 2, 0.0, CAP).unwrap();
    let w = matrix.lambda_max().unwrap().vector;
    c.bench_function("dqi_state_direct/F2 n=12 m=14 l=2", |b| {
        b.iter(|| dqi_state_direct(&inst, matrix.index(), black_box(&w), CAP).unwrap())
    });
}

fn berlekamp_massey(c: &mut Criterion) {
    let field = PrimeField::new(211).unwrap();
    let gamma = field.primitive_element();
    let locators: Vec<u32> = (0..210).map(|i| field.pow(gamma, i)).collect();
    let n = 41;
    let params = ReedSolomonParams::new(field, locators.clone(), n).unwrap();
    // Weight-20 error at spread-out positions.
    let error: Vec<(usize, u32)> = (0..20).map(|k| (k * 10 + 3, (k as u32 * 7) % 210 + 1)).collect();
    let syndrome: Vec<u32> = (0..n as u64)
        .map(|k| {
            error
                .iter()
                .fold(0, |acc, &(i, v)| field.add(acc, field.mul(v, field.pow(locators[i], k))))
        })
        .collect();
    c.bench_function("bm_decode/p=211 n=41 t=20", |b| {
        b.iter(|| bm_decode(&params, black_box(&syndrome), 20).unwrap())
    });
}

criterion_group!(kernels, lambda_max, gamma, direct_state, berlekamp_massey);
criterion_main!(kernels);
