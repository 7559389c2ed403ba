//! Criterion benchmarks for the library kernels live under `benches/`.
