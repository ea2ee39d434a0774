//! Criterion benchmarks for the spdc-core kernels; see `benches/kernels.rs`.
