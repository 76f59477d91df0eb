//! Criterion benchmarks for `quantizer-core` live in `benches/`.
