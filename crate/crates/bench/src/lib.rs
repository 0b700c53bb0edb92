//! Criterion benchmarks for novelty-core; see `benches/`.
