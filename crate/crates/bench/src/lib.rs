//! Criterion benchmarks for subriemann-core; see `benches/`.
