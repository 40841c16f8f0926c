//! Criterion benchmarks for the controller hot path; see `benches/`.
