//! Criterion benchmarks for `q4embed`; see `benches/`.
