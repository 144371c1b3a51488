//! Criterion benchmarks for `crnorm-core`; see `benches/series.rs`.
