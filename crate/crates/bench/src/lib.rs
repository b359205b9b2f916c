//! Benchmarks for the model crate. See `benches/models.rs`.
