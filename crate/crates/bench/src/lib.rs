//! Benchmarks for kflow live under `benches/`.
