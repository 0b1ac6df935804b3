//! Benchmark fixtures for the scalab kernels live in `benches/`.
