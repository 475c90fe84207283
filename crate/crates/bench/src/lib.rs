//! Benchmarks for the hot kernels: the coefficient right-hand side, matrix
//! assembly, the spectrum transform and one grid-solver step; see `benches/`.
