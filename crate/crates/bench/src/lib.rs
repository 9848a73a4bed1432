//! Criterion benchmarks for the closed forms, the Monte Carlo estimator and
//! the quadrature oracle. Run with `cargo bench -p shapelik-bench`.
