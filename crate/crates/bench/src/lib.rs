//! Criterion benches for decomp-forge live in `benches/`.
