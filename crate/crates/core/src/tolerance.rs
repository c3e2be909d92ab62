//! Numerical tolerances shared by the whole crate.
//!
//! Every quantity in the model is O(1), so absolute thresholds are used.

/// Amplitudes below this magnitude are dropped from sparse maps.
pub const PRUNE: f64 = 1e-15;

/// Identity checks on exact algebra (unitarity, normalization, invariance).
pub const CHECK: f64 = 1e-12;

/// Agreement between the fast path and the dense Fock-space oracle.
pub const ORACLE: f64 = 1e-9;
