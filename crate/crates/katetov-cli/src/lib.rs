//! Batch companion to the exact-arithmetic core: JSON document formats with
//! string-encoded rationals, the floating-point verification of the
//! almost-commuting partial-trace bound, and the command implementations
//! behind the `katetov` binary.

pub mod json;
pub mod matrix;
pub mod run;
