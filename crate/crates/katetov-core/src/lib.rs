//! Exact-arithmetic toolkit for the calculus of approximate isometries between
//! finite metric spaces, metric amalgamation, generic inductive chains over
//! categories of finitely generated structures, and the combinatorics of
//! diagonal embeddings between interval matrix algebras.
//!
//! Every quantity in this crate is an exact nonnegative rational (or the
//! distinguished value infinity); there is no floating point anywhere.
//! Inequalities such as Katětov bounds, strict domination, totality defects
//! and trace preservation are therefore decided exactly, not approximately.
//!
//! The crate is `no_std`-compatible (it requires `alloc`); the default `std`
//! feature is only forwarded to the numeric dependencies.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod apx;
pub mod category;
pub mod engine;
pub mod extq;
pub mod metric;
pub mod rat;
pub mod structures;
pub mod uhf;

pub use apx::ApproximateIsometry;
pub use extq::ExtQ;
pub use metric::{FiniteMetricSpace, PseudoMetricSpace};
pub use rat::Rat;
