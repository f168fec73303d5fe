//! Combinatorics of interval matrix algebras: supernatural numbers, cube
//! algebra descriptors with distinguished traces, diagonal embeddings with
//! exact pushforward densities, Hall matching of fine map tuples, the near
//! amalgamation construction, square-filling-curve reductions, and limit
//! criteria for chains.

pub mod hilbert;
pub mod limit;
pub mod matching;
pub mod morphism;
pub mod nap;
pub mod paffine;
pub mod sampling;
pub mod supernatural;

pub use hilbert::{hilbert_map, HilbertApproximant};
pub use limit::{
    check_uhf_limit, eps_schedule, identity_chain, subdivision_chain, FinenessSample, UhfChain,
    UhfLimitReport,
};
pub use matching::{hall_match, marriage_bound, neighbor_sets, union_measure};
pub use morphism::{
    aligned_distance, block_repeat, compose_diagonal, is_trace_preserving, normalize_trace,
    pushforward_density, subdivision_embedding, subdivision_maps, CubeAlgebra, DiagonalMorphism,
    PiecewiseConstantDensity, TraceTag, UhfError,
};
pub use nap::{nap_construct, NapOutcome};
pub use paffine::{integral, step_hat, AffinePiece, PaffineError, PiecewiseAffineMap};
pub use supernatural::{factorize, Exponent, SupernaturalError, SupernaturalNumber};
