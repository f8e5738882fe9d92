//! Exact computation with polyhedral Banach spaces and the extreme points
//! of their operator balls.
//!
//! Real spaces are handled with exact rational arithmetic throughout; the
//! complex `ℓ∞ⁿ → ℓ₁ⁿ` module is the one place that works in floating point.

pub mod arith;
pub mod complex;
pub mod error;
pub mod krein_milman;
pub mod lp;
pub mod operators;
pub mod polytope;

pub use arith::{kernel_basis, matrix_rank, rat_parse, solve_linear, QMatrix, QVector, Rational};
pub use error::{Error, Result};
pub use lp::{caratheodory_decompose, farkas_decide, lp_feasible, ConvexDecomposition, FarkasCertificate};
pub use polytope::{EpsDiametricPair, FAssociatedTuple, Face, PolyhedralSpace, SpaceFile};
pub use operators::{
    enumerate_extreme_contractions, enumerate_rank1_extremes, ExtremalityCertificate, Operator, OperatorFile,
    SpaceRef, DEFAULT_ENUMERATION_CAP,
};
pub use krein_milman::{
    build_companion_matrix, companion_hypothesis_holds, decompose_general, decompose_rank1, decompose_rank1_with,
    enumerate_companion_matrices, CompanionMatrix, Decomposition, DecompositionOutcome, FacetSelection,
    InfeasibilityReport, Rank1Options, Rank1Transcript, DEFAULT_COMPANION_CAP,
};
pub use complex::{
    decompose_c, is_extreme_contraction_c, is_norm_one_rank1, kappa_profile, split_once, u_basis_coords, CVector,
    ComplexLeaf, ComplexOpFile, ComplexRank1Op, KappaProfile,
};
