//! Exact computations with Hecke pairs (G, H).
//!
//! A Hecke pair is a group `G` with a subgroup `H` such that every double
//! coset `HxH` splits into finitely many left cosets. This crate enumerates
//! those cosets by breadth-first search over generators of `H`, builds the
//! convolution *-algebra spanned by double-coset indicators with exact
//! rational coefficients, analyzes the fundamental projection `p = chi_H` in
//! the regular representation of finite pairs, and computes finite levels of
//! the totally disconnected completion that `G/H` generates.
//!
//! Everything is exact: group elements are stored in canonical form over
//! arbitrary-precision rationals, and all structure constants are rational.
//! Floating point appears only in the character evaluators of [`catalog`].

pub mod algebra;
pub mod catalog;
pub mod corner;
pub mod coset;
pub mod error;
pub mod group;
pub mod lattice;
pub mod levels;
pub mod matrix;
pub mod rat;

pub use algebra::{Basis, HeckeElement};
pub use coset::{CosetId, DoubleCoset, HeckePair};
pub use error::HeckeError;
pub use group::{Group, GroupElement, SubgroupDescriptor};

/// Exact scalar used for every coefficient and matrix entry in the crate.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer backing [`Rational`].
pub type Int = num_bigint::BigInt;
/// Floating complex scalar; used only for character evaluation.
pub type Complex = num_complex::Complex64;

/// Dense matrix over the exact scalar.
pub type QMatrix = matrix::Matrix<Rational>;
