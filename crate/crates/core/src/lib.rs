//! Exact arithmetic for classical and long-word Kloosterman sums.
//!
//! The crate is `no_std` (it only needs `alloc`) and purely computational:
//! every operation is a function of its arguments, values are immutable once
//! built, and nothing here touches the filesystem or spawns threads. The std
//! companion crate layers the CLI, the file formats, the result cache and
//! parallel fan-out on top of the sharding hooks exposed by [`coset`].
//!
//! Layout:
//!
//! * [`exactnum`]: rationals, phases, exact sums of roots of unity, small
//!   arithmetic functions.
//! * [`matrix`]: exact integer/rational square matrices and minors `M_{I,J}`
//!   (rows `I`, columns `J` selected, 1-based).
//! * [`weyl`]: permutations, reduced words, the signed long-word matrix and
//!   the rank-one embeddings.
//! * [`bruhat`]: corner minors, the explicit `u_L · w0 · t · u_R`
//!   factorization for ranks 4 and 5, characters, double-coset normal forms.
//! * [`coset`]: exhaustive enumeration of integral double cosets
//!   `U(Z) \ Ω_{w0}(c) / U(Z)` for any rank.
//! * [`classical`]: `S(m, n; c)` and the Weil bound.
//! * [`sl4`]: fine cells, the six-factor parametrization, the integrality
//!   congruences, oracle and closed-form fine sums, coarse sums, the bound.
//! * [`sl5`]: the ten-factor parametrization and a small-scale oracle.
//! * [`groups`]: `Sp(4)` and `SO(4)` predicates.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bruhat;
pub mod classical;
pub mod coset;
mod error;
pub mod exactnum;
pub mod groups;
pub mod matrix;
pub mod sl4;
pub mod sl5;
pub mod weyl;

pub use error::{Error, Result};
pub use exactnum::{Phase, PhaseSum, Rational};
pub use matrix::{IndexPair, IntMatrix, Matrix, RatMatrix};

/// Version tag stamped into cached results; bump when any evaluator changes.
pub const VERSION_TAG: &str = concat!("kloosterman-core/", env!("CARGO_PKG_VERSION"));
