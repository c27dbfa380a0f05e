//! Exact arithmetic for the Zorn vector-matrix algebra over `Z` and `Z/mZ`.
//!
//! The invertible elements form the Moufang loop `GLL(2, R)`; the
//! determinant-one elements form `SLL(2, R)`. On top of the algebra this
//! crate provides constructive factorizations of congruence subloops of
//! `SLL(2, Z)` into parenthesized products of elementary matrices, the
//! splitting `Gamma(n1) ⊆ Delta(n1) Gamma(n2)`, enumeration of the finite
//! quotients `SLL(2, Z/mZ)` and subloop analysis inside them.

pub mod acceptance;
pub mod error;
pub mod expr;
pub mod factor;
pub mod floop;
pub mod quotient;
pub mod ring;
pub mod sample;
pub mod wohl;
pub mod zorn;

pub use error::{Error, Result};
pub use expr::ExprTree;
pub use floop::{ClosureStatus, SubloopSet};
pub use quotient::FiniteLoop;
pub use ring::{Modulus, PrimePowerList};
pub use wohl::WohlfahrtSplit;
pub use zorn::{GeneratorTag, Vec3, ZornMatrix};

pub use num_bigint::BigInt;
