//! Index theory for inclusions of finite-dimensional C*-algebras.
//!
//! Algebras are direct sums of full matrix algebras handled in block form.
//! The crate builds conditional expectations, quasi-bases and their indices,
//! the basic construction and its tower, and crossed products by finite
//! groups, and checks every identity numerically with explicit residuals.

pub mod algebra;
pub mod error;
pub mod group;
pub mod linalg;
pub mod quasi_basis;
pub mod standard;
pub mod tol;
pub mod tower;
pub mod traces;

pub use algebra::{
    Element, MultiMatrixAlgebra, StarHomomorphism, SubalgebraBasis, UnitalInclusion,
};
pub use error::{Error, Result};
pub use quasi_basis::{QuasiBasis, Side};
pub use tol::Tol;
pub use traces::{ConditionalExpectation, IndexValue, TraceState};
