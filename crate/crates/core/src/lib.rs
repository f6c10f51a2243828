//! Dimension theory of self-similar, self-affine and skew-product repellers,
//! computed through the thermodynamic formalism on subshifts of finite type.

// Negated comparisons are the NaN-rejecting form of every input check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod barnsley;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod symbolic;
pub mod points;
pub mod selfaffine;
pub mod selfsimilar;
pub mod thermo;

pub use error::{Error, Result};
