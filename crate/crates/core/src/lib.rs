//! Finite approximations of the topological fields `R` and `Q_p`.
//!
//! The crate builds finite algebras (decimal floating point, balanced
//! modular fixed point, `K_n`, `H_{m,n}`, uniform grids), decides exactly
//! whether they are `(C, W)`-approximations, searches them for failures of
//! algebraic laws, and evaluates positive bounded formulas over them.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod padic;
pub mod pbf;
pub mod probe;
pub mod real;
pub mod repro;
pub mod scalar;

pub use error::{Error, Result};
