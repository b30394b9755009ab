//! Signatures, terms, regions, finite algebras and the `(C, W)` checks.

mod ambient;
mod approx;
mod canonical;
mod finite;
pub mod io;
mod laws;
mod region;
mod signature;
mod term;

pub use ambient::{builtin_oracle, tolerance, AmbientOp, AmbientStructure, RecipShifted, Sin, Square, UnaryOracle};
pub use approx::{
    check_approximation, check_grid, check_homomorphism, check_restriction_monotone, ApproximationReport,
    GridResult, HomResult, HomViolation, MAX_REPORTED_VIOLATIONS,
};
pub use canonical::{canonical_approximation, grid_algebra, Grid, CANONICAL_CARRIER_LIMIT};
pub use finite::{
    table_from_fn, table_index, tuples, Closeness, ElemId, Embedding, FiniteAlgebra, OpTable, Rule,
    DENSE_TABLE_LIMIT,
};
pub use laws::{law_search, law_violated_at, Law, LawWitness, NegMap};
pub use region::{is_prime, padic_abs, AmbientKind, Entourage, Region, Span};
pub use signature::{Signature, Symbol, ADD, MUL};
pub use term::Term;
