//! Positive bounded formulas: syntax, transforms, finite evaluation, the
//! approximation sweep and closed-form oracles over `R`.

mod ast;
mod eval;
pub mod oracle;
mod parser;
pub mod random;
mod sweep;
mod transform;

pub use ast::{Atom, Binding, BoundTuple, Formula, Quantifier};
pub use eval::{eval_finite, eval_finite_with, EvalConfig, EvalOutcome, TraceStep};
pub use parser::{
    format_atom, format_formula, format_term, parse_formula, parse_formula_with, parse_region, parse_term, ParseError,
    ParseOptions,
};
pub use sweep::{beyond, parse_ladder, sweep, Builder, CellResult, SweepCell, SweepReport, Threshold, MAX_SWEEP_TUPLES};
pub use transform::{approximate, check_ll, check_regular, desugar_order, widen, OrderRelation};
