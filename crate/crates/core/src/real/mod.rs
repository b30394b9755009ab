//! Finite approximations of `R`: decimal floating point and balanced
//! modular fixed point.

mod apq;
mod decimal;
mod modular;
mod params;

pub use apq::{build_apq, build_apq_with_limit, APQ_CARRIER_LIMIT};
pub use decimal::{fp_add, fp_div, fp_mul, fp_round, DecimalFP, FPParams, MAX_DIGITS};
pub use modular::{build_modular, mod_add, mod_mul, ModularParams, MODULAR_CARRIER_LIMIT};
pub use params::{
    apq_params_for_cell, modular_params_for_cell, sufficient_params_inverse, sufficient_params_order,
    SufficientParams,
};
