//! The finite algebra `A_PQ` of decimal floating-point numbers.

use std::sync::Arc;

use crate::algebra::{table_from_fn, AmbientKind, AmbientStructure, ElemId, FiniteAlgebra};
use crate::error::{Error, Result};

use super::decimal::{fp_add, fp_mul, DecimalFP, FPParams};

pub const APQ_CARRIER_LIMIT: u128 = 1_000_000;

pub fn build_apq(params: &FPParams) -> Result<FiniteAlgebra> {
    build_apq_with_limit(params, APQ_CARRIER_LIMIT)
}

/// Ids follow value order (see [`DecimalFP::id`]); tables above the dense
/// limit are evaluated on demand.
pub fn build_apq_with_limit(params: &FPParams, limit: u128) -> Result<FiniteAlgebra> {
    let size = params.carrier_size();
    if size > limit {
        return Err(Error::LimitExceeded { size, limit });
    }
    let n = size as usize;
    let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
    let table = |f: fn(&DecimalFP, &DecimalFP, &FPParams) -> DecimalFP| {
        let p = *params;
        table_from_fn(n, 2, move |a| {
            let x = DecimalFP::from_id(a[0] as u128, &p).expect("valid id");
            let y = DecimalFP::from_id(a[1] as u128, &p).expect("valid id");
            f(&x, &y, &p).id(&p) as ElemId
        })
    };
    let tables = vec![table(fp_add), table(fp_mul)];
    let values = (0..size)
        .map(|i| DecimalFP::from_id(i, params).map(|x| x.to_rational(params)))
        .collect::<Result<Vec<_>>>()?;
    FiniteAlgebra::new(format!("A_PQ(P={}, Q={})", params.p, params.q), amb, n, tables, values)
}
