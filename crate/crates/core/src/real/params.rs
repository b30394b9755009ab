//! Sufficient `(a, ε)` parameters from the worked examples, and the
//! smallest members of each real family that are `(a, ε)`-approximations.

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{int, pow10_rat, sqrt_enclosure, ExactScalar};

use super::decimal::FPParams;
use super::modular::ModularParams;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientParams {
    pub a0: ExactScalar,
    pub eps0: ExactScalar,
}

#[derive(Serialize)]
struct Shown {
    a0: String,
    eps0: String,
}

impl SufficientParams {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(Shown { a0: self.a0.to_string(), eps0: self.eps0.to_string() }).unwrap()
    }
}

fn enclosure_tol() -> BigRational {
    pow10_rat(-40)
}

fn max_enclosure(x: &ExactScalar, y: &ExactScalar) -> ExactScalar {
    ExactScalar::from_bounds(x.lower().max(y.lower()), x.upper().max(y.upper()))
}

/// `ε0 = √(((2b+1)/2)² + δ) − (2b+1)/2` and
/// `a0 = max{b + ε0, (2b + ε0)ε0 + 1}` for `∀_C x ∃_B y (|xy − 1| < δ)`,
/// as certified enclosures.
pub fn sufficient_params_inverse(b: &BigRational, delta: &BigRational) -> Result<SufficientParams> {
    if b <= &BigRational::one() {
        return Err(Error::invalid("b must exceed 1"));
    }
    if !delta.is_positive() {
        return Err(Error::invalid("delta must be positive"));
    }
    let h = (int(2) * b + int(1)) / int(2);
    let root = sqrt_enclosure(&(&h * &h + delta), &enclosure_tol());
    let eps0 = root.sub(&ExactScalar::exact(h));
    let b = ExactScalar::exact(b.clone());
    let first = b.add(&eps0);
    let second = b.add(&b).add(&eps0).mul(&eps0).add(&ExactScalar::exact(int(1)));
    Ok(SufficientParams { a0: max_enclosure(&first, &second), eps0 })
}

/// `a0 = (c + α)² + d + α + 1` and `ε0 = min{c − b, α/(5 + 2a0)}` for
/// `∃_{|z|≤c} (|x + z² − y| < α)` at points of `[−d, d]`.
pub fn sufficient_params_order(
    b: &BigRational,
    c: &BigRational,
    alpha: &BigRational,
    d: &BigRational,
) -> Result<(BigRational, BigRational)> {
    if !(b.is_positive() && b < c) {
        return Err(Error::invalid("need 0 < b < c"));
    }
    if !alpha.is_positive() || !d.is_positive() {
        return Err(Error::invalid("alpha and d must be positive"));
    }
    let s = c + alpha;
    let a0 = &s * &s + d + alpha + int(1);
    let eps0 = (c - b).min(alpha / (int(5) + int(2) * &a0));
    Ok((a0, eps0))
}

/// The least `r` with `x < 10^r`, for `x > 0`.
fn decimal_exponent(x: &BigRational) -> i64 {
    let mut r = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    while x >= &pow10_rat(r) {
        r += 1;
    }
    while x < &pow10_rat(r - 1) {
        r -= 1;
    }
    r
}

/// The smallest `(P, Q)` for which `A_PQ` is an `(a, ε)`-approximation:
/// the spacing `10^{r−Q}` near `a` and the underflow gap `10^{−P−1}` both
/// stay below `ε`.
pub fn apq_params_for_cell(a: &BigRational, eps: &BigRational) -> Result<FPParams> {
    if !a.is_positive() || !eps.is_positive() {
        return Err(Error::invalid("a and epsilon must be positive"));
    }
    let r = decimal_exponent(a);
    let mut p = r.max(1);
    while pow10_rat(-p - 1) >= *eps {
        p += 1;
    }
    let mut q = 1;
    while pow10_rat(r - q) >= *eps {
        q += 1;
    }
    FPParams::new(p as u32, q as u32)
}

/// `A'_{M, ε/2}` with `M = ⌈2a/ε⌉`: spacing `ε/2` keeps floor errors
/// under `ε` and the carrier covers `[−a, a]`.
pub fn modular_params_for_cell(a: &BigRational, eps: &BigRational) -> Result<ModularParams> {
    if !a.is_positive() || !eps.is_positive() {
        return Err(Error::invalid("a and epsilon must be positive"));
    }
    let step = eps / int(2);
    let m = (a / &step).ceil().to_integer();
    let m: u64 = m.try_into().map_err(|_| Error::invalid("M too large"))?;
    ModularParams::new(m, step)
}
