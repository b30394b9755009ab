//! Decimal floating point `±10^p × 0.a_1…a_Q` with `|p| ≤ P`, truncating
//! mantissas and saturating on overflow.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{pow10_rat, ExactScalar};

/// Mantissas are stored in a `u128`.
pub const MAX_DIGITS: u32 = 38;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FPParams {
    /// Exponent bound `P`.
    pub p: u32,
    /// Mantissa digits `Q`.
    pub q: u32,
}

impl FPParams {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid("P and Q must be at least 1"));
        }
        if q > MAX_DIGITS {
            return Err(Error::invalid(format!("Q ≤ {MAX_DIGITS} is supported")));
        }
        if p > 10_000 {
            return Err(Error::invalid("P ≤ 10000 is supported"));
        }
        Ok(Self { p, q })
    }

    /// `2·(2P+1)·9·10^{Q−1} + 1`.
    pub fn carrier_size(&self) -> u128 {
        2 * self.per_sign() + 1
    }

    /// Nonzero values of one sign.
    pub fn per_sign(&self) -> u128 {
        (2 * self.p as u128 + 1) * 9 * 10u128.pow(self.q - 1)
    }

    fn mant_lo(&self) -> u128 {
        10u128.pow(self.q - 1)
    }

    fn mant_hi(&self) -> u128 {
        10u128.pow(self.q)
    }
}

/// `sign × 10^exponent × 0.mantissa`, with exactly `Q` mantissa digits
/// (`10^{Q−1} ≤ mantissa < 10^Q`); zero has sign 0 and mantissa 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecimalFP {
    pub sign: i8,
    pub exponent: i32,
    pub mantissa: u128,
}

impl DecimalFP {
    pub const ZERO: DecimalFP = DecimalFP { sign: 0, exponent: 0, mantissa: 0 };

    pub fn new(sign: i8, exponent: i32, mantissa: u128, params: &FPParams) -> Result<Self> {
        if sign == 0 || mantissa == 0 {
            if sign == 0 && mantissa == 0 {
                return Ok(Self::ZERO);
            }
            return Err(Error::invalid("zero needs sign 0 and mantissa 0"));
        }
        if !(sign == 1 || sign == -1) {
            return Err(Error::invalid("sign must be -1, 0 or 1"));
        }
        if exponent.unsigned_abs() > params.p {
            return Err(Error::invalid(format!("exponent {exponent} outside ±{}", params.p)));
        }
        if mantissa < params.mant_lo() || mantissa >= params.mant_hi() {
            return Err(Error::invalid(format!("mantissa {mantissa} does not have {} digits", params.q)));
        }
        Ok(Self { sign, exponent, mantissa })
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn neg(&self) -> Self {
        Self { sign: -self.sign, ..*self }
    }

    /// `±10^P × 0.99…9`.
    pub fn max_value(sign: i8, params: &FPParams) -> Self {
        Self { sign, exponent: params.p as i32, mantissa: params.mant_hi() - 1 }
    }

    pub fn to_rational(&self, params: &FPParams) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let m = BigRational::from_integer(BigInt::from(self.mantissa));
        let v = m * pow10_rat(self.exponent as i64 - params.q as i64);
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    /// Position in the value-ordered carrier: negatives, zero, positives.
    pub fn id(&self, params: &FPParams) -> u128 {
        let k = params.per_sign();
        if self.is_zero() {
            return k;
        }
        let idx = (self.exponent + params.p as i32) as u128 * 9 * params.mant_lo() + (self.mantissa - params.mant_lo());
        if self.sign > 0 {
            k + 1 + idx
        } else {
            k - 1 - idx
        }
    }

    pub fn from_id(id: u128, params: &FPParams) -> Result<Self> {
        let k = params.per_sign();
        if id >= params.carrier_size() {
            return Err(Error::invalid(format!("id {id} outside the carrier")));
        }
        let (sign, idx) = match id.cmp(&k) {
            Ordering::Equal => return Ok(Self::ZERO),
            Ordering::Greater => (1, id - k - 1),
            Ordering::Less => (-1, k - 1 - id),
        };
        let block = 9 * params.mant_lo();
        Ok(Self {
            sign,
            exponent: (idx / block) as i32 - params.p as i32,
            mantissa: idx % block + params.mant_lo(),
        })
    }

    /// `[-]0.DDD…e[±]E` with exactly `Q` digits.
    pub fn to_text(&self, params: &FPParams) -> String {
        let sign = if self.sign < 0 { "-" } else { "" };
        let digits = format!("{:0width$}", self.mantissa, width = params.q as usize);
        let es = if self.exponent < 0 { '-' } else { '+' };
        format!("{sign}0.{digits}e{es}{}", self.exponent.unsigned_abs())
    }

    pub fn parse(text: &str, params: &FPParams) -> Result<Self> {
        let bad = || Error::Format(format!("not a decimal floating-point literal: {text:?}"));
        let (neg, body) = match text.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, text),
        };
        let rest = body.strip_prefix("0.").ok_or_else(bad)?;
        let (digits, exp) = rest.split_once('e').ok_or_else(bad)?;
        if digits.len() != params.q as usize || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if !(exp.starts_with('+') || exp.starts_with('-')) || exp.len() < 2 {
            return Err(bad());
        }
        let e: i32 = exp.parse().map_err(|_| bad())?;
        let m: u128 = digits.parse().map_err(|_| bad())?;
        let sign = if m == 0 { 0 } else if neg { -1 } else { 1 };
        if m == 0 && (neg || e != 0) {
            return Err(bad());
        }
        let x = Self::new(sign, e, m, params)?;
        if x.to_text(params) != text {
            return Err(bad());
        }
        Ok(x)
    }
}

impl fmt::Display for DecimalFP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign < 0 { "-" } else { "" };
        write!(f, "{sign}0.{}e{}", self.mantissa, self.exponent)
    }
}

impl FromStr for FPParams {
    type Err = Error;

    /// `P,Q`.
    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s.split_once(',').ok_or_else(|| Error::Format(format!("expected P,Q, got {s:?}")))?;
        let p = p.trim().parse().map_err(|_| Error::Format(format!("bad P in {s:?}")))?;
        let q = q.trim().parse().map_err(|_| Error::Format(format!("bad Q in {s:?}")))?;
        Self::new(p, q)
    }
}

/// Normalize `sign · n · 10^scale` (`n > 0`): the exponent `r` with
/// `10^{r−1} ≤ value < 10^r`, then the first `Q` digits, truncated.
fn normalize_u128(sign: i8, n: u128, scale: i64, params: &FPParams) -> DecimalFP {
    let d = n.ilog10() as i64 + 1;
    let r = d + scale;
    finish(sign, r, params, || {
        let q = params.q as i64;
        if d > q {
            n / 10u128.pow((d - q) as u32)
        } else {
            n * 10u128.pow((q - d) as u32)
        }
    })
}

fn finish(sign: i8, r: i64, params: &FPParams, mantissa: impl FnOnce() -> u128) -> DecimalFP {
    if r > params.p as i64 {
        DecimalFP::max_value(sign, params)
    } else if r < -(params.p as i64) {
        DecimalFP::ZERO
    } else {
        DecimalFP { sign, exponent: r as i32, mantissa: mantissa() }
    }
}

fn round_rational(x: &BigRational, params: &FPParams) -> DecimalFP {
    if x.is_zero() {
        return DecimalFP::ZERO;
    }
    let sign = if x.is_negative() { -1 } else { 1 };
    let a = x.abs();
    // estimate r from digit counts, then correct
    let digits = |b: &BigInt| b.to_string().len() as i64;
    let mut r = digits(a.numer()) - digits(a.denom()) + 1;
    while a >= pow10_rat(r) {
        r += 1;
    }
    while a < pow10_rat(r - 1) {
        r -= 1;
    }
    finish(sign, r, params, || {
        let scaled = (&a * pow10_rat(params.q as i64 - r)).floor().to_integer();
        scaled.to_u128().expect("mantissa fits")
    })
}

/// Truncate an exact value, or an enclosure narrow enough that both ends
/// truncate alike.
pub fn fp_round(x: &ExactScalar, params: &FPParams) -> Result<DecimalFP> {
    if x.is_exact() {
        return Ok(round_rational(x.value(), params));
    }
    let lo = round_rational(&x.lower(), params);
    let hi = round_rational(&x.upper(), params);
    if lo == hi {
        Ok(lo)
    } else {
        Err(Error::Undecidable(format!(
            "enclosure {x} truncates to both {} and {}",
            lo.to_text(params),
            hi.to_text(params)
        )))
    }
}

/// `(sign, n, scale)` with value `sign · n · 10^scale`.
fn parts(x: &DecimalFP, params: &FPParams) -> (i8, u128, i64) {
    (x.sign, x.mantissa, x.exponent as i64 - params.q as i64)
}

/// `α ⊕ β`: the exact sum, truncated.
pub fn fp_add(x: &DecimalFP, y: &DecimalFP, params: &FPParams) -> DecimalFP {
    if x.is_zero() {
        return *y;
    }
    if y.is_zero() {
        return *x;
    }
    let (mut a, mut b) = (parts(x, params), parts(y, params));
    // a carries the larger scale
    if a.2 < b.2 {
        std::mem::swap(&mut a, &mut b);
    }
    // b's value is below 10^{b.2 + Q}; once that is under a tenth of a's
    // last-digit weight 10^{a.2}, only its sign matters to the truncation
    let gap = a.2 - b.2;
    let limit = params.q as i64 + 2;
    if gap > limit {
        b = (b.0, 1, a.2 - limit);
    }
    let shift = (a.2 - b.2) as u32;
    let fast = 10u128
        .checked_pow(shift)
        .and_then(|f| a.1.checked_mul(f))
        .filter(|&v| v < u128::MAX / 4);
    match fast {
        Some(an) => {
            let (bn, scale) = (b.1, b.2);
            let (sign, n) = if a.0 == b.0 {
                (a.0, an + bn)
            } else if an >= bn {
                (a.0, an - bn)
            } else {
                (b.0, bn - an)
            };
            if n == 0 {
                DecimalFP::ZERO
            } else {
                normalize_u128(sign, n, scale, params)
            }
        }
        None => round_rational(&(x.to_rational(params) + y.to_rational(params)), params),
    }
}

/// `α ⊗ β`: the exact product, truncated.
pub fn fp_mul(x: &DecimalFP, y: &DecimalFP, params: &FPParams) -> DecimalFP {
    if x.is_zero() || y.is_zero() {
        return DecimalFP::ZERO;
    }
    let (a, b) = (parts(x, params), parts(y, params));
    match a.1.checked_mul(b.1) {
        Some(n) => normalize_u128(a.0 * b.0, n, a.2 + b.2, params),
        None => round_rational(&(x.to_rational(params) * y.to_rational(params)), params),
    }
}

/// The exact quotient, truncated.
pub fn fp_div(x: &DecimalFP, y: &DecimalFP, params: &FPParams) -> Result<DecimalFP> {
    if y.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(round_rational(&(x.to_rational(params) / y.to_rational(params)), params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, parse_rational, rat};

    fn pq(p: u32, q: u32) -> FPParams {
        FPParams::new(p, q).unwrap()
    }

    fn lit(s: &str, params: &FPParams) -> DecimalFP {
        fp_round(&ExactScalar::exact(parse_rational(s).unwrap()), params).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let p = pq(2, 4);
        let x = lit("1.2012", &p);
        assert_eq!((x.sign, x.exponent, x.mantissa), (1, 1, 1201));
        assert_eq!(lit("0", &p), DecimalFP::ZERO);
        let big = lit("1000", &p);
        assert_eq!(big, DecimalFP::max_value(1, &p));
        assert_eq!(lit("-1000", &p), DecimalFP::max_value(-1, &p));
        assert_eq!(lit("0.0001", &p), DecimalFP::ZERO);
        assert_eq!(lit("0.001", &p).to_text(&p), "0.1000e-2");
    }

    #[test]
    fn cancellation_pair() {
        let p = pq(1, 4);
        let a = lit("0.6006", &p);
        let g = lit("0.6005", &p);
        let s1 = fp_add(&a, &a, &p);
        let s2 = fp_add(&a, &g, &p);
        assert_eq!(s1, s2);
        assert_eq!(s1.to_rational(&p), rat(1201, 1000));
    }

    #[test]
    fn division() {
        let p = pq(2, 4);
        assert_eq!(fp_div(&lit("1", &p), &lit("3", &p), &p).unwrap().to_text(&p), "0.3333e+0");
        let x = lit("12.34", &p);
        assert_eq!(fp_div(&x, &lit("1", &p), &p).unwrap(), x);
        assert_eq!(fp_div(&lit("1", &p), &lit("0.001", &p), &p).unwrap(), DecimalFP::max_value(1, &p));
        assert!(matches!(fp_div(&x, &DecimalFP::ZERO, &p), Err(Error::DivisionByZero)));
    }

    #[test]
    fn ids_are_value_ordered_and_invertible() {
        let p = pq(1, 2);
        let n = p.carrier_size();
        assert_eq!(n, 2 * 3 * 90 + 1);
        let mut prev: Option<BigRational> = None;
        for id in 0..n {
            let x = DecimalFP::from_id(id, &p).unwrap();
            assert_eq!(x.id(&p), id);
            let v = x.to_rational(&p);
            if let Some(pv) = prev {
                assert!(pv < v);
            }
            prev = Some(v);
        }
        assert_eq!(pq(1, 1).carrier_size(), 55);
    }

    #[test]
    fn text_round_trip() {
        let p = pq(3, 5);
        for s in ["0.12345e+2", "-0.99999e-3", "0.00000e+0", "0.10000e+0"] {
            assert_eq!(DecimalFP::parse(s, &p).unwrap().to_text(&p), s);
        }
        for s in ["0.1234e+2", "0.01234e+2", "-0.00000e+0", "0.12345e2", "0.12345e+4"] {
            assert!(DecimalFP::parse(s, &p).is_err(), "{s}");
        }
    }

    #[test]
    fn fast_paths_match_exact_rounding() {
        let p = pq(2, 2);
        let n = p.carrier_size();
        for i in (0..n).step_by(7) {
            for j in (0..n).step_by(5) {
                let x = DecimalFP::from_id(i, &p).unwrap();
                let y = DecimalFP::from_id(j, &p).unwrap();
                let (vx, vy) = (x.to_rational(&p), y.to_rational(&p));
                assert_eq!(fp_add(&x, &y, &p), round_rational(&(&vx + &vy), &p), "{x} + {y}");
                assert_eq!(fp_mul(&x, &y, &p), round_rational(&(&vx * &vy), &p), "{x} * {y}");
            }
        }
    }

    #[test]
    fn large_exponent_gap_keeps_the_sign_effect() {
        let p = pq(30, 3);
        let big = lit("1", &p);
        let tiny = lit("1e-25", &p);
        assert_eq!(fp_add(&big, &tiny, &p), big);
        assert_eq!(fp_add(&big, &tiny.neg(), &p).to_text(&p), "0.999e+0");
        assert_eq!(fp_add(&big, &tiny.neg(), &p), round_rational(&(int(1) - rat(1, 10).pow(25)), &p));
    }

    #[test]
    fn enclosures_must_fix_the_digits() {
        let p = pq(2, 4);
        let e = ExactScalar::enclosure(rat(12345, 10000), rat(1, 1_000_000));
        assert_eq!(fp_round(&e, &p).unwrap().mantissa, 1234);
        let straddle = ExactScalar::enclosure(rat(1235, 1000), rat(1, 1_000_000));
        assert!(matches!(fp_round(&straddle, &p), Err(Error::Undecidable(_))));
    }
}
