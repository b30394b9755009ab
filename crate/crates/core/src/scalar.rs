//! Exact rationals and certified enclosures.
//!
//! Every ambient value the crate touches is a [`BigRational`]. Irrational
//! constants (cube roots, square roots, values of `sin`) are carried as an
//! [`ExactScalar`]: a rational center plus a rational radius that bounds the
//! distance to the real number being represented.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), e as usize)
}

/// `10^e` for any integer exponent.
pub fn pow10_rat(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(pow10(e as u32))
    } else {
        BigRational::new(BigInt::one(), pow10((-e) as u32))
    }
}

pub fn pow_rat(base: u64, e: i64) -> BigRational {
    let b = num_traits::pow(BigInt::from(base), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(b)
    } else {
        BigRational::new(BigInt::one(), b)
    }
}

/// The p-adic valuation of a nonzero rational; `None` for zero.
pub fn valuation(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut v = 0i64;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                return v;
            }
            n = q;
            v += 1;
        }
    };
    Some(count(x.numer().clone()) - count(x.denom().clone()))
}

/// Round to the nearest integer, breaking exact ties toward zero.
pub fn round_ties_to_zero(x: &BigRational) -> BigInt {
    let fl = x.floor();
    let frac = x - &fl;
    let half = rat(1, 2);
    let f = fl.to_integer();
    match frac.cmp(&half) {
        Ordering::Less => f,
        Ordering::Greater => f + 1,
        Ordering::Equal => {
            if x.is_negative() {
                f + 1
            } else {
                f
            }
        }
    }
}

/// Parse a rational from `n`, `n/d`, a decimal `-1.25`, or scientific `1e-3`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Format(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let mut v = BigRational::from_integer(n) * pow10_rat(exp - fp.len() as i64);
    if neg {
        v = -v;
    }
    Ok(v)
}

/// `n` for integers, `n/d` otherwise.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Always `num/den`; the algebra file format uses this form.
pub fn format_ratio(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Decimal rendering with `digits` fractional digits, truncated toward zero.
pub fn to_decimal_string(x: &BigRational, digits: u32) -> String {
    let scaled = (x * BigRational::from_integer(pow10(digits))).trunc().to_integer();
    let neg = scaled.sign() == Sign::Minus || (scaled.is_zero() && x.is_negative());
    let mag = scaled.abs().to_string();
    let d = digits as usize;
    let padded = if mag.len() <= d {
        format!("{}{}", "0".repeat(d + 1 - mag.len()), mag)
    } else {
        mag
    };
    let (ip, fp) = padded.split_at(padded.len() - d);
    let sign = if neg { "-" } else { "" };
    if d == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A rational center with a certified radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactScalar {
    value: BigRational,
    radius: BigRational,
}

impl ExactScalar {
    pub fn exact(value: BigRational) -> Self {
        Self { value, radius: BigRational::zero() }
    }

    /// # Panics
    /// If `radius` is negative.
    pub fn enclosure(center: BigRational, radius: BigRational) -> Self {
        assert!(!radius.is_negative(), "enclosure radius must be non-negative");
        Self { value: center, radius }
    }

    /// The enclosure `[lo, hi]`.
    pub fn from_bounds(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "enclosure bounds out of order");
        let two = int(2);
        let center = (&lo + &hi) / &two;
        let radius = (hi - lo) / two;
        Self { value: center, radius }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn radius(&self) -> &BigRational {
        &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn lower(&self) -> BigRational {
        &self.value - &self.radius
    }

    pub fn upper(&self) -> BigRational {
        &self.value + &self.radius
    }

    pub fn neg(&self) -> Self {
        Self { value: -&self.value, radius: self.radius.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { value: &self.value + &o.value, radius: &self.radius + &o.radius }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let r = self.value.abs() * &o.radius + o.value.abs() * &self.radius + &self.radius * &o.radius;
        Self { value: &self.value * &o.value, radius: r }
    }

    /// Upper bound on `|x|` over the enclosure.
    pub fn abs_upper(&self) -> BigRational {
        self.value.abs() + &self.radius
    }

    /// Decide the order against an exact rational, or report that the
    /// enclosure straddles it.
    pub fn cmp_rational(&self, r: &BigRational) -> Result<Ordering> {
        if self.is_exact() {
            return Ok(self.value.cmp(r));
        }
        if &self.upper() < r {
            Ok(Ordering::Less)
        } else if &self.lower() > r {
            Ok(Ordering::Greater)
        } else {
            Err(Error::Undecidable(format!(
                "enclosure {} ± {} straddles {}",
                format_rational(&self.value),
                format_rational(&self.radius),
                format_rational(r)
            )))
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", format_rational(&self.value))
        } else {
            write!(f, "{} ± {}", format_rational(&self.value), format_rational(&self.radius))
        }
    }
}

/// Largest `k ≥ 0` with `k^n ≤ x`, by bisection on integers.
pub fn integer_root_floor(x: &BigInt, n: u32) -> BigInt {
    assert!(n >= 1 && !x.is_negative());
    if x.is_zero() {
        return BigInt::zero();
    }
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one() << (x.bits() / n as u64 + 1);
    // invariant: lo^n <= x < hi^n
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        if num_traits::pow(mid.clone(), n as usize) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Enclosure of the real `n`-th root of a non-negative integer to `digits`
/// decimal places: `[k, k+1] / 10^digits`.
pub fn root_enclosure(x: u64, n: u32, digits: u32) -> ExactScalar {
    let scale = pow10(digits);
    let scaled = BigInt::from(x) * num_traits::pow(scale.clone(), n as usize);
    let k = integer_root_floor(&scaled, n);
    if num_traits::pow(k.clone(), n as usize) == scaled {
        return ExactScalar::exact(BigRational::new(k, scale));
    }
    let lo = BigRational::new(k.clone(), scale.clone());
    let hi = BigRational::new(k + 1, scale);
    ExactScalar::from_bounds(lo, hi)
}

/// Enclosure of `sqrt(x)` for rational `x ≥ 0` with radius at most `tol`,
/// by bisection on rationals.
pub fn sqrt_enclosure(x: &BigRational, tol: &BigRational) -> ExactScalar {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    assert!(tol.is_positive());
    if x.is_zero() {
        return ExactScalar::exact(BigRational::zero());
    }
    let mut lo = BigRational::zero();
    let mut hi = if x > &BigRational::one() { x.clone() } else { BigRational::one() };
    let two = int(2);
    let width = tol * &two;
    while &hi - &lo > width {
        let mid = (&lo + &hi) / &two;
        match (&mid * &mid).cmp(x) {
            Ordering::Equal => return ExactScalar::exact(mid),
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
        }
    }
    ExactScalar::from_bounds(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-1/3").unwrap(), rat(-1, 3));
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-2.25").unwrap(), rat(-9, 4));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&int(8), 2), Some(3));
        assert_eq!(valuation(&rat(1, 3), 3), Some(-1));
        assert_eq!(valuation(&rat(5, 12), 2), Some(-2));
        assert_eq!(valuation(&int(0), 2), None);
    }

    #[test]
    fn ties_go_toward_zero() {
        assert_eq!(round_ties_to_zero(&rat(5, 2)), BigInt::from(2));
        assert_eq!(round_ties_to_zero(&rat(-5, 2)), BigInt::from(-2));
        assert_eq!(round_ties_to_zero(&rat(7, 4)), BigInt::from(2));
        assert_eq!(round_ties_to_zero(&rat(-7, 4)), BigInt::from(-2));
        assert_eq!(round_ties_to_zero(&rat(-1, 4)), BigInt::from(0));
    }

    #[test]
    fn cube_root_of_two() {
        let e = root_enclosure(2, 3, 12);
        // 1.259921049894...
        assert!(e.lower() > rat(1_259_921_049_894, 1_000_000_000_000) - rat(1, 1_000_000_000_000));
        assert!(e.upper() < rat(1_259_921_049_896, 1_000_000_000_000));
        let lo3 = e.lower() * e.lower() * e.lower();
        let hi3 = e.upper() * e.upper() * e.upper();
        assert!(lo3 <= int(2) && hi3 >= int(2));
        assert_eq!(root_enclosure(8, 3, 5), ExactScalar::exact(int(2)));
    }

    #[test]
    fn sqrt_bisection_brackets() {
        let tol = rat(1, 1_000_000);
        let e = sqrt_enclosure(&rat(127, 20), &tol);
        assert!(e.radius() <= &tol);
        assert!(e.lower() * e.lower() <= rat(127, 20));
        assert!(e.upper() * e.upper() >= rat(127, 20));
    }

    #[test]
    fn enclosure_comparison() {
        let e = ExactScalar::enclosure(int(1), rat(1, 10));
        assert_eq!(e.cmp_rational(&int(2)).unwrap(), Ordering::Less);
        assert_eq!(e.cmp_rational(&int(0)).unwrap(), Ordering::Greater);
        assert!(matches!(e.cmp_rational(&int(1)), Err(Error::Undecidable(_))));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal_string(&rat(-1, 3), 4), "-0.3333");
        assert_eq!(to_decimal_string(&rat(3, 2), 2), "1.50");
        assert_eq!(to_decimal_string(&int(7), 0), "7");
    }
}
