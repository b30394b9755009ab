//! Finite p-adic expansions and the approximations `K_n` and `H_{m,n}` of
//! `Z_p` and `p^{-m} Z_p`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    is_prime, table_from_fn, AmbientKind, AmbientStructure, ElemId, FiniteAlgebra,
};
use crate::error::{Error, Result};
use crate::scalar::pow_rat;

/// Largest carrier `p^{m+n}` the builders accept.
pub const PADIC_DESK_LIMIT: u128 = 100_000;

/// `Σ d_i p^{valuation + i}`: a finite p-adic expansion, little-endian.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicDigits {
    pub p: u64,
    pub valuation: i64,
    pub digits: Vec<u64>,
}

impl PadicDigits {
    /// Canonical form: no low zero digits, no high zero digits; zero has
    /// valuation 0 and no digits.
    pub fn new(p: u64, valuation: i64, digits: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(Error::invalid(format!("digit {d} out of range for p = {p}")));
        }
        let mut digits = digits;
        let mut valuation = valuation;
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        digits.drain(..lead);
        valuation += lead as i64;
        if digits.is_empty() {
            valuation = 0;
        }
        Ok(Self { p, valuation, digits })
    }

    pub fn zero(p: u64) -> Self {
        Self { p, valuation: 0, digits: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Expansion of a non-negative rational whose denominator is a power of
    /// `p`. Negative values have infinite expansions and are rejected.
    pub fn from_rational(x: &BigRational, p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if x.is_negative() {
            return Err(Error::invalid("negative rationals have no finite p-adic expansion"));
        }
        if x.is_zero() {
            return Ok(Self::zero(p));
        }
        let pb = BigInt::from(p);
        let mut den = x.denom().clone();
        let mut valuation = 0i64;
        while den > BigInt::one() {
            let (q, r) = den.div_rem(&pb);
            if !r.is_zero() {
                return Err(Error::invalid(format!("{x} is not a finite {p}-adic expansion")));
            }
            den = q;
            valuation -= 1;
        }
        let mut n = x.numer().clone();
        let mut digits = Vec::new();
        while !n.is_zero() {
            let (q, r) = n.div_rem(&pb);
            digits.push(r.to_u64().unwrap());
            n = q;
        }
        Self::new(p, valuation, digits)
    }

    pub fn to_rational(&self) -> BigRational {
        let mut n = BigInt::zero();
        for &d in self.digits.iter().rev() {
            n = n * self.p + d;
        }
        BigRational::from_integer(n) * pow_rat(self.p, self.valuation)
    }

    /// `|x|_p = p^{-valuation}`, and `0` for zero.
    pub fn norm(&self) -> BigRational {
        if self.is_zero() {
            BigRational::zero()
        } else {
            pow_rat(self.p, -self.valuation)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_prime(o)?;
        Self::from_rational(&(self.to_rational() + o.to_rational()), self.p)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_prime(o)?;
        Self::from_rational(&(self.to_rational() * o.to_rational()), self.p)
    }

    fn same_prime(&self, o: &Self) -> Result<()> {
        if self.p != o.p {
            return Err(Error::AmbientMismatch(format!("Q_{} vs Q_{}", self.p, o.p)));
        }
        Ok(())
    }
}

/// `p^{-valuation}` for nonzero values, `0` otherwise.
pub fn padic_norm(x: &PadicDigits) -> BigRational {
    x.norm()
}

impl fmt::Display for PadicDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ds: Vec<String> = self.digits.iter().map(u64::to_string).collect();
        write!(f, "{}^{} * ({})", self.p, self.valuation, ds.join(" "))
    }
}

impl FromStr for PadicDigits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("not a p-adic expansion: {s:?}"));
        let (head, tail) = s.split_once('*').ok_or_else(bad)?;
        let (p, v) = head.trim().split_once('^').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let v: i64 = v.trim().parse().map_err(|_| bad())?;
        let body = tail
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(bad)?;
        let digits = body
            .split_whitespace()
            .map(|d| d.parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let x = Self::new(p, v, digits)?;
        // only canonical text round-trips
        if x.to_string() != s.trim() {
            return Err(Error::Format(format!("non-canonical p-adic expansion: {s:?}")));
        }
        Ok(x)
    }
}

/// Parameters of `H_{m,n} ⊂ p^{-m} Z_p`; `m = 0` gives `K_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HmnParams {
    pub p: u64,
    pub m: u32,
    pub n: u32,
}

impl HmnParams {
    pub fn new(p: u64, m: u32, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if m > 0 && m >= n {
            return Err(Error::invalid(format!("H_{{m,n}} needs m < n, got m = {m}, n = {n}")));
        }
        let size = (p as u128).saturating_pow(m + n);
        if size > PADIC_DESK_LIMIT {
            return Err(Error::LimitExceeded { size, limit: PADIC_DESK_LIMIT });
        }
        Ok(Self { p, m, n })
    }

    /// `p^{m+n}`.
    pub fn size(&self) -> u64 {
        self.p.pow(self.m + self.n)
    }

    pub fn scale(&self) -> u64 {
        self.p.pow(self.m)
    }

    /// Carrier element `k` stands for `k / p^m`.
    pub fn value(&self, id: ElemId) -> BigRational {
        BigRational::new(BigInt::from(id), BigInt::from(self.scale()))
    }

    pub fn id_of(&self, x: &BigRational) -> Result<ElemId> {
        let k = x * BigRational::from_integer(BigInt::from(self.scale()));
        let id = if k.is_integer() { k.to_integer().to_u64() } else { None };
        match id {
            Some(k) if k < self.size() => Ok(k as ElemId),
            _ => Err(Error::invalid(format!("{x} is not an element of H_{{{},{}}}", self.m, self.n))),
        }
    }

    /// `α ⊕̂ β` on carrier ids: add in `K_{m+n}` after scaling by `p^m`.
    pub fn hat_add_ids(&self, a: ElemId, b: ElemId) -> ElemId {
        ((a as u64 + b as u64) % self.size()) as ElemId
    }

    /// `α ⊗̂ β` on carrier ids: digits `c_m .. c_{2m+n-1}` of
    /// `p^m α · p^m β`, shifted back.
    pub fn hat_mul_ids(&self, a: ElemId, b: ElemId) -> ElemId {
        (((a as u64 * b as u64) / self.scale()) % self.size()) as ElemId
    }
}

/// `α ⊕̂ β` on values of `H_{m,n}`.
pub fn hat_add(a: &BigRational, b: &BigRational, params: &HmnParams) -> Result<BigRational> {
    let (i, j) = (params.id_of(a)?, params.id_of(b)?);
    Ok(params.value(params.hat_add_ids(i, j)))
}

/// `α ⊗̂ β` on values of `H_{m,n}`.
pub fn hat_mul(a: &BigRational, b: &BigRational, params: &HmnParams) -> Result<BigRational> {
    let (i, j) = (params.id_of(a)?, params.id_of(b)?);
    Ok(params.value(params.hat_mul_ids(i, j)))
}

/// `αβ ∈ p^{-m} Z_p`, tested as: the digits `c_k`, `k < m`, of
/// `p^m α · p^m β` all vanish.
pub fn product_in_ball(a: ElemId, b: ElemId, params: &HmnParams) -> bool {
    (a as u64 * b as u64) % params.scale() == 0
}

/// `H_{m,n}` with `⊕̂`, `⊗̂` and its inclusion into `Q_p`.
pub fn build_hmn(params: &HmnParams) -> Result<FiniteAlgebra> {
    let params = *params;
    let size = params.size() as usize;
    let ambient = Arc::new(AmbientStructure::field(AmbientKind::Padic { p: params.p }));
    let add = table_from_fn(size, 2, move |a| params.hat_add_ids(a[0], a[1]));
    let mul = table_from_fn(size, 2, move |a| params.hat_mul_ids(a[0], a[1]));
    let values = (0..size as ElemId).map(|k| params.value(k)).collect();
    let label = if params.m == 0 {
        format!("K_{}(p={})", params.n, params.p)
    } else {
        format!("H_{{{},{}}}(p={})", params.m, params.n, params.p)
    };
    FiniteAlgebra::new(label, ambient, size, vec![add, mul], values)
}

/// `K_n = Z/p^n Z` included in `Z_p` as `{0, …, p^n − 1}`.
pub fn build_kn(p: u64, n: u32) -> Result<FiniteAlgebra> {
    build_hmn(&HmnParams::new(p, 0, n)?)
}
