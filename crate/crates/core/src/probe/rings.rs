//! Small finite rings, built as explicit tables and checked exhaustively.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;

use crate::algebra::{AmbientKind, AmbientStructure, ElemId, FiniteAlgebra, OpTable};
use crate::error::{Error, Result};

/// Largest ring order the probe will build.
pub const MAX_RING_ORDER: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingSpec {
    Zn(u64),
    /// `Z/n1 × Z/n2 × …`
    Product(Vec<u64>),
    /// The field with `p^k` elements.
    Gf(u64, u32),
    /// Upper-triangular 2×2 matrices over `Z/p`.
    UpperTriangular(u64),
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Zn(n) => write!(f, "Z/{n}"),
            RingSpec::Product(ns) => {
                let parts: Vec<String> = ns.iter().map(|n| format!("Z/{n}")).collect();
                f.write_str(&parts.join(" x "))
            }
            RingSpec::Gf(p, k) => write!(f, "GF({p}^{k})"),
            RingSpec::UpperTriangular(p) => write!(f, "UT2(Z/{p})"),
        }
    }
}

impl RingSpec {
    pub fn order(&self) -> Option<usize> {
        let n: Option<u64> = match self {
            RingSpec::Zn(n) => Some(*n),
            RingSpec::Product(ns) => ns.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n)),
            RingSpec::Gf(p, k) => p.checked_pow(*k),
            RingSpec::UpperTriangular(p) => p.checked_pow(3),
        };
        n.and_then(|n| usize::try_from(n).ok())
    }
}

/// A family of ring specs, e.g. `zn:4..24`, `zn:6`, `prod:2,3`, `gf:2:3`,
/// `ut:2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingFamily {
    pub name: String,
    pub members: Vec<RingSpec>,
}

impl FromStr for RingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad ring family {s:?} (zn:N, zn:LO..HI, prod:N,M,.., gf:P:K, ut:P)"));
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let members = match kind.trim() {
            "zn" => match rest.split_once("..") {
                Some((lo, hi)) => {
                    let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
                    if lo > hi {
                        return Err(bad());
                    }
                    (lo..=hi).map(RingSpec::Zn).collect()
                }
                None => vec![RingSpec::Zn(num(rest)?)],
            },
            "prod" => vec![RingSpec::Product(rest.split(',').map(num).collect::<Result<_>>()?)],
            "gf" => {
                let (p, k) = rest.split_once(':').ok_or_else(bad)?;
                vec![RingSpec::Gf(num(p)?, num(k)? as u32)]
            }
            "ut" => vec![RingSpec::UpperTriangular(num(rest)?)],
            _ => return Err(bad()),
        };
        Ok(RingFamily { name: s.trim().to_string(), members })
    }
}

/// A finite ring as bare tables; ids run `0..order`, `0` is the zero.
#[derive(Debug, Clone)]
pub struct FiniteRing {
    pub name: String,
    pub order: usize,
    pub add: Vec<ElemId>,
    pub mul: Vec<ElemId>,
}

impl FiniteRing {
    pub fn add(&self, a: ElemId, b: ElemId) -> ElemId {
        self.add[a as usize * self.order + b as usize]
    }

    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        self.mul[a as usize * self.order + b as usize]
    }

    fn from_fn(name: String, order: usize, add: impl Fn(usize, usize) -> usize, mul: impl Fn(usize, usize) -> usize) -> Self {
        let table = |f: &dyn Fn(usize, usize) -> usize| {
            (0..order * order).map(|i| f(i / order, i % order) as ElemId).collect()
        };
        Self { name, order, add: table(&add), mul: table(&mul) }
    }

    /// The first ring axiom that fails, if any.
    pub fn axiom_failure(&self) -> Option<String> {
        let n = self.order as ElemId;
        let all = || 0..n;
        for a in all() {
            if self.add(a, 0) != a {
                return Some(format!("0 is not an additive identity at {a}"));
            }
            if !all().any(|b| self.add(a, b) == 0) {
                return Some(format!("{a} has no additive inverse"));
            }
            for b in all() {
                if self.add(a, b) != self.add(b, a) {
                    return Some(format!("+ is not commutative at ({a}, {b})"));
                }
                for c in all() {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return Some(format!("+ is not associative at ({a}, {b}, {c})"));
                    }
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return Some(format!("* is not associative at ({a}, {b}, {c})"));
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return Some(format!("left distributivity fails at ({a}, {b}, {c})"));
                    }
                    if self.mul(self.add(a, b), c) != self.add(self.mul(a, c), self.mul(b, c)) {
                        return Some(format!("right distributivity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        None
    }

    /// Attach an embedding, giving a `⟨+, ×⟩`-algebra over `R`.
    pub fn with_embedding(&self, values: Vec<BigRational>) -> Result<FiniteAlgebra> {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let tables = vec![OpTable::Dense(Arc::new(self.add.clone())), OpTable::Dense(Arc::new(self.mul.clone()))];
        FiniteAlgebra::new(self.name.clone(), amb, self.order, tables, values)
    }
}

/// Coefficient vectors over `F_p`, low degree first, as base-`p` ids.
fn digits(mut id: usize, p: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let d = id % p;
            id /= p;
            d
        })
        .collect()
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

/// `a mod m` over `F_p` for monic `m`.
fn poly_rem(mut a: Vec<usize>, m: &[usize], p: usize) -> Vec<usize> {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let shift = a.len() - dm;
            for (i, &c) in m[..dm].iter().enumerate() {
                a[shift + i] = (a[shift + i] + p - lead * c % p) % p;
            }
        }
    }
    a
}

fn poly_mul(a: &[usize], b: &[usize], p: usize) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// The first monic irreducible polynomial of degree `k` over `F_p` in
/// base-`p` order of its lower coefficients.
pub fn irreducible(p: usize, k: usize) -> Vec<usize> {
    'cand: for low in 0..p.pow(k as u32) {
        let mut m = digits(low, p, k);
        m.push(1);
        for d in 1..=k / 2 {
            for lowd in 0..p.pow(d as u32) {
                let mut f = digits(lowd, p, d);
                f.push(1);
                if poly_rem(m.clone(), &f, p).iter().all(|&c| c == 0) {
                    continue 'cand;
                }
            }
        }
        return m;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn check_prime(p: u64) -> Result<()> {
    if crate::algebra::is_prime(p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{p} is not prime")))
    }
}

/// Build the ring and verify the ring axioms exhaustively.
pub fn build_ring(spec: &RingSpec, max_order: usize) -> Result<FiniteRing> {
    let limit = max_order.min(MAX_RING_ORDER);
    let order = spec.order().ok_or_else(|| Error::invalid(format!("{spec} is too large")))?;
    if order > limit {
        return Err(Error::LimitExceeded { size: order as u128, limit: limit as u128 });
    }
    let name = spec.to_string();
    let ring = match spec {
        RingSpec::Zn(n) => {
            if *n == 0 {
                return Err(Error::invalid("Z/0 is not finite"));
            }
            let n = *n as usize;
            FiniteRing::from_fn(name, n, |a, b| (a + b) % n, |a, b| a * b % n)
        }
        RingSpec::Product(ns) => {
            if ns.is_empty() || ns.contains(&0) {
                return Err(Error::invalid("products need positive moduli"));
            }
            let ns: Vec<usize> = ns.iter().map(|&n| n as usize).collect();
            // mixed radix, first factor least significant
            let split = |mut id: usize| -> Vec<usize> {
                ns.iter()
                    .map(|&n| {
                        let d = id % n;
                        id /= n;
                        d
                    })
                    .collect()
            };
            let join = |d: Vec<usize>| d.iter().zip(&ns).rev().fold(0, |acc, (&x, &n)| acc * n + x);
            let op = |a: usize, b: usize, f: fn(usize, usize, usize) -> usize| {
                join(split(a).into_iter().zip(split(b)).zip(&ns).map(|((x, y), &n)| f(x, y, n)).collect())
            };
            FiniteRing::from_fn(name, order, |a, b| op(a, b, |x, y, n| (x + y) % n), |a, b| op(a, b, |x, y, n| x * y % n))
        }
        RingSpec::Gf(p, k) => {
            check_prime(*p)?;
            if *k == 0 {
                return Err(Error::invalid("GF(p, k) needs k ≥ 1"));
            }
            let (p, k) = (*p as usize, *k as usize);
            let m = irreducible(p, k);
            let add = |a: usize, b: usize| {
                undigits(&digits(a, p, k).iter().zip(digits(b, p, k)).map(|(x, y)| (x + y) % p).collect::<Vec<_>>(), p)
            };
            let mul = |a: usize, b: usize| {
                let r = poly_rem(poly_mul(&digits(a, p, k), &digits(b, p, k), p), &m, p);
                undigits(&r, p)
            };
            FiniteRing::from_fn(name, order, add, mul)
        }
        RingSpec::UpperTriangular(p) => {
            check_prime(*p)?;
            let p = *p as usize;
            // [[x, y], [0, z]] ↔ x + p·y + p²·z
            let split = |id: usize| (id % p, id / p % p, id / (p * p));
            let join = |(x, y, z): (usize, usize, usize)| x + p * y + p * p * z;
            let add = |a, b| {
                let ((x, y, z), (u, v, w)) = (split(a), split(b));
                join(((x + u) % p, (y + v) % p, (z + w) % p))
            };
            let mul = |a, b| {
                let ((x, y, z), (u, v, w)) = (split(a), split(b));
                join((x * u % p, (x * v + y * w) % p, z * w % p))
            };
            FiniteRing::from_fn(name, order, add, mul)
        }
    };
    if let Some(why) = ring.axiom_failure() {
        return Err(Error::invalid(format!("{} is not a ring: {why}", ring.name)));
    }
    Ok(ring)
}

/// Every member of every family, each verified as a ring.
pub fn enumerate_rings(families: &[RingFamily], max_order: usize) -> Result<Vec<FiniteRing>> {
    families.iter().flat_map(|f| &f.members).map(|s| build_ring(s, max_order)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zn5() {
        let r = build_ring(&RingSpec::Zn(5), 100).unwrap();
        assert_eq!(r.order, 5);
        assert_eq!(r.mul(3, 4), 2);
        assert_eq!(r.add(3, 4), 2);
    }

    #[test]
    fn gf4_is_a_field() {
        assert_eq!(irreducible(2, 2), vec![1, 1, 1]);
        let r = build_ring(&RingSpec::Gf(2, 2), 100).unwrap();
        // with α = x (id 2): α² = α + 1 (id 3), α·(α+1) = 1
        assert_eq!(r.mul(2, 2), 3);
        assert_eq!(r.mul(2, 3), 1);
        for a in 1..4 {
            assert!((1..4).any(|b| r.mul(a, b) == 1));
        }
    }

    #[test]
    fn product_2_3_is_z6_under_crt() {
        let prod = build_ring(&RingSpec::Product(vec![2, 3]), 100).unwrap();
        let z6 = build_ring(&RingSpec::Zn(6), 100).unwrap();
        // k ↦ (k mod 2, k mod 3), encoded first factor least significant
        let crt = |k: ElemId| (k % 2) + 2 * (k % 3);
        let mut seen = [false; 6];
        for k in 0..6 {
            seen[crt(k) as usize] = true;
            for l in 0..6 {
                assert_eq!(crt(z6.add(k, l)), prod.add(crt(k), crt(l)));
                assert_eq!(crt(z6.mul(k, l)), prod.mul(crt(k), crt(l)));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn upper_triangular_is_noncommutative() {
        let r = build_ring(&RingSpec::UpperTriangular(2), 100).unwrap();
        assert_eq!(r.order, 8);
        assert!((0..8).any(|a| (0..8).any(|b| r.mul(a, b) != r.mul(b, a))));
    }

    #[test]
    fn axiom_check_catches_a_broken_table() {
        let mut r = build_ring(&RingSpec::Zn(4), 100).unwrap();
        r.mul[2 * 4 + 3] = 1;
        assert!(r.axiom_failure().is_some());
    }

    #[test]
    fn families_and_limits() {
        let f: RingFamily = "zn:3..5".parse().unwrap();
        assert_eq!(f.members, vec![RingSpec::Zn(3), RingSpec::Zn(4), RingSpec::Zn(5)]);
        assert!("gf:4:2".parse::<RingFamily>().is_ok());
        assert!(build_ring(&RingSpec::Gf(4, 2), 100).is_err());
        assert!(matches!(build_ring(&RingSpec::Zn(200), 100), Err(Error::LimitExceeded { .. })));
        assert!("zz:3".parse::<RingFamily>().is_err());
    }
}
