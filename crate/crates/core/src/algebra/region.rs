use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, pow_rat, valuation};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The ambient field a finite algebra is embedded into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmbientKind {
    Real,
    Padic { p: u64 },
}

impl AmbientKind {
    /// `ρ(x, y) < ε` over the reals; `|x − y|_p ≤ ε` over `Q_p`.
    pub fn close(&self, x: &BigRational, y: &BigRational, eps: &Entourage) -> bool {
        let d = self.distance(x, y);
        match self {
            AmbientKind::Real => d < eps.epsilon,
            AmbientKind::Padic { .. } => d <= eps.epsilon,
        }
    }

    pub fn distance(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let diff = x - y;
        match self {
            AmbientKind::Real => diff.abs(),
            AmbientKind::Padic { p } => padic_abs(&diff, *p),
        }
    }
}

impl fmt::Display for AmbientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientKind::Real => f.write_str("R"),
            AmbientKind::Padic { p } => write!(f, "Q_{p}"),
        }
    }
}

/// `|x|_p = p^{-v(x)}`, and `0` at zero.
pub fn padic_abs(x: &BigRational, p: u64) -> BigRational {
    match valuation(x, p) {
        None => BigRational::zero(),
        Some(v) => pow_rat(p, -v),
    }
}

/// A metric entourage `W_ε`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entourage {
    pub epsilon: BigRational,
}

impl Entourage {
    pub fn new(epsilon: BigRational) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(Error::invalid("entourage epsilon must be positive"));
        }
        Ok(Self { epsilon })
    }

    /// The `n` with `ε = p^{-n}`.
    pub fn padic_level(&self, p: u64) -> Result<i64> {
        let v = valuation(&self.epsilon, p).expect("epsilon is nonzero");
        if pow_rat(p, v) != self.epsilon {
            return Err(Error::invalid(format!(
                "p-adic entourage must be a power of {p}, got {}",
                format_rational(&self.epsilon)
            )));
        }
        Ok(-v)
    }

    /// The `n` with `|d|_p ≤ ε ⇔ |d|_p ≤ p^{-n}`, for any positive `ε`.
    pub fn padic_cutoff(&self, p: u64) -> i64 {
        let mut e = valuation(&self.epsilon, p).expect("epsilon is nonzero");
        while pow_rat(p, e) > self.epsilon {
            e -= 1;
        }
        while pow_rat(p, e + 1) <= self.epsilon {
            e += 1;
        }
        -e
    }

    pub fn contains(&self, other: &Entourage) -> bool {
        other.epsilon <= self.epsilon
    }
}

impl fmt::Display for Entourage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W({})", format_rational(&self.epsilon))
    }
}

/// A bounding region: a real interval, a p-adic ball `p^{-m} Z_p`, or a
/// finite union of either kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Region {
    /// Both endpoints share the openness flag.
    Interval { lo: BigRational, hi: BigRational, open: bool },
    Ball { p: u64, m: i64 },
    Union(Vec<Region>),
}

/// An interval with independent endpoint flags; used for merging unions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub lo: BigRational,
    pub hi: BigRational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Span {
    pub fn contains_point(&self, x: &BigRational) -> bool {
        let above = match x.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let below = match x.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    pub fn contains_span(&self, o: &Span) -> bool {
        let lo_ok = match self.lo.cmp(&o.lo) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed || !o.lo_closed,
            Ordering::Greater => false,
        };
        let hi_ok = match self.hi.cmp(&o.hi) {
            Ordering::Greater => true,
            Ordering::Equal => self.hi_closed || !o.hi_closed,
            Ordering::Less => false,
        };
        lo_ok && hi_ok
    }

    pub fn closure(&self) -> Span {
        Span { lo_closed: true, hi_closed: true, ..self.clone() }
    }

    pub fn interior(&self) -> Span {
        Span { lo_closed: false, hi_closed: false, ..self.clone() }
    }
}

impl Region {
    pub fn interval(lo: BigRational, hi: BigRational, open: bool) -> Result<Self> {
        if lo >= hi {
            return Err(Error::invalid(format!(
                "interval needs lo < hi, got [{}, {}]",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(Region::Interval { lo, hi, open })
    }

    pub fn closed(lo: BigRational, hi: BigRational) -> Result<Self> {
        Self::interval(lo, hi, false)
    }

    pub fn open(lo: BigRational, hi: BigRational) -> Result<Self> {
        Self::interval(lo, hi, true)
    }

    /// `p^{-m} Z_p`.
    pub fn ball(p: u64, m: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        Ok(Region::Ball { p, m })
    }

    pub fn union(parts: Vec<Region>) -> Result<Self> {
        let mut flat = Vec::new();
        for part in parts {
            match part {
                Region::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Err(Error::invalid("empty region union")),
            1 => Ok(flat.pop().unwrap()),
            _ => {
                let real = flat.iter().all(|r| matches!(r, Region::Interval { .. }));
                let padic = flat.iter().all(|r| matches!(r, Region::Ball { .. }));
                if !(real || padic) {
                    return Err(Error::invalid("a union cannot mix intervals and p-adic balls"));
                }
                Ok(Region::Union(flat))
            }
        }
    }

    /// The leaf intervals or balls.
    pub fn components(&self) -> Vec<&Region> {
        match self {
            Region::Union(parts) => parts.iter().flat_map(|p| p.components()).collect(),
            other => vec![other],
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        match self {
            Region::Interval { lo, hi, open } => {
                if *open {
                    lo < x && x < hi
                } else {
                    lo <= x && x <= hi
                }
            }
            Region::Ball { p, m } => match valuation(x, *p) {
                None => true,
                Some(v) => v >= -m,
            },
            Region::Union(parts) => parts.iter().any(|r| r.contains(x)),
        }
    }

    pub fn is_real(&self) -> bool {
        self.components().iter().all(|r| matches!(r, Region::Interval { .. }))
    }

    pub fn check_kind(&self, kind: &AmbientKind) -> Result<()> {
        for c in self.components() {
            match (c, kind) {
                (Region::Interval { .. }, AmbientKind::Real) => {}
                (Region::Ball { p, .. }, AmbientKind::Padic { p: q }) if p == q => {}
                _ => {
                    return Err(Error::AmbientMismatch(format!(
                        "region {self} does not live in {kind}"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Every component is open; p-adic balls are clopen.
    pub fn is_open(&self) -> bool {
        self.components().iter().all(|r| match r {
            Region::Interval { open, .. } => *open,
            _ => true,
        })
    }

    /// Every component is compact; p-adic balls are compact.
    pub fn is_compact(&self) -> bool {
        self.components().iter().all(|r| match r {
            Region::Interval { open, .. } => !*open,
            _ => true,
        })
    }

    /// Smallest and largest endpoints of a real region.
    pub fn hull(&self) -> Option<(BigRational, BigRational)> {
        let spans = self.spans()?;
        let lo = spans.iter().map(|s| s.lo.clone()).min()?;
        let hi = spans.iter().map(|s| s.hi.clone()).max()?;
        Some((lo, hi))
    }

    /// Components of a real region as spans, unmerged.
    pub fn spans(&self) -> Option<Vec<Span>> {
        self.components()
            .into_iter()
            .map(|r| match r {
                Region::Interval { lo, hi, open } => Some(Span {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    lo_closed: !open,
                    hi_closed: !open,
                }),
                _ => None,
            })
            .collect()
    }

    /// Maximal connected components of a real region.
    pub fn merged_spans(&self) -> Option<Vec<Span>> {
        let mut spans = self.spans()?;
        spans.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Span> = Vec::new();
        for s in spans {
            if let Some(cur) = out.last_mut() {
                let joins = s.lo < cur.hi || (s.lo == cur.hi && (cur.hi_closed || s.lo_closed));
                if joins {
                    match s.hi.cmp(&cur.hi) {
                        Ordering::Greater => {
                            cur.hi = s.hi;
                            cur.hi_closed = s.hi_closed;
                        }
                        Ordering::Equal => cur.hi_closed |= s.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            out.push(s);
        }
        Some(out)
    }

    /// Largest ball of a p-adic region (a union of nested balls is the
    /// largest one).
    pub fn ball_radius(&self) -> Option<(u64, i64)> {
        let mut best: Option<(u64, i64)> = None;
        for c in self.components() {
            match c {
                Region::Ball { p, m } => {
                    best = Some(match best {
                        Some((q, k)) if q == *p => (q, k.max(*m)),
                        Some(_) => return None,
                        None => (*p, *m),
                    })
                }
                _ => return None,
            }
        }
        best
    }

    /// `self ⊆ other`, decided exactly.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        if let (Some(a), Some(b)) = (self.merged_spans(), other.merged_spans()) {
            return a.iter().all(|s| b.iter().any(|t| t.contains_span(s)));
        }
        match (self.ball_radius(), other.ball_radius()) {
            (Some((p, m)), Some((q, k))) => p == q && m <= k,
            _ => false,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Interval { lo, hi, open } => {
                let (l, r) = if *open { ('(', ')') } else { ('[', ']') };
                write!(f, "{l}{}, {}{r}", format_rational(lo), format_rational(hi))
            }
            Region::Ball { p, m } => write!(f, "pball({p}, {m})"),
            Region::Union(parts) => {
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{part}")?;
                }
                Ok(())
            }
        }
    }
}
