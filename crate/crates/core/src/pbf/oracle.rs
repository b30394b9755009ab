//! Exact truth over `R` for three formula families, decided in closed form.
//! These are the only places the crate evaluates a formula over a continuum.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Radii of a symmetric annulus `lo < |x| < hi` (open) or `lo ≤ |x| ≤ hi`
/// (closed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annulus {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Annulus {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if !lo.is_positive() || lo >= hi {
            return Err(Error::invalid("annulus needs 0 < lo < hi"));
        }
        Ok(Self { lo, hi })
    }
}

/// `∀ x ∈ {c.lo < |x| < c.hi} ∃ y ∈ {b.lo ≤ |y| ≤ b.hi} : |xy − 1| < δ`,
/// with `δ = 0` meaning `xy = 1`.
///
/// For `t = |x|` the admissible `y` form `((1−δ)/t, (1+δ)/t)`; the ∀-range
/// is open, so the suprema and infima over `t` need not be attained.
pub fn inverse_holds(c: &Annulus, b: &Annulus, delta: &BigRational) -> bool {
    if delta.is_negative() {
        return false;
    }
    if delta.is_zero() {
        return b.lo <= c.hi.recip() && c.lo.recip() <= b.hi;
    }
    let one = BigRational::one();
    let upper_ok = delta >= &one || (&one - delta) / &c.lo <= b.hi;
    let lower_ok = (&one + delta) / &c.hi >= b.lo;
    upper_ok && lower_ok
}

/// `∃_{|z| ≤ c} |x + z² − y| < α` (`α = 0`: `x + z² = y`), i.e.
/// `y − x ∈ (−α, c² + α)`, closed when `α = 0`.
pub fn order_le_holds(x: &BigRational, y: &BigRational, c: &BigRational, alpha: &BigRational) -> bool {
    let d = y - x;
    let top = c * c;
    if alpha.is_zero() {
        !d.is_negative() && d <= top
    } else {
        -alpha.clone() < d && d < top + alpha
    }
}

/// `∃_{|z| ≤ c} |(y − x) z² − 1| < α` (`α = 0`: `(y − x) z² = 1`).
///
/// `(y − x) z²` sweeps the closed segment between 0 and `(y − x) c²`.
pub fn order_lt_holds(x: &BigRational, y: &BigRational, c: &BigRational, alpha: &BigRational) -> bool {
    let d = y - x;
    let one = BigRational::one();
    let end = &d * c * c;
    if alpha.is_zero() {
        return d.is_positive() && end >= one;
    }
    if alpha > &one {
        // 0 itself is within α of 1
        return true;
    }
    // the segment [0, end] (or [end, 0]) must meet (1 − α, 1 + α)
    d.is_positive() && end > &one - alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn ann(lo: BigRational, hi: BigRational) -> Annulus {
        Annulus::new(lo, hi).unwrap()
    }

    #[test]
    fn inverse_family() {
        let c = ann(rat(2, 3), rat(3, 2));
        assert!(inverse_holds(&c, &ann(rat(2, 3), rat(3, 2)), &int(0)));
        assert!(!inverse_holds(&c, &ann(rat(3, 4), rat(3, 2)), &int(0)));
        // the ∀ bound is open, so touching radii are enough with δ > 0
        let c = ann(rat(4, 5), rat(5, 4));
        // (1 + δ)/c.hi = 22/25 exactly
        let b = ann(rat(22, 25), int(2));
        assert!(inverse_holds(&c, &b, &rat(1, 10)));
        assert!(!inverse_holds(&c, &ann(rat(9, 10), int(2)), &rat(1, 10)));
    }

    #[test]
    fn order_families() {
        let (one, half) = (int(1), rat(1, 2));
        assert!(order_le_holds(&int(0), &int(1), &one, &int(0)));
        assert!(!order_le_holds(&int(0), &rat(11, 10), &one, &int(0)));
        assert!(order_le_holds(&int(0), &rat(11, 10), &one, &rat(1, 5)));
        assert!(!order_le_holds(&int(0), &rat(-1, 5), &one, &rat(1, 5)));
        assert!(order_lt_holds(&int(0), &int(1), &one, &int(0)));
        assert!(!order_lt_holds(&int(0), &rat(1, 2), &one, &int(0)));
        assert!(order_lt_holds(&int(0), &rat(1, 4), &int(2), &int(0)));
        // y − x > (1 − α)/c²
        let c = int(2);
        assert!(order_lt_holds(&int(0), &rat(13, 100), &c, &half));
        assert!(!order_lt_holds(&int(0), &rat(1, 8), &c, &half));
        assert!(order_lt_holds(&int(5), &int(-5), &c, &rat(3, 2)));
    }
}
