//! Regularity, the `c ≪ c'` order, bound widening, the `φ[W]` transform
//! and positive encodings of order relations.

use num_rational::BigRational;
use num_traits::Signed;

use super::ast::{Atom, Binding, BoundTuple, Formula, Quantifier};
use crate::algebra::{Entourage, Region, Span, Term};
use crate::error::{Error, Result};

fn aligned<'a>(phi: &'a Formula, c: &'a BoundTuple) -> Result<impl Iterator<Item = (Quantifier, &'a Region)>> {
    if c.0.len() != phi.prefix.len() {
        return Err(Error::invalid(format!(
            "{} bounds for a prefix of length {}",
            c.0.len(),
            phi.prefix.len()
        )));
    }
    Ok(phi.prefix.iter().map(|b| b.quantifier).zip(c.0.iter()))
}

/// `c` is φ-regular: every ∀-bound is open (and, being a finite union of
/// bounded intervals or a ball, relatively compact); every ∃-bound is
/// compact.
pub fn check_regular(phi: &Formula, c: &BoundTuple) -> Result<bool> {
    Ok(aligned(phi, c)?.all(|(q, r)| match q {
        Quantifier::Forall => r.is_open(),
        Quantifier::Exists => r.is_compact(),
    }))
}

/// `c ≪ c'`: `closure(C'_i) ⊆ C_i` for ∀ positions, `C_i ⊆ int(C'_i)` for
/// ∃ positions.
pub fn check_ll(phi: &Formula, c: &BoundTuple, c2: &BoundTuple) -> Result<bool> {
    let pairs: Vec<_> = aligned(phi, c)?.collect();
    if c2.0.len() != pairs.len() {
        return Err(Error::invalid("bound tuples differ in length"));
    }
    for ((q, r), r2) in pairs.into_iter().zip(&c2.0) {
        let ok = match q {
            Quantifier::Forall => closure_within(r2, r),
            Quantifier::Exists => closure_within_interior(r, r2),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `closure(inner) ⊆ outer`.
fn closure_within(inner: &Region, outer: &Region) -> bool {
    match (inner.merged_spans(), outer.merged_spans()) {
        (Some(a), Some(b)) => a.iter().all(|s| b.iter().any(|t| t.contains_span(&s.closure()))),
        // balls are clopen
        _ => inner.is_subset_of(outer),
    }
}

/// `inner ⊆ int(outer)`.
fn closure_within_interior(inner: &Region, outer: &Region) -> bool {
    match (inner.merged_spans(), outer.merged_spans()) {
        (Some(a), Some(b)) => {
            let int: Vec<Span> = b.iter().map(Span::interior).collect();
            a.iter().all(|s| int.iter().any(|t| t.contains_span(s)))
        }
        _ => inner.is_subset_of(outer),
    }
}

/// A `c'` with `c ≪ c'`: ∀-bounds shrink inward by `margin` (closure kept
/// inside the old bound), ∃-bounds grow outward by `margin`. Balls stay put.
pub fn widen(phi: &Formula, c: &BoundTuple, margin: &BigRational) -> Result<BoundTuple> {
    if !margin.is_positive() {
        return Err(Error::invalid("margin must be positive"));
    }
    let mut out = Vec::new();
    for (q, r) in aligned(phi, c)? {
        let parts = r
            .components()
            .into_iter()
            .map(|part| match part {
                Region::Interval { lo, hi, .. } => match q {
                    Quantifier::Forall => {
                        let (l, h) = (lo + margin, hi - margin);
                        if l >= h {
                            Err(Error::invalid(format!("margin collapses the bound {part}")))
                        } else {
                            Region::open(l, h)
                        }
                    }
                    Quantifier::Exists => Region::closed(lo - margin, hi + margin),
                },
                ball => Ok(ball.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Region::union(parts)?);
    }
    Ok(BoundTuple(out))
}

/// `φ[W]`: every equality atom becomes `W`-closeness; closeness atoms and
/// the prefix are kept.
pub fn approximate(phi: &Formula, w: &Entourage) -> Formula {
    let matrix = phi
        .matrix
        .iter()
        .map(|conj| {
            conj.iter()
                .map(|a| match a {
                    Atom::Eq(x, y) => Atom::Close(x.clone(), y.clone(), w.clone()),
                    other => other.clone(),
                })
                .collect()
        })
        .collect();
    Formula { prefix: phi.prefix.clone(), matrix }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderRelation {
    Le,
    Lt,
}

/// Positive bounded encodings over free `x`, `y`:
/// `≤` as `∃_{|z|≤b} x + z² = y`, `<` as `∃_{|z|≤b} (y − x) z² = 1`.
pub fn desugar_order(rel: OrderRelation, b: &BigRational) -> Result<Formula> {
    if !b.is_positive() {
        return Err(Error::invalid("the bound b must be positive"));
    }
    let z = || Term::var("z");
    let atom = match rel {
        OrderRelation::Le => Atom::Eq(Term::add(Term::var("x"), Term::mul(z(), z())), Term::var("y")),
        OrderRelation::Lt => {
            let diff = Term::add(Term::var("y"), Term::mul(Term::Const(-BigRational::from_integer(1.into())), Term::var("x")));
            Atom::Eq(Term::mul(Term::mul(diff, z()), z()), Term::Const(BigRational::from_integer(1.into())))
        }
    };
    Formula::new(
        vec![Binding {
            quantifier: Quantifier::Exists,
            var: "z".into(),
            bound: Some(Region::closed(-b.clone(), b.clone())?),
        }],
        vec![vec![atom]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::{format_formula, parse_formula};
    use crate::scalar::{int, rat};

    fn two_quant() -> Formula {
        parse_formula("forall x in (-2, 2) exists y in [-1, 1] : x*y = 1").unwrap()
    }

    #[test]
    fn regularity() {
        let f = two_quant();
        assert!(check_regular(&f, &f.bounds().unwrap()).unwrap());
        let bad = BoundTuple(vec![Region::closed(int(-2), int(2)).unwrap(), Region::closed(int(-1), int(1)).unwrap()]);
        assert!(!check_regular(&f, &bad).unwrap());
        let balls = BoundTuple(vec![Region::ball(2, 0).unwrap(), Region::ball(2, 1).unwrap()]);
        assert!(check_regular(&f, &balls).unwrap());
        assert!(check_regular(&f, &BoundTuple(vec![])).is_err());
    }

    #[test]
    fn widening_gives_a_strong_approximation() {
        let f = two_quant();
        let c = f.bounds().unwrap();
        let c2 = widen(&f, &c, &rat(1, 10)).unwrap();
        assert_eq!(c2.0[0], Region::open(rat(-19, 10), rat(19, 10)).unwrap());
        assert_eq!(c2.0[1], Region::closed(rat(-11, 10), rat(11, 10)).unwrap());
        assert!(check_ll(&f, &c, &c2).unwrap());
        assert!(!check_ll(&f, &c2, &c).unwrap());
        // equal interval bounds are never ≪ themselves
        assert!(!check_ll(&f, &c, &c).unwrap());
        let g = parse_formula("forall x in (-1/10, 1/10) : x = x").unwrap();
        assert!(widen(&g, &g.bounds().unwrap(), &rat(1, 10)).is_err());
    }

    #[test]
    fn clopen_tuples_are_self_related() {
        let f = two_quant();
        let balls = BoundTuple(vec![Region::ball(3, 0).unwrap(), Region::ball(3, 2).unwrap()]);
        assert!(check_ll(&f, &balls, &balls).unwrap());
    }

    #[test]
    fn approximation_replaces_equalities_only() {
        let f = parse_formula(": x*y = 1 or close(x, y, 1/3)").unwrap();
        let g = approximate(&f, &Entourage::new(rat(1, 10)).unwrap());
        assert_eq!(format_formula(&g), ": close(x*y, 1, 1/10) or close(x, y, 1/3)");
        let h = parse_formula(": close(x, y, 1/3)").unwrap();
        assert_eq!(approximate(&h, &Entourage::new(rat(1, 10)).unwrap()), h);
    }

    #[test]
    fn order_encodings() {
        let le = desugar_order(OrderRelation::Le, &int(1)).unwrap();
        assert_eq!(format_formula(&le), "exists z in [-1, 1] : x + z*z = y");
        let lt = desugar_order(OrderRelation::Lt, &int(1)).unwrap();
        assert_eq!(format_formula(&lt), "exists z in [-1, 1] : (y + -1*x)*z*z = 1");
        assert!(desugar_order(OrderRelation::Lt, &int(0)).is_err());
    }
}
