//! Exact decision procedures for `(C, W)`-grids, `(C, W)`-homomorphisms and
//! `(C, W)`-approximations.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::finite::{tuples, ElemId, FiniteAlgebra};
use super::region::{AmbientKind, Entourage, Region, Span};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, pow_rat, ExactScalar};

/// Violations kept verbatim in a report; the total is always counted.
pub const MAX_REPORTED_VIOLATIONS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridResult {
    pub ok: bool,
    /// A point of `C` farther than `W` from every embedded element.
    pub witness: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomViolation {
    pub symbol: String,
    pub args: Vec<ElemId>,
    /// `g(j(ā))`, possibly as an enclosure.
    pub embedded_result: String,
    /// `j(g_f(ā))`.
    pub table_result: String,
    pub distance: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomResult {
    pub ok: bool,
    pub violations: Vec<HomViolation>,
    pub violation_count: usize,
    pub tuples_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproximationReport {
    pub algebra: String,
    pub region: String,
    pub epsilon: String,
    pub grid_ok: bool,
    pub hom_ok: bool,
    pub grid_witness: Option<String>,
    pub hom_violations: Vec<HomViolation>,
    pub violation_count: usize,
    pub tuples_checked: usize,
}

impl ApproximationReport {
    pub fn ok(&self) -> bool {
        self.grid_ok && self.hom_ok
    }
}

fn precheck(alg: &FiniteAlgebra, c: &Region) -> Result<()> {
    if alg.size() == 0 {
        return Err(Error::EmptyCarrier);
    }
    c.check_kind(&alg.kind())
}

/// Is `j(A_f)` a `(C, W)`-grid?
pub fn check_grid(alg: &FiniteAlgebra, c: &Region, w: &Entourage) -> Result<GridResult> {
    precheck(alg, c)?;
    match alg.kind() {
        AmbientKind::Real => Ok(real_grid(alg.embedding().values(), c, &w.epsilon)),
        AmbientKind::Padic { p } => padic_grid(alg.embedding().values(), p, c, w),
    }
}

fn real_grid(values: &[BigRational], c: &Region, eps: &BigRational) -> GridResult {
    let mut sorted: Vec<&BigRational> = values.iter().collect();
    sorted.sort();
    sorted.dedup();
    for span in c.merged_spans().expect("real region") {
        if let Some(w) = uncovered_point(&sorted, &span, eps) {
            return GridResult { ok: false, witness: Some(w) };
        }
    }
    GridResult { ok: true, witness: None }
}

/// Sweep the open balls `(v − ε, v + ε)` left to right across `span`.
fn uncovered_point(sorted: &[&BigRational], span: &Span, eps: &BigRational) -> Option<BigRational> {
    let two = int(2);
    let mut x = span.lo.clone();
    // whether `x` itself must be covered (otherwise only points just right of it)
    let mut need = span.lo_closed;
    let mut idx = 0usize;
    let mut best: Option<&BigRational> = None;
    loop {
        match x.cmp(&span.hi) {
            Ordering::Greater => return None,
            Ordering::Equal if !(need && span.hi_closed) => return None,
            _ => {}
        }
        // balls whose left end is < x (or ≤ x when x itself is exempt)
        while idx < sorted.len() {
            let left = sorted[idx] - eps;
            let admits = if need { left < x } else { left <= x };
            if !admits {
                break;
            }
            best = Some(sorted[idx]);
            idx += 1;
        }
        let reach = best.map(|v| v + eps);
        match reach {
            Some(r) if r > x => {
                x = r;
                need = true;
            }
            _ => {
                if need {
                    return Some(x);
                }
                let next_left = sorted.get(idx).map(|v| *v - eps);
                let stop = match next_left {
                    Some(l) if l < span.hi => l,
                    _ => span.hi.clone(),
                };
                return Some((&x + stop) / &two);
            }
        }
    }
}

fn padic_grid(values: &[BigRational], p: u64, c: &Region, w: &Entourage) -> Result<GridResult> {
    let (_, m) = c.ball_radius().ok_or_else(|| Error::AmbientMismatch("expected a p-adic ball".into()))?;
    let n = w.padic_level(p)?;
    let scale = pow_rat(p, m);
    let classes_exp = m + n;
    if classes_exp <= 0 {
        // the whole ball lies in one class of p^n Z_p
        let covered = values.iter().any(|v| match crate::scalar::valuation(v, p) {
            None => true,
            Some(vv) => vv >= n,
        });
        let witness = (!covered).then(BigRational::zero);
        return Ok(GridResult { ok: covered, witness });
    }
    let modulus: BigInt = num_traits::pow(BigInt::from(p), classes_exp as usize);
    let mut residues = BTreeSet::new();
    for v in values {
        let scaled = v * &scale;
        if scaled.is_integer() {
            residues.insert(scaled.to_integer().mod_floor(&modulus));
        }
    }
    if BigInt::from(residues.len()) == modulus {
        return Ok(GridResult { ok: true, witness: None });
    }
    let mut r = BigInt::zero();
    for have in &residues {
        if *have != r {
            break;
        }
        r += BigInt::one();
    }
    Ok(GridResult { ok: false, witness: Some(BigRational::from_integer(r) / scale) })
}

/// Is `j` a `(C, W)`-homomorphism? Tuples whose images or exact results
/// leave `C` are skipped.
pub fn check_homomorphism(alg: &FiniteAlgebra, c: &Region, w: &Entourage) -> Result<HomResult> {
    precheck(alg, c)?;
    let in_c = alg.embedding().preimage(c);
    let kind = alg.kind();
    let mut violations = Vec::new();
    let mut count = 0usize;
    let mut checked = 0usize;
    for (op, sym) in alg.signature().symbols().iter().enumerate() {
        let n = in_c.len();
        let per_first: Vec<Result<(usize, usize, Vec<HomViolation>)>> = if sym.arity == 0 {
            vec![check_tuples(alg, op, &sym.name, c, w, kind, std::iter::once(vec![]))]
        } else {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let rest = tuples(n, sym.arity - 1).map(|t| {
                        let mut args = Vec::with_capacity(sym.arity);
                        args.push(in_c[i]);
                        args.extend(t.into_iter().map(|k| in_c[k as usize]));
                        args
                    });
                    check_tuples(alg, op, &sym.name, c, w, kind, rest)
                })
                .collect()
        };
        for part in per_first {
            let (k, cnt, v) = part?;
            checked += k;
            count += cnt;
            for viol in v {
                if violations.len() < MAX_REPORTED_VIOLATIONS {
                    violations.push(viol);
                }
            }
        }
    }
    Ok(HomResult { ok: count == 0, violations, violation_count: count, tuples_checked: checked })
}

fn check_tuples(
    alg: &FiniteAlgebra,
    op: usize,
    name: &str,
    c: &Region,
    w: &Entourage,
    kind: AmbientKind,
    args_iter: impl Iterator<Item = Vec<ElemId>>,
) -> Result<(usize, usize, Vec<HomViolation>)> {
    let exact = alg.ambient().is_exact(op);
    let mut checked = 0;
    let mut count = 0;
    let mut out = Vec::new();
    for args in args_iter {
        let table = alg.try_apply(op, &args)?;
        let table_val = alg.value(table);
        let inputs: Vec<&BigRational> = args.iter().map(|&a| alg.value(a)).collect();
        let (in_region, close, shown) = if exact {
            let r = alg.ambient().apply_exact(op, &inputs);
            let inside = c.contains(&r);
            let close = inside && kind.close(&r, table_val, w);
            (inside, close, ExactScalar::exact(r))
        } else {
            decide_oracle(alg, op, &inputs, c, w, table_val)?
        };
        if !in_region {
            continue;
        }
        checked += 1;
        if !close {
            count += 1;
            if out.len() < MAX_REPORTED_VIOLATIONS {
                out.push(HomViolation {
                    symbol: name.to_string(),
                    args,
                    embedded_result: shown.to_string(),
                    table_result: format_rational(table_val),
                    distance: format_rational(&kind.distance(shown.value(), table_val)),
                });
            }
        }
    }
    Ok((checked, count, out))
}

/// Membership and closeness for an oracle symbol, refining the enclosure
/// until both are decided.
fn decide_oracle(
    alg: &FiniteAlgebra,
    op: usize,
    inputs: &[&BigRational],
    c: &Region,
    w: &Entourage,
    table_val: &BigRational,
) -> Result<(bool, bool, ExactScalar)> {
    let mut tol = &w.epsilon / int(1000);
    for _ in 0..12 {
        let e = alg.ambient().apply(op, inputs, &tol);
        if let (Some(inside), Some(close)) = (oracle_in_region(&e, c), oracle_close(&e, table_val, w)) {
            return Ok((inside, inside && close, e));
        }
        tol /= int(1000);
    }
    Err(Error::Undecidable(format!(
        "{} at {:?}: enclosure too coarse for the (C, W) decision",
        alg.signature().symbols()[op].name,
        inputs.iter().map(|x| format_rational(x)).collect::<Vec<_>>()
    )))
}

fn oracle_in_region(e: &ExactScalar, c: &Region) -> Option<bool> {
    let lo = e.lower();
    let hi = e.upper();
    let a = c.contains(&lo);
    let b = c.contains(&hi);
    if a && b {
        // both ends inside one component
        let spans = c.merged_spans()?;
        if spans.iter().any(|s| s.contains_point(&lo) && s.contains_point(&hi)) {
            return Some(true);
        }
        return None;
    }
    if !a && !b {
        let spans = c.merged_spans()?;
        let touches = spans.iter().any(|s| s.hi >= lo && s.lo <= hi);
        return if touches { None } else { Some(false) };
    }
    None
}

fn oracle_close(e: &ExactScalar, y: &BigRational, w: &Entourage) -> Option<bool> {
    let d = ExactScalar::enclosure((e.value() - y).abs(), e.radius().clone());
    match d.cmp_rational(&w.epsilon) {
        Ok(Ordering::Less) => Some(true),
        Ok(_) => Some(false),
        Err(_) => None,
    }
}

/// Grid and homomorphism checks together.
pub fn check_approximation(alg: &FiniteAlgebra, c: &Region, w: &Entourage) -> Result<ApproximationReport> {
    let grid = check_grid(alg, c, w)?;
    let hom = check_homomorphism(alg, c, w)?;
    Ok(ApproximationReport {
        algebra: alg.label().to_string(),
        region: c.to_string(),
        epsilon: format_rational(&w.epsilon),
        grid_ok: grid.ok,
        hom_ok: hom.ok,
        grid_witness: grid.witness.as_ref().map(format_rational),
        hom_violations: hom.violations,
        violation_count: hom.violation_count,
        tuples_checked: hom.tuples_checked,
    })
}

/// Restrict a verified `(C, W)`-approximation to `C' ⊆ C` and `W' ⊇ W`
/// and re-check it there.
pub fn check_restriction_monotone(
    alg: &FiniteAlgebra,
    c: &Region,
    w: &Entourage,
    c2: &Region,
    w2: &Entourage,
) -> Result<bool> {
    if !c2.is_subset_of(c) {
        return Err(Error::Premise(format!("{c2} is not contained in {c}")));
    }
    if !w2.contains(w) {
        return Err(Error::Premise(format!("{w2} does not contain {w}")));
    }
    if !check_approximation(alg, c, w)?.ok() {
        return Err(Error::Premise(format!("{} is not a ({c}, {w})-approximation", alg.label())));
    }
    Ok(check_approximation(alg, c2, w2)?.ok())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{table_from_fn, AmbientStructure};
    use crate::scalar::rat;

    /// Carrier `{kε : |k| ≤ M}` with exact-restriction tables (clamped).
    fn lattice_algebra(m: i64, step: BigRational) -> FiniteAlgebra {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let size = (2 * m + 1) as usize;
        let add = table_from_fn(size, 2, move |a| {
            ((a[0] as i64 + a[1] as i64 - 2 * m).clamp(-m, m) + m) as ElemId
        });
        let mul = table_from_fn(size, 2, |_| 0);
        let vals = (-m..=m).map(|k| BigRational::from_integer(k.into()) * &step).collect();
        FiniteAlgebra::new("lattice", amb, size, vec![add, mul], vals).unwrap()
    }

    fn single_point() -> FiniteAlgebra {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let t = || table_from_fn(1, 2, |_| 0);
        FiniteAlgebra::new("zero", amb, 1, vec![t(), t()], vec![int(0)]).unwrap()
    }

    /// Brute-force coverage on a 1/100 lattice of the interval.
    fn oracle_covers(values: &[BigRational], lo: i64, hi: i64, eps: &BigRational) -> bool {
        (lo * 100..=hi * 100).all(|k| {
            let x = rat(k, 100);
            values.iter().any(|v| (v - &x).abs() < *eps)
        })
    }

    #[test]
    fn single_point_covers_wide_ball() {
        let alg = single_point();
        let c = Region::closed(int(-1), int(1)).unwrap();
        let r = check_grid(&alg, &c, &Entourage::new(int(2)).unwrap()).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn half_step_lattice_grid_thresholds() {
        let alg = lattice_algebra(4, rat(1, 2));
        let c = Region::closed(int(-2), int(2)).unwrap();
        let half = Entourage::new(rat(1, 2)).unwrap();
        let quarter = Entourage::new(rat(1, 4)).unwrap();
        assert!(check_grid(&alg, &c, &half).unwrap().ok);
        let r = check_grid(&alg, &c, &quarter).unwrap();
        assert!(!r.ok);
        let w = r.witness.unwrap();
        assert!(c.contains(&w));
        assert!(alg.embedding().values().iter().all(|v| (v - &w).abs() >= rat(1, 4)));
        // oracle agreement
        let vals = alg.embedding().values();
        assert!(oracle_covers(vals, -2, 2, &rat(1, 2)));
        assert!(!oracle_covers(vals, -2, 2, &rat(1, 4)));
    }

    #[test]
    fn open_region_endpoints_are_exempt() {
        // images at ±1 with ε = 1 cover (-2, 2) except 0? |0 - 1| = 1 is not < 1
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let t = || table_from_fn(2, 2, |_| 0);
        let alg = FiniteAlgebra::new("pm1", amb, 2, vec![t(), t()], vec![int(-1), int(1)]).unwrap();
        let w = Entourage::new(int(1)).unwrap();
        let r = check_grid(&alg, &Region::open(int(-2), int(0)).unwrap(), &w).unwrap();
        assert!(r.ok, "(-2, 0) is covered by (-2, 0)");
        let r = check_grid(&alg, &Region::closed(int(-2), int(0)).unwrap(), &w).unwrap();
        assert!(!r.ok);
        let r = check_grid(&alg, &Region::open(int(-2), int(2)).unwrap(), &w).unwrap();
        assert_eq!(r.witness, Some(int(0)));
        let r = check_grid(&alg, &Region::open(int(-3), int(0)).unwrap(), &w).unwrap();
        assert_eq!(r.witness, Some(rat(-5, 2)));
    }

    #[test]
    fn exact_restriction_has_no_violations() {
        let alg = lattice_algebra(4, rat(1, 2));
        let c = Region::closed(int(-2), int(2)).unwrap();
        for eps in [rat(1, 1000), rat(1, 2), int(3)] {
            let h = check_homomorphism(&alg, &c, &Entourage::new(eps).unwrap()).unwrap();
            // the multiplication table is junk, so restrict to + by checking its violations only
            assert!(h.violations.iter().all(|v| v.symbol == "*"));
        }
    }

    #[test]
    fn empty_carrier_is_an_error() {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let t = || table_from_fn(0, 2, |_| 0);
        let alg = FiniteAlgebra::new("empty", amb, 0, vec![t(), t()], vec![]).unwrap();
        let c = Region::closed(int(0), int(1)).unwrap();
        let w = Entourage::new(int(1)).unwrap();
        assert_eq!(check_grid(&alg, &c, &w), Err(Error::EmptyCarrier));
    }

    #[test]
    fn mismatched_ambient_is_an_error() {
        let alg = single_point();
        let w = Entourage::new(int(1)).unwrap();
        assert!(matches!(
            check_grid(&alg, &Region::ball(2, 0).unwrap(), &w),
            Err(Error::AmbientMismatch(_))
        ));
    }

    #[test]
    fn disjoint_region_is_vacuously_homomorphic() {
        let alg = lattice_algebra(2, int(1));
        let far = Region::closed(int(100), int(200)).unwrap();
        let h = check_homomorphism(&alg, &far, &Entourage::new(rat(1, 100)).unwrap()).unwrap();
        assert!(h.ok);
        assert_eq!(h.tuples_checked, 0);
    }
}
