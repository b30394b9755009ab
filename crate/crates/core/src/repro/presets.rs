//! Ready-made sweep and evaluation setups for the worked formula examples.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::algebra::{Entourage, Region};
use crate::error::Result;
use crate::pbf::{parse_formula, BoundTuple, Formula, SweepCell};
use crate::real::{sufficient_params_inverse, SufficientParams};
use crate::scalar::{format_rational, int, rat};

/// Everything [`crate::pbf::sweep`] needs.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub name: &'static str,
    pub phi: Formula,
    pub c2: BoundTuple,
    pub w2: Entourage,
    pub points: BTreeMap<String, BigRational>,
    pub ladder: Vec<SweepCell>,
}

fn annulus(lo: BigRational, hi: BigRational, open: bool) -> Region {
    Region::union(vec![
        Region::interval(-hi.clone(), -lo.clone(), open).unwrap(),
        Region::interval(lo, hi, open).unwrap(),
    ])
    .unwrap()
}

/// `∀ x ∈ {2/3 < |x| < 3/2} ∃ y ∈ {2/3 ≤ |y| ≤ 3/2} : xy = 1`, strengthened
/// to `∀ x ∈ {4/5 < |x| < 5/4} ∃ y ∈ {1/2 ≤ |y| ≤ b} : |xy − 1| < δ`.
pub fn inverse_setup(b: &BigRational, delta: &BigRational) -> Result<(SweepSetup, SufficientParams)> {
    let params = sufficient_params_inverse(b, delta)?;
    let phi = parse_formula("forall x in (-3/2, -2/3) | (2/3, 3/2) exists y in [-3/2, -2/3] | [2/3, 3/2] : x*y = 1")?;
    let c2 = BoundTuple(vec![annulus(rat(4, 5), rat(5, 4), true), annulus(b.recip(), b.clone(), false)]);
    let ladder = [
        (int(1), rat(3, 5)),
        (rat(3, 2), rat(3, 10)),
        (int(2), rat(3, 20)),
        (rat(5, 2), rat(3, 40)),
        (int(3), rat(3, 80)),
        (int(3), rat(3, 160)),
        (int(4), rat(3, 320)),
    ]
    .into_iter()
    .map(|(a, e)| SweepCell::new(a, e))
    .collect::<Result<Vec<_>>>()?;
    let setup = SweepSetup {
        name: "inverse",
        phi,
        c2,
        w2: Entourage::new(delta.clone())?,
        points: BTreeMap::new(),
        ladder,
    };
    Ok((setup, params))
}

/// `∃_{|z| ≤ 1} x + z² = y` strengthened to `∃_{|z| ≤ 6/5} |x + z² − y| < α`
/// at the point `(x0, y0)`.
pub fn order_le_setup(x0: &BigRational, y0: &BigRational, alpha: &BigRational) -> Result<SweepSetup> {
    let ladder = [(int(3), rat(1, 5)), (int(3), rat(1, 10)), (int(4), rat(1, 20)), (int(4), rat(1, 40)), (int(5), rat(1, 80))]
        .into_iter()
        .map(|(a, e)| SweepCell::new(a, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSetup {
        name: "order-le",
        phi: parse_formula("exists z in [-1, 1] : x + z*z = y")?,
        c2: BoundTuple(vec![Region::closed(rat(-6, 5), rat(6, 5))?]),
        w2: Entourage::new(alpha.clone())?,
        points: BTreeMap::from([("x".to_string(), x0.clone()), ("y".to_string(), y0.clone())]),
        ladder,
    })
}

/// `∃_{|z| ≤ c} |(y − x) z² − 1| < α` over free `x`, `y`.
pub fn order_lt_formula(c: &BigRational, alpha: &BigRational) -> Result<Formula> {
    Ok(parse_formula(&format!(
        "exists z in [-{c}, {c}] : close((y + -1*x)*z*z, 1, {alpha})",
        c = format_rational(c),
        alpha = format_rational(alpha)
    ))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub x: String,
    pub y: String,
    pub finite: bool,
    pub predicted: bool,
    /// Within `ε` of the line `y = x + (1 − α)/c²`.
    pub in_band: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub formula: String,
    pub algebra: String,
    pub band_center: String,
    pub rows: Vec<ThresholdRow>,
    /// Rows outside the band where the finite verdict differs from the oracle.
    pub disagreements: usize,
}

impl ThresholdReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{}\nover {}\nthreshold line y - x = {}\n", self.formula, self.algebra, self.band_center);
        out.push_str(&format!("{:>10} {:>10} {:>7} {:>9} {:>5}\n", "x", "y", "finite", "predicted", "band"));
        for r in &self.rows {
            out.push_str(&format!("{:>10} {:>10} {:>7} {:>9} {:>5}\n", r.x, r.y, r.finite, r.predicted, r.in_band));
        }
        out.push_str(&format!("disagreements outside the band: {}\n", self.disagreements));
        out
    }
}

/// The default point set: a `1/20` lattice on `[−1, 1]²` plus points just
/// either side of the threshold line.
pub fn default_threshold_points(c: &BigRational, alpha: &BigRational) -> Vec<(BigRational, BigRational)> {
    let mut pts = Vec::new();
    for i in -20..=20 {
        for j in -20..=20 {
            pts.push((rat(i, 20), rat(j, 20)));
        }
    }
    let t = (int(1) - alpha) / (c * c);
    for i in [-10, -3, 0, 4, 10] {
        let x = rat(i, 20);
        for k in [-20, -5, -2, 2, 5, 20] {
            pts.push((x.clone(), &x + &t + rat(k, 1000)));
        }
    }
    pts
}

/// Evaluate `∃_{|z| ≤ c} |(y − x) z² − 1| < α` on the canonical grid of
/// step `ε/2` over `[−a, a]` at each point, next to the closed-form verdict
/// at the carrier values actually used.
pub fn order_lt_threshold(
    c: &BigRational,
    alpha: &BigRational,
    a: &BigRational,
    eps: &BigRational,
    points: &[(BigRational, BigRational)],
) -> Result<ThresholdReport> {
    use crate::algebra::{canonical_approximation, AmbientKind, AmbientStructure};
    use crate::pbf::oracle::order_lt_holds;
    use crate::pbf::{eval_finite, format_formula};
    use rayon::prelude::*;
    use std::sync::Arc;

    let phi = order_lt_formula(c, alpha)?;
    let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
    let alg = canonical_approximation(amb, &Region::closed(-a.clone(), a.clone())?, &Entourage::new(eps.clone())?, &(eps / int(2)))?;
    let center = (int(1) - alpha) / (c * c);
    let emb = alg.embedding();
    let rows = points
        .par_iter()
        .map(|(x, y)| {
            let (xi, yi) = (emb.nearest(x).expect("nonempty"), emb.nearest(y).expect("nonempty"));
            let (xv, yv) = (alg.value(xi).clone(), alg.value(yi).clone());
            let asg = BTreeMap::from([("x".to_string(), xi), ("y".to_string(), yi)]);
            let finite = eval_finite(&phi, &alg, &asg)?.value;
            let gap = (&yv - &xv - &center).abs();
            Ok(ThresholdRow {
                x: format_rational(&xv),
                y: format_rational(&yv),
                finite,
                predicted: order_lt_holds(&xv, &yv, c, alpha),
                in_band: &gap <= eps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let disagreements = rows.iter().filter(|r| !r.in_band && r.finite != r.predicted).count();
    Ok(ThresholdReport {
        formula: format_formula(&phi),
        algebra: alg.label().to_string(),
        band_center: format_rational(&center),
        rows,
        disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::{check_ll, check_regular};

    #[test]
    fn inverse_setup_is_a_strong_approximation() {
        let (s, p) = inverse_setup(&int(2), &rat(1, 10)).unwrap();
        let c = s.phi.bounds().unwrap();
        assert!(check_regular(&s.phi, &c).unwrap());
        assert!(check_regular(&s.phi, &s.c2).unwrap());
        assert!(check_ll(&s.phi, &c, &s.c2).unwrap());
        assert!(p.eps0.upper() < rat(1, 50));
    }

    #[test]
    fn strict_order_formula_text() {
        let f = order_lt_formula(&int(2), &rat(1, 2)).unwrap();
        assert_eq!(crate::pbf::format_formula(&f), "exists z in [-2, 2] : close((y + -1*x)*z*z, 1, 1/2)");
    }
}

#[cfg(test)]
mod threshold_tests {
    use super::*;

    #[test]
    fn coarse_threshold_matches_oracle() {
        let pts = default_threshold_points(&int(2), &rat(1, 2));
        let pts: Vec<_> = pts.into_iter().step_by(7).collect();
        let r = order_lt_threshold(&int(2), &rat(1, 2), &int(4), &rat(1, 100), &pts).unwrap();
        assert_eq!(r.disagreements, 0, "{}", r.to_table());
        assert!(r.rows.iter().any(|r| r.finite) && r.rows.iter().any(|r| !r.finite));
    }
}

#[cfg(test)]
mod sweep_tests {
    use super::*;
    use crate::pbf::{sweep, Builder};

    #[test]
    fn inverse_sweep_fails_coarse_and_holds_fine() {
        let (s, _) = inverse_setup(&int(2), &rat(1, 10)).unwrap();
        let r = sweep(&s.phi, &s.c2, &s.w2, &s.points, &s.ladder[..4], &[Builder::Canonical, Builder::Modular]).unwrap();
        assert_eq!(r.cells[0].verdict, Some(false), "{}", r.to_table());
        assert!(r.cells[2..].iter().all(|c| c.verdict == Some(true)), "{}", r.to_table());
    }
}
