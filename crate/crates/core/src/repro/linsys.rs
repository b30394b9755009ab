//! The system `x + a·y = b`, `a·x + b·y = 2` with `a`, `b` the `Q`-digit
//! truncations of `∛2`, `∛4`. Its exact counterpart is degenerate, with
//! solution line `x + ∛2·y = ∛4`; nearby rational systems have unique
//! solutions that land far apart on that line.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{fp_add, fp_div, fp_mul, fp_round, DecimalFP, FPParams, MAX_DIGITS};
use crate::scalar::{format_rational, int, pow10_rat, root_enclosure, to_decimal_string, to_f64, ExactScalar};

/// Arithmetic runs with this many times `Q` mantissa digits (capped at the
/// supported maximum); `b − a²` cancels about `Q` leading digits.
pub const WORK_DIGIT_FACTOR: u32 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct LinsysRow {
    pub q: u32,
    pub work_digits: u32,
    pub a: String,
    pub b: String,
    pub singular: bool,
    pub x: Option<String>,
    pub y: Option<String>,
    /// Certified upper bound on `|x + ∛2·y − ∛4|`.
    pub residual_upper: Option<String>,
    pub residual_approx: Option<f64>,
    #[serde(skip)]
    pub solution: Option<(BigRational, BigRational)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinsysReport {
    pub exponent_bound: u32,
    pub rows: Vec<LinsysRow>,
    /// `(Q1, Q2, max(|x1 − x2|, |y1 − y2|))` for consecutive nonsingular rows.
    pub distances: Vec<(u32, u32, f64)>,
}

impl LinsysReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("Q   a             b             x                 y                 residual\n");
        for r in &self.rows {
            let show = |s: &Option<String>| s.clone().unwrap_or_else(|| "-".into());
            let res = r.residual_approx.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "singular".into());
            out.push_str(&format!(
                "{:<3} {:<13} {:<13} {:<17} {:<17} {}\n",
                r.q,
                r.a,
                r.b,
                show(&r.x),
                show(&r.y),
                res
            ));
        }
        for (q1, q2, d) in &self.distances {
            out.push_str(&format!("distance Q={q1} vs Q={q2}: {d:.6}\n"));
        }
        out
    }
}

fn truncated_root(x: u64, q: u32, p: &FPParams) -> Result<DecimalFP> {
    // Q + 5 guard digits decide the truncation unless the root is
    // pathologically close to a digit boundary, which fp_round reports
    let enc = root_enclosure(x, 3, q + 5);
    fp_round(&enc, p)
}

/// Solve by Cramer's rule in decimal floating point.
pub fn solve_linsys(q: u32, exponent_bound: u32) -> Result<LinsysRow> {
    if !(5..=MAX_DIGITS / WORK_DIGIT_FACTOR).contains(&q) {
        return Err(Error::invalid(format!("Q must lie in 5..={}", MAX_DIGITS / WORK_DIGIT_FACTOR)));
    }
    let input = FPParams::new(exponent_bound, q)?;
    let work_digits = (q * WORK_DIGIT_FACTOR).min(MAX_DIGITS);
    let wp = FPParams::new(exponent_bound, work_digits)?;
    let a_in = truncated_root(2, q, &input)?;
    let b_in = truncated_root(4, q, &input)?;
    let lift = |x: &DecimalFP| fp_round(&ExactScalar::exact(x.to_rational(&input)), &wp);
    let (a, b) = (lift(&a_in)?, lift(&b_in)?);
    let two = fp_round(&ExactScalar::exact(int(2)), &wp)?;
    let (add, mul) = (|x: &DecimalFP, y: &DecimalFP| fp_add(x, y, &wp), |x: &DecimalFP, y: &DecimalFP| fp_mul(x, y, &wp));
    // det = b − a², x = (b² − 2a)/det, y = (2 − ab)/det
    let det = add(&b, &mul(&a, &a).neg());
    let mut row = LinsysRow {
        q,
        work_digits,
        a: format_rational(&a_in.to_rational(&input)),
        b: format_rational(&b_in.to_rational(&input)),
        singular: det.is_zero(),
        x: None,
        y: None,
        residual_upper: None,
        residual_approx: None,
        solution: None,
    };
    if det.is_zero() {
        return Ok(row);
    }
    let xn = add(&mul(&b, &b), &mul(&two, &a).neg());
    let yn = add(&two, &mul(&a, &b).neg());
    let x = fp_div(&xn, &det, &wp)?.to_rational(&wp);
    let y = fp_div(&yn, &det, &wp)?.to_rational(&wp);
    let digits = q + 2;
    row.x = Some(to_decimal_string(&x, digits));
    row.y = Some(to_decimal_string(&y, digits));
    let (r, upper) = residual(&x, &y);
    // round the bound up so the printed decimal is still a bound
    let scale = pow10_rat(3 * q as i64);
    let shown = (&upper * &scale).ceil() / &scale;
    row.residual_upper = Some(to_decimal_string(&shown, 3 * q));
    row.residual_approx = Some(to_f64(r.value()).abs());
    row.solution = Some((x, y));
    Ok(row)
}

/// `x + ∛2·y − ∛4` as an enclosure, with an upper bound on its magnitude.
pub fn residual(x: &BigRational, y: &BigRational) -> (ExactScalar, BigRational) {
    let c2 = root_enclosure(2, 3, 60);
    let c4 = root_enclosure(4, 3, 60);
    let r = ExactScalar::exact(x.clone()).add(&c2.mul(&ExactScalar::exact(y.clone()))).sub(&c4);
    let upper = r.abs_upper();
    (r, upper)
}

pub fn repro_linsys(qs: &[u32], exponent_bound: u32) -> Result<LinsysReport> {
    let rows = qs.iter().map(|&q| solve_linsys(q, exponent_bound)).collect::<Result<Vec<_>>>()?;
    let solved: Vec<&LinsysRow> = rows.iter().filter(|r| r.solution.is_some()).collect();
    let distances = solved
        .windows(2)
        .map(|w| {
            let (s, t) = (w[0].solution.as_ref().unwrap(), w[1].solution.as_ref().unwrap());
            let d = (&s.0 - &t.0).abs().max((&s.1 - &t.1).abs());
            (w[0].q, w[1].q, to_f64(&d))
        })
        .collect();
    Ok(LinsysReport { exponent_bound, rows, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn inputs_are_truncated_roots() {
        let r = solve_linsys(5, 10).unwrap();
        assert_eq!(r.a, "12599/10000");
        assert_eq!(r.b, "7937/5000");
    }

    #[test]
    fn exact_cramer_has_a_tiny_residual_on_the_line() {
        // exact elimination on exact inputs: the decimal run should agree closely
        let (a, b) = (rat(12599, 10000), rat(15874, 10000));
        let det = &b - &a * &a;
        let x = (&b * &b - int(2) * &a) / &det;
        let y = (int(2) - &a * &b) / &det;
        let row = solve_linsys(5, 10).unwrap();
        let (fx, fy) = row.solution.unwrap();
        assert!((&fx - &x).abs() < pow10_rat(-8));
        assert!((&fy - &y).abs() < pow10_rat(-8));
        let (_, up) = residual(&x, &y);
        assert!(up < pow10_rat(-4));
    }

    #[test]
    fn two_accurate_far_apart_solutions() {
        let rep = repro_linsys(&[5, 10], 10).unwrap();
        for r in &rep.rows {
            let up: BigRational = crate::scalar::parse_rational(r.residual_upper.as_ref().unwrap()).unwrap();
            assert!(up <= pow10_rat(1 - r.q as i64), "Q={} residual {up}", r.q);
        }
        assert!(rep.distances[0].2 > 1.0);
        assert!(solve_linsys(4, 10).is_err());
    }
}
