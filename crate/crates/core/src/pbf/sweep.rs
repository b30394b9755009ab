//! Evaluate a strong approximation `φ[c'][W']` over a ladder of ever finer
//! `(a, ε)`-approximations of `R` and locate the cell from which it stays
//! true. Evidence about the declared builder families only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::ast::{BoundTuple, Formula};
use super::eval::{eval_finite, TraceStep};
use super::parser::format_formula;
use super::transform::{approximate, check_ll, check_regular};
use crate::algebra::{canonical_approximation, AmbientKind, AmbientStructure, ElemId, Entourage, FiniteAlgebra, Region};
use crate::error::{Error, Result};
use crate::real::{apq_params_for_cell, build_apq, build_modular, modular_params_for_cell};
use crate::scalar::{format_rational, int};

/// Cap on the number of free-variable tuples tried per cell; larger
/// candidate sets are thinned evenly (noted in the cell result).
pub const MAX_SWEEP_TUPLES: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builder {
    /// Uniform grid of step `ε/2` over `[−a, a]`.
    Canonical,
    /// The smallest `A_PQ` that is an `(a, ε)`-approximation.
    Apq,
    /// `A'_{M, ε/2}` covering `[−a, a]`.
    Modular,
}

impl Builder {
    pub const ALL: [Builder; 3] = [Builder::Canonical, Builder::Apq, Builder::Modular];

    pub fn build(&self, cell: &SweepCell) -> Result<FiniteAlgebra> {
        match self {
            Builder::Canonical => {
                let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
                let c = Region::closed(-cell.a.clone(), cell.a.clone())?;
                let w = Entourage::new(cell.eps.clone())?;
                canonical_approximation(amb, &c, &w, &(&cell.eps / int(2)))
            }
            Builder::Apq => build_apq(&apq_params_for_cell(&cell.a, &cell.eps)?),
            Builder::Modular => build_modular(&modular_params_for_cell(&cell.a, &cell.eps)?),
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builder::Canonical => "canonical",
            Builder::Apq => "apq",
            Builder::Modular => "modular",
        })
    }
}

impl FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Builder::Canonical),
            "apq" => Ok(Builder::Apq),
            "modular" => Ok(Builder::Modular),
            _ => Err(Error::invalid(format!("unknown builder {s:?} (canonical, apq, modular)"))),
        }
    }
}

/// `C = [−a, a]`, `W = W_ε`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepCell {
    pub a: BigRational,
    pub eps: BigRational,
}

impl SweepCell {
    pub fn new(a: BigRational, eps: BigRational) -> Result<Self> {
        if !a.is_positive() || !eps.is_positive() {
            return Err(Error::invalid("ladder cells need a > 0 and eps > 0"));
        }
        Ok(Self { a, eps })
    }

    /// `⟨C, W⟩ ≤ ⟨C', W'⟩`: a larger region and a smaller entourage.
    pub fn refines(&self, coarser: &SweepCell) -> bool {
        self.a >= coarser.a && self.eps <= coarser.eps
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub builder: Builder,
    pub a: String,
    pub eps: String,
    pub carrier_size: usize,
    /// `None` when the builder could not produce an algebra for the cell.
    pub verdict: Option<bool>,
    pub tuples_checked: usize,
    /// Free-variable values at the first failing tuple.
    pub failing_tuple: Option<BTreeMap<String, String>>,
    pub trace: Vec<TraceStep>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Threshold {
    pub index: usize,
    pub a: String,
    pub eps: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    /// `φ[c'][W']` as evaluated.
    pub formula: String,
    pub points: BTreeMap<String, String>,
    pub cells: Vec<CellResult>,
    /// The coarsest ladder cell from which every finer cell is true for every
    /// builder.
    pub empirical_threshold: Option<Threshold>,
    pub disclaimer: &'static str,
}

const DISCLAIMER: &str = "empirical: only the listed builder families were evaluated";

impl SweepReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut rows = vec![[
            "builder".to_string(),
            "a".into(),
            "eps".into(),
            "carrier".into(),
            "tuples".into(),
            "verdict".into(),
        ]];
        for c in &self.cells {
            let verdict = match (c.verdict, &c.note) {
                (Some(v), None) => v.to_string(),
                (Some(v), Some(n)) => format!("{v} ({n})"),
                (None, Some(n)) => format!("error: {n}"),
                (None, None) => "error".to_string(),
            };
            rows.push([
                c.builder.to_string(),
                c.a.clone(),
                c.eps.clone(),
                c.carrier_size.to_string(),
                c.tuples_checked.to_string(),
                verdict,
            ]);
        }
        let widths: Vec<usize> = (0..6).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap()).collect();
        let mut out = format!("formula: {}\n", self.formula);
        for r in rows {
            let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        match &self.empirical_threshold {
            Some(t) => out.push_str(&format!("uniformly true from cell {} (a={}, eps={})\n", t.index, t.a, t.eps)),
            None => out.push_str("no uniformly true tail\n"),
        }
        out.push_str(DISCLAIMER);
        out.push('\n');
        out
    }
}

/// Carrier elements within `ε` of `x`.
fn near(alg: &FiniteAlgebra, x: &BigRational, eps: &BigRational) -> Vec<ElemId> {
    let w = Entourage::new(eps.clone()).expect("positive");
    alg.embedding()
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| AmbientKind::Real.close(v, x, &w))
        .map(|(i, _)| i as ElemId)
        .collect()
}

/// At most `k` evenly spaced entries, both ends included.
fn thin(ids: &[ElemId], k: usize) -> Vec<ElemId> {
    if ids.len() <= k {
        return ids.to_vec();
    }
    let mut out: Vec<ElemId> = (0..k).map(|i| ids[i * (ids.len() - 1) / (k - 1)]).collect();
    out.dedup();
    out
}

fn run_cell(
    phi: &Formula,
    points: &BTreeMap<String, BigRational>,
    cell: &SweepCell,
    builder: Builder,
) -> CellResult {
    let mut res = CellResult {
        builder,
        a: format_rational(&cell.a),
        eps: format_rational(&cell.eps),
        carrier_size: 0,
        verdict: None,
        tuples_checked: 0,
        failing_tuple: None,
        trace: vec![],
        note: None,
    };
    let alg = match builder.build(cell) {
        Ok(a) => a,
        Err(e) => {
            res.note = Some(e.to_string());
            return res;
        }
    };
    res.carrier_size = alg.size();
    let names: Vec<&String> = points.keys().collect();
    let choices: Vec<Vec<ElemId>> = points.values().map(|x| near(&alg, x, &cell.eps)).collect();
    if let Some(i) = choices.iter().position(Vec::is_empty) {
        res.verdict = Some(false);
        res.note = Some(format!("no carrier element within eps of {}", names[i]));
        return res;
    }
    let full: usize = choices.iter().map(Vec::len).product();
    let choices = if full > MAX_SWEEP_TUPLES {
        let per = (MAX_SWEEP_TUPLES as f64).powf(1.0 / choices.len() as f64).floor().max(2.0) as usize;
        let thinned: Vec<Vec<ElemId>> = choices.iter().map(|c| thin(c, per)).collect();
        let kept: usize = thinned.iter().map(Vec::len).product();
        res.note = Some(format!("evenly thinned to {kept} of {full} nearby tuples"));
        thinned
    } else {
        choices
    };
    let total: usize = choices.iter().map(Vec::len).product();
    for k in 0..total {
        let mut rem = k;
        let mut assign = BTreeMap::new();
        for (name, ch) in names.iter().zip(&choices).rev() {
            assign.insert((*name).clone(), ch[rem % ch.len()]);
            rem /= ch.len();
        }
        res.tuples_checked += 1;
        match eval_finite(phi, &alg, &assign) {
            Ok(out) if out.value => {}
            Ok(out) => {
                res.verdict = Some(false);
                res.failing_tuple =
                    Some(assign.iter().map(|(n, &e)| (n.clone(), format_rational(alg.value(e)))).collect());
                res.trace = out.trace;
                return res;
            }
            Err(e) => {
                res.note = Some(e.to_string());
                return res;
            }
        }
    }
    res.verdict = Some(true);
    res
}

/// Sweep `φ[c'][W']` where `phi` carries the bounds `c`.
///
/// Every free variable of `phi` needs an ambient point; cells are evaluated
/// at each tuple of carrier elements within the cell's `ε` of those points.
pub fn sweep(
    phi: &Formula,
    c2: &BoundTuple,
    w2: &Entourage,
    points: &BTreeMap<String, BigRational>,
    ladder: &[SweepCell],
    builders: &[Builder],
) -> Result<SweepReport> {
    if ladder.is_empty() {
        return Err(Error::invalid("the ladder is empty"));
    }
    let c = phi.bounds().ok_or_else(|| Error::invalid("the formula has unbounded quantifiers"))?;
    if !check_regular(phi, &c)? || !check_regular(phi, &c2.clone())? {
        return Err(Error::Premise("bound tuples must be regular for the formula".into()));
    }
    if !check_ll(phi, &c, c2)? {
        return Err(Error::Premise("c ≪ c' does not hold".into()));
    }
    for v in phi.free_vars() {
        if !points.contains_key(&v) {
            return Err(Error::invalid(format!("no point given for free variable {v:?}")));
        }
    }
    for w in ladder.windows(2) {
        if !w[1].refines(&w[0]) {
            return Err(Error::invalid("ladder cells must refine their predecessors"));
        }
    }
    let strong = approximate(&phi.with_bounds(c2)?, w2);
    let jobs: Vec<(usize, Builder)> =
        (0..ladder.len()).flat_map(|i| builders.iter().map(move |&b| (i, b))).collect();
    let cells: Vec<CellResult> =
        jobs.par_iter().map(|&(i, b)| run_cell(&strong, points, &ladder[i], b)).collect();

    let cell_ok: Vec<bool> = (0..ladder.len())
        .map(|i| cells.iter().zip(&jobs).filter(|(_, j)| j.0 == i).all(|(c, _)| c.verdict == Some(true)))
        .collect();
    let mut start = ladder.len();
    while start > 0 && cell_ok[start - 1] {
        start -= 1;
    }
    let empirical_threshold = (start < ladder.len()).then(|| Threshold {
        index: start,
        a: format_rational(&ladder[start].a),
        eps: format_rational(&ladder[start].eps),
    });
    Ok(SweepReport {
        formula: format_formula(&strong),
        points: points.iter().map(|(k, v)| (k.clone(), format_rational(v))).collect(),
        cells,
        empirical_threshold,
        disclaimer: DISCLAIMER,
    })
}

/// Parse `a:eps,a:eps,...`.
pub fn parse_ladder(text: &str) -> Result<Vec<SweepCell>> {
    text.split(',')
        .map(|cell| {
            let (a, e) = cell
                .split_once(':')
                .ok_or_else(|| Error::Format(format!("ladder cell {cell:?} is not a:eps")))?;
            SweepCell::new(crate::scalar::parse_rational(a.trim())?, crate::scalar::parse_rational(e.trim())?)
        })
        .collect()
}

/// Whether the ladder cell is strictly beyond `(a0, ε0)`.
pub fn beyond(cell: &SweepCell, a0: &BigRational, eps0: &BigRational) -> bool {
    &cell.a > a0 && &cell.eps < eps0 && !eps0.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::parse_formula;
    use crate::scalar::rat;

    #[test]
    fn trivial_formula_is_true_everywhere() {
        let phi = parse_formula(": x = x").unwrap();
        let ladder = parse_ladder("1:1/2, 2:1/4").unwrap();
        let pts = BTreeMap::from([("x".to_string(), rat(1, 3))]);
        let r = sweep(&phi, &BoundTuple(vec![]), &Entourage::new(rat(1, 10)).unwrap(), &pts, &ladder, &Builder::ALL)
            .unwrap();
        assert!(r.cells.iter().all(|c| c.verdict == Some(true)), "{}", r.to_table());
        assert_eq!(r.empirical_threshold.unwrap().index, 0);
    }

    #[test]
    fn order_failure_direction() {
        // x0 = 1 > y0 = 0 and α < (x0 − y0)/2: every fine cell fails
        let phi = parse_formula("exists z in [-1, 1] : x + z*z = y").unwrap();
        let c2 = BoundTuple(vec![Region::closed(rat(-6, 5), rat(6, 5)).unwrap()]);
        let pts = BTreeMap::from([("x".to_string(), int(1)), ("y".to_string(), int(0))]);
        let ladder = parse_ladder("3:1/10, 3:1/20").unwrap();
        let r = sweep(&phi, &c2, &Entourage::new(rat(2, 5)).unwrap(), &pts, &ladder, &Builder::ALL).unwrap();
        assert!(r.cells.iter().all(|c| c.verdict == Some(false)), "{}", r.to_table());
        assert!(r.empirical_threshold.is_none());
    }

    #[test]
    fn premises_are_checked() {
        let phi = parse_formula("exists z in [-1, 1] : z = z").unwrap();
        let same = phi.bounds().unwrap();
        let w = Entourage::new(rat(1, 10)).unwrap();
        let ladder = parse_ladder("1:1/2").unwrap();
        assert!(matches!(sweep(&phi, &same, &w, &BTreeMap::new(), &ladder, &Builder::ALL), Err(Error::Premise(_))));
        let c2 = BoundTuple(vec![Region::closed(int(-2), int(2)).unwrap()]);
        assert!(sweep(&phi, &c2, &w, &BTreeMap::new(), &[], &Builder::ALL).is_err());
        assert!(parse_ladder("1:1/2, 1").is_err());
    }
}
