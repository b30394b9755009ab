//! Per-family, per-cell probe table with a non-ring control.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::rings::{build_ring, FiniteRing, RingFamily};
use super::search::{best_embedding_error, EmbeddingResult, SearchConfig};
use crate::algebra::{grid_algebra, AmbientKind, AmbientStructure, Grid};
use crate::error::{Error, Result};
use crate::pbf::SweepCell;
use crate::scalar::{format_rational, int, to_f64};

pub const REPORT_HEADER: &str = "evidence only: each cell searches grid-valued embeddings of the listed rings; \
the claim concerns every finite ring and every embedding, which no finite search covers";

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub family: String,
    pub a: String,
    pub eps: String,
    /// The member with the smallest error, if any member was feasible.
    pub best: Option<EmbeddingResult>,
    /// Members too small to form an `(a, ε)`-grid.
    pub infeasible: Vec<String>,
    pub members: Vec<EmbeddingResult>,
    #[serde(skip)]
    pub best_error: Option<BigRational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlRow {
    pub a: String,
    pub eps: String,
    pub carrier_size: usize,
    pub normalized_error: String,
    #[serde(skip)]
    pub error: BigRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub header: &'static str,
    pub resolution: u32,
    pub seed: u64,
    pub rows: Vec<ProbeRow>,
    pub control: Vec<ControlRow>,
    /// Per family: whether the best normalized `⊗` error never decreases
    /// along the ladder (over cells where some member was feasible).
    pub mul_error_nondecreasing: Vec<(String, bool)>,
}

impl ProbeReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("# {}\n", self.header);
        out.push_str(&format!(
            "{:<16} {:>4} {:>6} {:<14} {:>10} {:>10} {:>10}\n",
            "family", "a", "eps", "best ring", "error/eps", "add/eps", "mul/eps"
        ));
        for r in &self.rows {
            match &r.best {
                Some(b) => out.push_str(&format!(
                    "{:<16} {:>4} {:>6} {:<14} {:>10.4} {:>10.4} {:>10.4}\n",
                    r.family,
                    r.a,
                    r.eps,
                    b.ring,
                    to_f64(&b.error),
                    to_f64(&b.add),
                    to_f64(&b.mul)
                )),
                None => out.push_str(&format!("{:<16} {:>4} {:>6} infeasible (all members too small)\n", r.family, r.a, r.eps)),
            }
        }
        for c in &self.control {
            out.push_str(&format!(
                "{:<16} {:>4} {:>6} {:<14} {:>10.4}\n",
                "control", c.a, c.eps, format!("grid n={}", c.carrier_size), to_f64(&c.error)
            ));
        }
        for (f, ok) in &self.mul_error_nondecreasing {
            out.push_str(&format!("{f}: mul error non-decreasing along the ladder: {ok}\n"));
        }
        out
    }
}

/// The step-`ε/2` grid on `[−a, a]` with nearest rounding, scored like the
/// rings: worst error over pairs whose exact results stay in `[−a, a]`.
pub fn control_error(a: &BigRational, eps: &BigRational) -> Result<ControlRow> {
    let step = eps / int(2);
    let k = num_traits::ToPrimitive::to_i64(&(a / &step).floor().to_integer())
        .ok_or_else(|| Error::invalid("control grid too large"))?;
    let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
    let alg = grid_algebra(amb, Grid::new(step, -k, k)?, eps)?;
    let n = alg.size() as u32;
    let mut worst = BigRational::zero();
    for x in 0..n {
        for y in 0..n {
            let (vx, vy) = (alg.value(x), alg.value(y));
            for (op, exact) in [(0, vx + vy), (1, vx * vy)] {
                if num_traits::Signed::abs(&exact) <= *a {
                    let d = num_traits::Signed::abs(&(alg.value(alg.binary(op, x, y)) - &exact));
                    worst = worst.max(d);
                }
            }
        }
    }
    let error = worst / eps;
    Ok(ControlRow {
        a: format_rational(a),
        eps: format_rational(eps),
        carrier_size: alg.size(),
        normalized_error: format_rational(&error),
        error,
    })
}

/// Probe every family at every ladder cell.
pub fn probe_report(families: &[RingFamily], ladder: &[SweepCell], cfg: &SearchConfig, max_order: usize) -> Result<ProbeReport> {
    let rings: Vec<Vec<FiniteRing>> = families
        .iter()
        .map(|f| f.members.iter().map(|s| build_ring(s, max_order)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, usize)> = rings
        .iter()
        .enumerate()
        .flat_map(|(f, rs)| (0..ladder.len()).flat_map(move |c| (0..rs.len()).map(move |m| (f, c, m))))
        .collect();
    let outcomes: Vec<Result<EmbeddingResult>> = jobs
        .par_iter()
        .map(|&(f, c, m)| best_embedding_error(&rings[f][m], &ladder[c].a, &ladder[c].eps, cfg))
        .collect();
    let mut rows = Vec::new();
    for (f, fam) in families.iter().enumerate() {
        for (c, cell) in ladder.iter().enumerate() {
            let mut members = Vec::new();
            let mut infeasible = Vec::new();
            for (job, out) in jobs.iter().zip(&outcomes) {
                if job.0 != f || job.1 != c {
                    continue;
                }
                match out {
                    Ok(r) => members.push(r.clone()),
                    Err(Error::Premise(_)) => infeasible.push(rings[f][job.2].name.clone()),
                    Err(e) => return Err(e.clone()),
                }
            }
            let best = members.iter().min_by(|x, y| x.error.cmp(&y.error)).cloned();
            rows.push(ProbeRow {
                family: fam.name.clone(),
                a: format_rational(&cell.a),
                eps: format_rational(&cell.eps),
                best_error: best.as_ref().map(|b| b.error.clone()),
                best,
                infeasible,
                members,
            });
        }
    }
    let control = ladder.par_iter().map(|c| control_error(&c.a, &c.eps)).collect::<Result<Vec<_>>>()?;
    let mul_error_nondecreasing = families
        .iter()
        .map(|fam| {
            let muls: Vec<&BigRational> =
                rows.iter().filter(|r| r.family == fam.name).filter_map(|r| r.best.as_ref().map(|b| &b.mul)).collect();
            (fam.name.clone(), muls.windows(2).all(|w| w[0] <= w[1]))
        })
        .collect();
    Ok(ProbeReport { header: REPORT_HEADER, resolution: cfg.resolution, seed: cfg.seed, rows, control, mul_error_nondecreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn control_is_an_approximation() {
        for e in [rat(1, 2), rat(1, 4), rat(1, 8)] {
            let c = control_error(&int(2), &e).unwrap();
            assert!(c.error <= int(1), "{}", c.normalized_error);
        }
    }

    #[test]
    fn empty_family_list_gives_empty_table() {
        let ladder = vec![SweepCell::new(int(2), rat(1, 2)).unwrap()];
        let r = probe_report(&[], &ladder, &SearchConfig::default(), 64).unwrap();
        assert!(r.rows.is_empty());
    }
}
