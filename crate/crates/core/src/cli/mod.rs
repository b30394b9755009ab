//! The `finapprox` command line. Exit codes: 0 when the checked property
//! holds, 1 when it is refuted (with a witness), 2 on usage or I/O errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Signed;
use serde_json::json;

use crate::algebra::io::{algebra_from_json, algebra_to_json};
use crate::algebra::{
    canonical_approximation, check_approximation, law_search, law_violated_at, AmbientKind, AmbientStructure,
    ApproximationReport, ElemId, Entourage, FiniteAlgebra, Law, Region,
};
use crate::error::{Error, Result};
use crate::padic::{build_hmn, build_kn, HmnParams};
use crate::pbf::{
    approximate, beyond, eval_finite, format_formula, parse_formula, parse_ladder, parse_region, sweep, Builder,
    BoundTuple,
};
use crate::probe::{build_ring, probe_report, RingFamily, SearchConfig};
use crate::real::{build_apq, build_modular, sufficient_params_order, FPParams, ModularParams};
use crate::repro::linsys::repro_linsys;
use crate::repro::poly::{repro_poly, PolyConfig};
use crate::repro::presets::{default_threshold_points, inverse_setup, order_le_setup, order_lt_threshold, SweepSetup};
use crate::scalar::{format_rational, int, parse_rational, pow10_rat, rat};

#[derive(Debug, Parser)]
#[command(name = "finapprox", version, about = "Finite approximations of R and Q_p")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    pub format: Format,
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether an algebra is a (C, W)-approximation.
    Check(CheckArgs),
    /// Search an algebra for a violation of an algebraic law.
    Laws(LawsArgs),
    /// Evaluate a positive bounded formula over a finite algebra.
    Eval(EvalArgs),
    /// Evaluate a strong approximation over a ladder of algebras.
    Sweep(SweepArgs),
    /// Search for ring embeddings that approximate R.
    Probe(ProbeArgs),
    /// Reproduce the worked experiments.
    #[command(subcommand)]
    Repro(ReproCommand),
    /// Write an algebra in the JSON file format.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuilderKind {
    Kn,
    Hmn,
    Apq,
    Modular,
    Canonical,
}

#[derive(Debug, Clone, Args)]
pub struct AlgebraArgs {
    #[arg(long, value_enum, conflicts_with = "file")]
    pub builder: Option<BuilderKind>,
    /// An algebra in the JSON file format.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long = "P")]
    pub big_p: Option<u32>,
    #[arg(long = "Q")]
    pub big_q: Option<u32>,
    #[arg(long = "M")]
    pub big_m: Option<u64>,
    /// Entourage radius; also the modular spacing.
    #[arg(long)]
    pub eps: Option<String>,
    /// Grid step of the canonical builder (default eps/2).
    #[arg(long)]
    pub step: Option<String>,
    /// `C = [lo, hi]`.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// `C` = the p-adic ball of radius `p^m`.
    #[arg(long, allow_hyphen_values = true)]
    pub ball: Option<i64>,
    /// `C` in formula-bound syntax, e.g. `[-1, 1] | (2, 3)`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub alg: AlgebraArgs,
}

#[derive(Debug, Args)]
pub struct LawsArgs {
    #[command(flatten)]
    pub alg: AlgebraArgs,
    /// assoc-add, assoc-mul, comm-add, comm-mul, cancel-add, cancel-mul, distrib
    #[arg(long)]
    pub law: String,
    /// Check the law at these embedded values instead of searching.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub at: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalPreset {
    /// The strict-order threshold table.
    OrderLt,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub alg: AlgebraArgs,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "preset")]
    pub formula: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<EvalPreset>,
    /// Free-variable values, `x=1/2`; each is mapped to the nearest element.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub assign: Vec<String>,
    /// Evaluate `φ[W]` with this entourage radius instead of `φ`.
    #[arg(long)]
    pub approx: Option<String>,
    /// Preset order-lt: interval bound.
    #[arg(long, default_value = "10")]
    pub a: String,
    /// Preset order-lt: the bound on `|z|`.
    #[arg(long, default_value = "2")]
    pub c: String,
    #[arg(long, default_value = "1/2")]
    pub alpha: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepPreset {
    /// Inverses on an annulus.
    Inverse,
    /// The non-strict order encoding at one point.
    OrderLe,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true, conflicts_with = "preset")]
    pub formula: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<SweepPreset>,
    /// The wider bounds `c'`, one region per quantifier, separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<String>,
    /// The entourage radius of `W'`.
    #[arg(long)]
    pub w2: Option<String>,
    /// Free-variable points, `x=1/2`.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub point: Vec<String>,
    /// `a:eps,a:eps,...`, coarse to fine.
    #[arg(long)]
    pub ladder: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "canonical,apq,modular")]
    pub builders: Vec<String>,
    /// Preset inverse: the outer radius of the witness annulus.
    #[arg(long, default_value = "2")]
    pub b: String,
    /// Preset inverse: the closeness radius.
    #[arg(long, default_value = "1/10")]
    pub delta: String,
    /// Preset order-le: the point and the closeness radius.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub x: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1/2")]
    pub y: String,
    #[arg(long, default_value = "2/5")]
    pub alpha: String,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// zn:LO..HI, zn:N, prod:N,M,.., gf:P:K, ut:P (repeatable).
    #[arg(long = "family", default_value = "zn:5..40")]
    pub families: Vec<String>,
    #[arg(long, default_value = "2:1/2,2:1/4,2:1/8")]
    pub ladder: String,
    /// Images lie on the grid of step eps/resolution.
    #[arg(long, default_value_t = 1)]
    pub resolution: u32,
    #[arg(long, default_value_t = 20_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 512)]
    pub max_order: usize,
    /// Write each family's best embedding per cell as algebra files here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ReproCommand {
    /// Solve the truncated cube-root system at several precisions.
    Linsys(LinsysArgs),
    /// Polynomial approximation of a built-in function.
    Poly(PolyArgs),
}

#[derive(Debug, Args)]
pub struct LinsysArgs {
    #[arg(long = "Q", value_delimiter = ',', default_value = "5,10")]
    pub q: Vec<u32>,
    /// Exponent bound of the decimal arithmetic.
    #[arg(long = "P", default_value_t = 10)]
    pub p: u32,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    /// sin, square or recip.
    #[arg(long, default_value = "sin")]
    pub g: String,
    /// `b0,b1,...` (defaults per built-in).
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub coefficients: Option<Vec<String>>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long = "d-prime")]
    pub d_prime: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long = "delta-prime")]
    pub delta_prime: Option<String>,
    #[arg(long)]
    pub ladder: Option<String>,
    #[arg(long)]
    pub xi_samples: Option<usize>,
    #[arg(long)]
    pub perturbations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub alg: AlgebraArgs,
}

/// What a command produced: the report and its verdict.
struct Outcome {
    json: serde_json::Value,
    table: String,
    holds: bool,
}

fn q(text: &str) -> Result<BigRational> {
    parse_rational(text.trim())
}

fn need<T: Clone>(v: &Option<T>, flag: &str, builder: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::invalid(format!("--builder {builder} needs --{flag}")))
}

impl AlgebraArgs {
    fn build(&self) -> Result<FiniteAlgebra> {
        if let Some(path) = &self.file {
            let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            return algebra_from_json(&text);
        }
        let Some(b) = self.builder else {
            return Err(Error::invalid("give --builder or --file"));
        };
        match b {
            BuilderKind::Kn => build_kn(need(&self.p, "p", "kn")?, need(&self.n, "n", "kn")?),
            BuilderKind::Hmn => {
                build_hmn(&HmnParams::new(need(&self.p, "p", "hmn")?, need(&self.m, "m", "hmn")?, need(&self.n, "n", "hmn")?)?)
            }
            BuilderKind::Apq => build_apq(&FPParams::new(need(&self.big_p, "P", "apq")?, need(&self.big_q, "Q", "apq")?)?),
            BuilderKind::Modular => {
                let eps = q(&need(&self.eps, "eps", "modular")?)?;
                build_modular(&ModularParams::new(need(&self.big_m, "M", "modular")?, eps)?)
            }
            BuilderKind::Canonical => {
                let eps = q(&need(&self.eps, "eps", "canonical")?)?;
                let step = match &self.step {
                    Some(s) => q(s)?,
                    None => &eps / int(2),
                };
                let c = self.region()?.ok_or_else(|| Error::invalid("--builder canonical needs --interval or --region"))?;
                let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
                canonical_approximation(amb, &c, &Entourage::new(eps)?, &step)
            }
        }
    }

    fn region(&self) -> Result<Option<Region>> {
        if let Some(text) = &self.region {
            return Ok(Some(parse_region(text)?));
        }
        if let Some(text) = &self.interval {
            let (lo, hi) =
                text.split_once(',').ok_or_else(|| Error::invalid(format!("--interval {text:?} is not lo,hi")))?;
            return Ok(Some(Region::closed(q(lo)?, q(hi)?)?));
        }
        if let Some(m) = self.ball {
            let p = self.p.ok_or_else(|| Error::invalid("--ball needs --p"))?;
            return Ok(Some(Region::ball(p, m)?));
        }
        Ok(None)
    }

    /// `C` and `W`, defaulting to the region and precision the builder was
    /// made for.
    fn target(&self, alg: &FiniteAlgebra) -> Result<(Region, Entourage)> {
        let region = match self.region()? {
            Some(r) => r,
            None => match self.builder {
                Some(BuilderKind::Kn) => Region::ball(self.p.unwrap_or(2), 0)?,
                Some(BuilderKind::Hmn) => Region::ball(self.p.unwrap_or(2), self.m.unwrap_or(0) as i64)?,
                Some(BuilderKind::Modular) => {
                    let top = alg.embedding().values().iter().max().cloned().unwrap_or_else(|| int(0));
                    Region::closed(-top.clone(), top)?
                }
                _ => return Err(Error::invalid("give the region with --interval, --ball or --region")),
            },
        };
        let eps = match (&self.eps, self.builder) {
            (Some(e), _) => q(e)?,
            (None, Some(BuilderKind::Kn | BuilderKind::Hmn)) => {
                let p = self.p.unwrap_or(2);
                let n = self.n.unwrap_or(1) as i64;
                crate::scalar::pow_rat(p, -n)
            }
            _ => return Err(Error::invalid("give the entourage with --eps")),
        };
        Ok((region, Entourage::new(eps)?))
    }
}

fn check_table(r: &ApproximationReport) -> String {
    let mut out = format!(
        "algebra: {}\nregion: {}\nepsilon: {}\ngrid: {}\nhomomorphism: {} ({} tuples checked, {} violations)\n",
        r.algebra,
        r.region,
        r.epsilon,
        if r.grid_ok { "ok" } else { "fails" },
        if r.hom_ok { "ok" } else { "fails" },
        r.tuples_checked,
        r.violation_count
    );
    if let Some(w) = &r.grid_witness {
        out.push_str(&format!("uncovered point: {w}\n"));
    }
    for v in &r.hom_violations {
        out.push_str(&format!(
            "  {}{:?}: table {} vs exact {} (distance {})\n",
            v.symbol, v.args, v.table_result, v.embedded_result, v.distance
        ));
    }
    out.push_str(if r.ok() { "verdict: approximation\n" } else { "verdict: not an approximation\n" });
    out
}

fn cmd_check(a: &CheckArgs) -> Result<Outcome> {
    let alg = a.alg.build()?;
    let (c, w) = a.alg.target(&alg)?;
    let r = check_approximation(&alg, &c, &w)?;
    Ok(Outcome { json: serde_json::to_value(&r).unwrap(), table: check_table(&r), holds: r.ok() })
}

fn element_at(alg: &FiniteAlgebra, text: &str) -> Result<ElemId> {
    let v = q(text)?;
    alg.embedding()
        .nearest(&v)
        .filter(|&id| alg.value(id) == &v)
        .ok_or_else(|| Error::invalid(format!("{text} is not an element of {}", alg.label())))
}

fn cmd_laws(a: &LawsArgs) -> Result<Outcome> {
    let alg = a.alg.build()?;
    let law: Law = a.law.parse()?;
    let (witness, how) = match &a.at {
        Some(vals) => {
            let ids = vals.iter().map(|v| element_at(&alg, v)).collect::<Result<Vec<_>>>()?;
            (law_violated_at(&alg, &law, &ids)?, "at the given tuple")
        }
        None => (law_search(&alg, &law, a.alg.region()?.as_ref())?, "exhaustive"),
    };
    let table = match &witness {
        Some(w) => format!("{}: {w}\n", alg.label()),
        None => format!("{}: {law} holds ({how})\n", alg.label()),
    };
    Ok(Outcome {
        json: json!({ "algebra": alg.label(), "law": law.to_string(), "mode": how, "witness": witness }),
        table,
        holds: witness.is_none(),
    })
}

fn parse_assignments(items: &[String]) -> Result<BTreeMap<String, BigRational>> {
    items
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| Error::invalid(format!("{s:?} is not name=value")))?;
            Ok((k.trim().to_string(), q(v)?))
        })
        .collect()
}

fn cmd_eval(a: &EvalArgs) -> Result<Outcome> {
    if a.preset == Some(EvalPreset::OrderLt) {
        let eps = match &a.alg.eps {
            Some(e) => q(e)?,
            None => rat(1, 1000),
        };
        let (c, alpha, bound) = (q(&a.c)?, q(&a.alpha)?, q(&a.a)?);
        let r = order_lt_threshold(&c, &alpha, &bound, &eps, &default_threshold_points(&c, &alpha))?;
        return Ok(Outcome { json: r.to_json(), table: r.to_table(), holds: r.disagreements == 0 });
    }
    let text = a.formula.as_ref().ok_or_else(|| Error::invalid("give --formula or --preset"))?;
    let mut phi = parse_formula(text)?;
    if let Some(w) = &a.approx {
        phi = approximate(&phi, &Entourage::new(q(w)?)?);
    }
    let alg = a.alg.build()?;
    let points = parse_assignments(&a.assign)?;
    let mut ids = BTreeMap::new();
    for v in phi.free_vars() {
        let x = points.get(&v).ok_or_else(|| Error::invalid(format!("no value for free variable {v:?} (use --assign)")))?;
        ids.insert(v, alg.embedding().nearest(x).ok_or(Error::EmptyCarrier)?);
    }
    let out = eval_finite(&phi, &alg, &ids)?;
    let mut table = format!("{}\nover {}\n", format_formula(&phi), alg.label());
    for (v, id) in &ids {
        table.push_str(&format!("{v} = {}\n", format_rational(alg.value(*id))));
    }
    for t in &out.trace {
        table.push_str(&format!("  {} {} = {}\n", t.quantifier, t.var, t.value));
    }
    table.push_str(&format!("value: {}\n", out.value));
    let json = json!({
        "formula": format_formula(&phi),
        "algebra": alg.label(),
        "assignment": ids.iter().map(|(k, id)| (k.clone(), format_rational(alg.value(*id)))).collect::<BTreeMap<_, _>>(),
        "outcome": out,
    });
    Ok(Outcome { json, table, holds: out.value })
}

fn parse_bounds(text: &str) -> Result<BoundTuple> {
    Ok(BoundTuple(text.split(';').map(|r| parse_region(r.trim())).collect::<Result<Vec<_>, _>>()?))
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome> {
    let builders = a.builders.iter().map(|b| b.trim().parse()).collect::<Result<Vec<Builder>>>()?;
    let mut params: Option<(BigRational, BigRational)> = None;
    let setup = match a.preset {
        Some(SweepPreset::Inverse) => {
            let (s, p) = inverse_setup(&q(&a.b)?, &q(&a.delta)?)?;
            params = Some((p.a0.upper(), p.eps0.lower()));
            s
        }
        Some(SweepPreset::OrderLe) => {
            let (x, y, alpha) = (q(&a.x)?, q(&a.y)?, q(&a.alpha)?);
            let s = order_le_setup(&x, &y, &alpha)?;
            let d = x.clone().abs().max(y.clone().abs());
            params = Some(sufficient_params_order(&int(1), &rat(6, 5), &alpha, &d)?);
            s
        }
        None => {
            let text = a.formula.as_ref().ok_or_else(|| Error::invalid("give --formula or --preset"))?;
            let phi = parse_formula(text)?;
            let c2 = parse_bounds(a.c2.as_ref().ok_or_else(|| Error::invalid("--formula needs --c2"))?)?;
            let w2 = Entourage::new(q(a.w2.as_ref().ok_or_else(|| Error::invalid("--formula needs --w2"))?)?)?;
            let ladder = parse_ladder(a.ladder.as_ref().ok_or_else(|| Error::invalid("--formula needs --ladder"))?)?;
            SweepSetup { name: "custom", phi, c2, w2, points: parse_assignments(&a.point)?, ladder }
        }
    };
    let ladder = match (&a.ladder, a.preset) {
        (Some(l), Some(_)) => parse_ladder(l)?,
        _ => setup.ladder.clone(),
    };
    let r = sweep(&setup.phi, &setup.c2, &setup.w2, &setup.points, &ladder, &builders)?;
    let mut table = r.to_table();
    let mut json = r.to_json();
    let holds = match &params {
        Some((a0, eps0)) => {
            let beyond_cells: Vec<usize> = (0..ladder.len()).filter(|&i| beyond(&ladder[i], a0, eps0)).collect();
            let tail_true = beyond_cells
                .iter()
                .all(|&i| r.cells.iter().filter(|c| c.a == format_rational(&ladder[i].a) && c.eps == format_rational(&ladder[i].eps)).all(|c| c.verdict == Some(true)));
            table.push_str(&format!(
                "sufficient (a0, eps0) = ({:.6}, {:.6}); {} cells beyond it, all true: {tail_true}\n",
                crate::scalar::to_f64(a0),
                crate::scalar::to_f64(eps0),
                beyond_cells.len()
            ));
            json["sufficient"] = json!({ "a0": format_rational(a0), "eps0": format_rational(eps0), "cells_beyond": beyond_cells, "all_true": tail_true });
            tail_true
        }
        None => r.empirical_threshold.is_some(),
    };
    Ok(Outcome { json, table, holds })
}

fn cmd_probe(a: &ProbeArgs, seed: u64) -> Result<Outcome> {
    let families = a.families.iter().map(|f| f.parse()).collect::<Result<Vec<RingFamily>>>()?;
    let ladder = parse_ladder(&a.ladder)?;
    let cfg = SearchConfig {
        resolution: a.resolution,
        iterations: a.iterations,
        restarts: a.restarts,
        seed,
        ..Default::default()
    };
    let r = probe_report(&families, &ladder, &cfg, a.max_order)?;
    if let Some(dir) = &a.dump {
        fs::create_dir_all(dir).map_err(|e| Error::Format(format!("{}: {e}", dir.display())))?;
        for (i, row) in r.rows.iter().enumerate() {
            if let Some(best) = &row.best {
                let spec = families
                    .iter()
                    .flat_map(|f| &f.members)
                    .find(|s| s.to_string() == best.ring)
                    .expect("best ring comes from a family");
                let alg = build_ring(spec, a.max_order)?.with_embedding(best.values.clone())?;
                let path = dir.join(format!("cell{i}.json"));
                fs::write(&path, algebra_to_json(&alg)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            }
        }
    }
    let one = int(1);
    let rings_fail = r.rows.iter().all(|row| row.best_error.as_ref().is_none_or(|e| e > &one));
    let control_ok = r.control.iter().all(|c| c.error <= one);
    Ok(Outcome { json: r.to_json(), table: r.to_table(), holds: rings_fail && control_ok })
}

fn cmd_linsys(a: &LinsysArgs) -> Result<Outcome> {
    let r = repro_linsys(&a.q, a.p)?;
    let residual_ok = r.rows.iter().all(|row| {
        row.residual_upper
            .as_ref()
            .and_then(|s| parse_rational(s).ok())
            .is_some_and(|v| v <= pow10_rat(1 - row.q as i64))
    });
    let far = !r.distances.is_empty() && r.distances.iter().all(|d| d.2 > 1.0);
    Ok(Outcome { json: r.to_json(), table: r.to_table(), holds: residual_ok && far })
}

fn cmd_poly(a: &PolyArgs, seed: u64) -> Result<Outcome> {
    let mut cfg = PolyConfig::builtin(&a.g)?;
    if let Some(cs) = &a.coefficients {
        cfg.coefficients = cs.iter().map(|c| q(c)).collect::<Result<_>>()?;
    }
    let set = |slot: &mut BigRational, v: &Option<String>| -> Result<()> {
        if let Some(v) = v {
            *slot = q(v)?;
        }
        Ok(())
    };
    set(&mut cfg.d, &a.d)?;
    set(&mut cfg.d_prime, &a.d_prime)?;
    set(&mut cfg.delta, &a.delta)?;
    set(&mut cfg.delta_prime, &a.delta_prime)?;
    if let Some(l) = &a.ladder {
        cfg.ladder = parse_ladder(l)?;
    }
    if let Some(n) = a.xi_samples {
        cfg.xi_samples = n;
    }
    if let Some(n) = a.perturbations {
        cfg.perturbations = n;
    }
    cfg.seed = seed;
    let r = repro_poly(&cfg)?;
    let holds = r.found.is_some();
    Ok(Outcome { json: r.to_json(), table: r.to_table(), holds })
}

fn cmd_export(a: &ExportArgs) -> Result<Outcome> {
    let alg = a.alg.build()?;
    let text = algebra_to_json(&alg)?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Outcome { json, table: text, holds: true })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Laws(a) => cmd_laws(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Probe(a) => cmd_probe(a, cli.seed),
        Command::Repro(ReproCommand::Linsys(a)) => cmd_linsys(a),
        Command::Repro(ReproCommand::Poly(a)) => cmd_poly(a, cli.seed),
        Command::Export(a) => cmd_export(a),
    }
}

/// Run with explicit arguments, writing the report to `stdout` (or
/// `--out`) and diagnostics to `stderr`; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("json") + "\n",
                Format::Table => out.table,
            };
            let written = match &cli.out {
                Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            if out.holds {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["finapprox"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn check_kn() {
        let (code, out, _) = go(&["check", "--builder", "kn", "--p", "2", "--n", "3", "--ball", "0", "--eps", "1/8"]);
        assert_eq!(code, 0, "{out}");
    }

    #[test]
    fn check_modular() {
        let (code, out, _) = go(&["check", "--builder", "modular", "--M", "20", "--eps", "1/10", "--interval", "-2,2"]);
        assert_eq!(code, 0, "{out}");
    }

    #[test]
    fn laws_examples() {
        let (code, out, _) = go(&["laws", "--builder", "modular", "--M", "10", "--eps", "1/4", "--law", "comm-add"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("holds"));
        let (code, out, _) =
            go(&["laws", "--builder", "apq", "--P", "1", "--Q", "4", "--law", "cancel-add", "--at", "0.6006,0.6006,0.6005"]);
        assert_eq!(code, 1, "{out}");
        assert!(out.contains("1201/1000"), "{out}");
        let (code, out, _) =
            go(&["laws", "--builder", "hmn", "--p", "2", "--m", "1", "--n", "2", "--law", "assoc-mul", "--at", "1/2,1/2,2"]);
        assert_eq!(code, 1, "{out}");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(go(&["check", "--builder", "kn", "--p", "2"]).0, 2);
        assert_eq!(go(&["nonsense"]).0, 2);
        let (code, _, err) = go(&["eval", "--formula", "forall x in [0, 1 : x = x", "--builder", "kn", "--p", "2", "--n", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("column") || err.contains("position") || err.contains("at "), "{err}");
    }

    #[test]
    fn eval_and_json() {
        let (code, out, _) = go(&[
            "--format", "json", "eval", "--formula", "exists y in [-1, 1] : x + y = 0", "--builder", "canonical",
            "--interval", "-2,2", "--eps", "1/4", "--assign", "x=1/2",
        ]);
        assert_eq!(code, 0, "{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["outcome"]["value"], true);
    }

    #[test]
    fn export_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.json");
        let p = path.to_str().unwrap();
        assert_eq!(go(&["--out", p, "export", "--builder", "kn", "--p", "3", "--n", "2"]).0, 0);
        let (code, out, _) = go(&["check", "--file", p, "--ball", "0", "--p", "3", "--eps", "1/9"]);
        assert_eq!(code, 0, "{out}");
    }
}
