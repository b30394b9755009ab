//! Shared oracles for the integration tests. Nothing here calls the
//! evaluator or the embedding index it is meant to check.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

use finapprox::algebra::{
    padic_abs, table_from_fn, AmbientKind, AmbientStructure, ElemId, Entourage, FiniteAlgebra, Region, Term,
};
use finapprox::pbf::oracle::{inverse_holds, order_le_holds, order_lt_holds, Annulus};
use finapprox::pbf::random::{random_formula, RandomFormulaConfig};
use finapprox::pbf::{approximate, check_ll, eval_finite, widen, Atom, Formula, Quantifier};
use finapprox::scalar::rat;

/// Fully expanded formula: quantifiers become explicit conjunctions and
/// disjunctions over the preimages.
#[derive(Debug)]
pub enum Expanded {
    All(Vec<Expanded>),
    Any(Vec<Expanded>),
    Leaf(bool),
}

impl Expanded {
    pub fn value(&self) -> bool {
        match self {
            Expanded::All(v) => v.iter().all(Expanded::value),
            Expanded::Any(v) => v.iter().any(Expanded::value),
            Expanded::Leaf(b) => *b,
        }
    }
}

fn distance(kind: AmbientKind, x: &BigRational, y: &BigRational) -> BigRational {
    match kind {
        AmbientKind::Real => (x - y).abs(),
        AmbientKind::Padic { p } => padic_abs(&(x - y), p),
    }
}

/// Linear scan for the nearest image; real ties go to the smaller
/// magnitude, then the smaller id.
pub fn nearest_linear(alg: &FiniteAlgebra, x: &BigRational) -> ElemId {
    let kind = alg.kind();
    let key = |i: usize| {
        let v = alg.value(i as ElemId);
        let tie = if kind == AmbientKind::Real { v.abs() } else { BigRational::zero() };
        (distance(kind, v, x), tie, i)
    };
    (0..alg.size()).min_by(|&a, &b| key(a).cmp(&key(b))).unwrap() as ElemId
}

pub fn preimage_linear(alg: &FiniteAlgebra, r: &Region) -> Vec<ElemId> {
    (0..alg.size() as ElemId).filter(|&i| r.contains(alg.value(i))).collect()
}

fn eval_term(t: &Term, alg: &FiniteAlgebra, env: &BTreeMap<String, ElemId>) -> ElemId {
    match t {
        Term::Var(v) => env[v],
        Term::Const(c) => nearest_linear(alg, c),
        Term::App(f, args) => {
            let op = alg.op_index(f).unwrap();
            let ids: Vec<ElemId> = args.iter().map(|a| eval_term(a, alg, env)).collect();
            alg.apply(op, &ids)
        }
    }
}

fn atom_holds(a: &Atom, alg: &FiniteAlgebra, env: &BTreeMap<String, ElemId>) -> bool {
    match a {
        Atom::Eq(x, y) => eval_term(x, alg, env) == eval_term(y, alg, env),
        Atom::Close(x, y, w) => {
            let d = distance(alg.kind(), alg.value(eval_term(x, alg, env)), alg.value(eval_term(y, alg, env)));
            match alg.kind() {
                AmbientKind::Real => d < w.epsilon,
                AmbientKind::Padic { .. } => d <= w.epsilon,
            }
        }
    }
}

pub fn expand(phi: &Formula, alg: &FiniteAlgebra, env: &mut BTreeMap<String, ElemId>, level: usize) -> Expanded {
    if level == phi.prefix.len() {
        return Expanded::Any(
            phi.matrix
                .iter()
                .map(|conj| Expanded::All(conj.iter().map(|a| Expanded::Leaf(atom_holds(a, alg, env))).collect()))
                .collect(),
        );
    }
    let b = &phi.prefix[level];
    let dom = preimage_linear(alg, b.bound.as_ref().expect("bounded"));
    let mut branches = Vec::new();
    for e in dom {
        let saved = env.insert(b.var.clone(), e);
        branches.push(expand(phi, alg, env, level + 1));
        match saved {
            Some(s) => env.insert(b.var.clone(), s),
            None => env.remove(&b.var),
        };
    }
    match b.quantifier {
        Quantifier::Forall => Expanded::All(branches),
        Quantifier::Exists => Expanded::Any(branches),
    }
}

pub fn brute_force_eval(phi: &Formula, alg: &FiniteAlgebra, assignment: &BTreeMap<String, ElemId>) -> bool {
    let mut env = assignment.clone();
    expand(phi, alg, &mut env, 0).value()
}

/// A carrier of at most `max_size` points with arbitrary `+` and `*`
/// tables. Real values are quarters in `[-3, 3]`; 2-adic values are
/// `k / 2^j`.
pub fn random_algebra<R: Rng>(rng: &mut R, max_size: usize, padic: bool) -> FiniteAlgebra {
    let n = rng.gen_range(1..=max_size);
    let (kind, values): (AmbientKind, Vec<BigRational>) = if padic {
        let v = (0..n).map(|_| rat(rng.gen_range(-8..=8), 1 << rng.gen_range(0..=2))).collect();
        (AmbientKind::Padic { p: 2 }, v)
    } else {
        (AmbientKind::Real, (0..n).map(|_| rat(rng.gen_range(-12..=12), 4)).collect())
    };
    let add: Vec<ElemId> = (0..n * n).map(|_| rng.gen_range(0..n) as ElemId).collect();
    let mul: Vec<ElemId> = (0..n * n).map(|_| rng.gen_range(0..n) as ElemId).collect();
    let tables = vec![
        table_from_fn(n, 2, move |a| add[a[0] as usize * n + a[1] as usize]),
        table_from_fn(n, 2, move |a| mul[a[0] as usize * n + a[1] as usize]),
    ];
    FiniteAlgebra::new("random", Arc::new(AmbientStructure::field(kind)), n, tables, values).unwrap()
}

/// A random bounded formula over free `x`, `y` suited to `alg`'s kind.
pub fn random_instance<R: Rng>(rng: &mut R, alg: &FiniteAlgebra, cfg: &RandomFormulaConfig) -> Formula {
    let mut phi = random_formula(rng, cfg);
    if let AmbientKind::Padic { p } = alg.kind() {
        for b in &mut phi.prefix {
            b.bound = Some(Region::ball(p, rng.gen_range(-1..=2)).unwrap());
        }
    }
    phi
}

pub fn random_assignment<R: Rng>(rng: &mut R, phi: &Formula, alg: &FiniteAlgebra) -> BTreeMap<String, ElemId> {
    phi.free_vars().into_iter().map(|v| (v, rng.gen_range(0..alg.size()) as ElemId)).collect()
}

pub fn formula_config(equalities: bool) -> RandomFormulaConfig {
    RandomFormulaConfig { max_term_depth: 2, equalities, ..Default::default() }
}

/// Multiply every closeness radius by `t`.
pub fn scale_entourages(phi: &Formula, t: &BigRational) -> Formula {
    let matrix = phi
        .matrix
        .iter()
        .map(|conj| {
            conj.iter()
                .map(|a| match a {
                    Atom::Close(x, y, w) => Atom::Close(x.clone(), y.clone(), Entourage::new(&w.epsilon * t).unwrap()),
                    other => other.clone(),
                })
                .collect()
        })
        .collect();
    Formula::new(phi.prefix.clone(), matrix).unwrap()
}

fn eval(phi: &Formula, alg: &FiniteAlgebra, env: &BTreeMap<String, ElemId>) -> bool {
    eval_finite(phi, alg, env).unwrap().value
}

/// One instance per call: `Some(true)` when monotonicity held,
/// `Some(false)` on a violation, `None` when the draw was unusable.
pub fn monotone_in_eps<R: Rng>(rng: &mut R) -> Option<bool> {
    let padic = rng.gen_bool(0.2);
    let alg = random_algebra(rng, 8, padic);
    let phi = random_instance(rng, &alg, &formula_config(true));
    let w = Entourage::new(rat(rng.gen_range(1..=8), 4)).unwrap();
    let coarse = approximate(&phi, &w);
    let fine = scale_entourages(&coarse, &rat(rng.gen_range(1..=8), 8));
    let env = random_assignment(rng, &phi, &alg);
    Some(!eval(&fine, &alg, &env) || eval(&coarse, &alg, &env))
}

pub fn monotone_in_bounds<R: Rng>(rng: &mut R) -> Option<bool> {
    let alg = random_algebra(rng, 8, false);
    let phi = random_instance(rng, &alg, &formula_config(true));
    let c = phi.bounds()?;
    let wider = widen(&phi, &c, &rat(1, 1 << rng.gen_range(1..=4))).ok()?;
    if !check_ll(&phi, &c, &wider).unwrap() {
        return Some(false);
    }
    let env = random_assignment(rng, &phi, &alg);
    let phi2 = phi.with_bounds(&wider).unwrap();
    Some(!eval(&phi, &alg, &env) || eval(&phi2, &alg, &env))
}

pub fn positivity<R: Rng>(rng: &mut R) -> Option<bool> {
    let padic = rng.gen_bool(0.2);
    let alg = random_algebra(rng, 8, padic);
    let phi = random_instance(rng, &alg, &formula_config(true));
    let w = Entourage::new(rat(rng.gen_range(1..=16), 16)).unwrap();
    let env = random_assignment(rng, &phi, &alg);
    Some(!eval(&phi, &alg, &env) || eval(&approximate(&phi, &w), &alg, &env))
}

/// Truth under the closed-form oracles survives `c ≪ c'` (∀-ranges shrink,
/// ∃-ranges grow).
pub fn monotone_over_reals<R: Rng>(rng: &mut R) -> Option<bool> {
    let kind = rng.gen_range(0..3);
    let mut r = |lo: i64, hi: i64| rat(rng.gen_range(lo..=hi), 16);
    Some(match kind {
        0 => {
            let (c, b) = (Annulus::new(r(1, 16), r(17, 64)).ok()?, Annulus::new(r(1, 16), r(17, 64)).ok()?);
            let c2 = Annulus::new(&c.lo + r(1, 4), &c.hi - r(1, 4)).ok()?;
            let b2 = Annulus::new(&b.lo - r(1, 4), &b.hi + r(1, 4)).ok()?;
            let delta = r(0, 8);
            !inverse_holds(&c, &b, &delta) || inverse_holds(&c2, &b2, &delta)
        }
        k => {
            let (x, y, c, alpha) = (r(-32, 32), r(-32, 32), r(1, 32), r(0, 16));
            let c2 = &c + r(1, 16);
            let f = if k == 1 { order_le_holds } else { order_lt_holds };
            !f(&x, &y, &c, &alpha) || f(&x, &y, &c2, &alpha)
        }
    })
}

/// Run `clause` until `n` usable instances; returns the violation count.
pub fn count_violations<R: Rng>(rng: &mut R, n: usize, clause: fn(&mut R) -> Option<bool>) -> usize {
    let mut done = 0;
    let mut bad = 0;
    while done < n {
        if let Some(ok) = clause(rng) {
            done += 1;
            bad += usize::from(!ok);
        }
    }
    bad
}

/// Instances where `eval_finite` and the expansion oracle disagree, out of
/// `n` random small ones (carrier ≤ 12, prefix ≤ 3).
pub fn evaluator_disagreements<R: Rng>(rng: &mut R, n: usize) -> usize {
    let mut bad = 0;
    for _ in 0..n {
        let (padic, equalities) = (rng.gen_bool(0.25), rng.gen_bool(0.5));
        let alg = random_algebra(rng, 12, padic);
        let phi = random_instance(rng, &alg, &formula_config(equalities));
        let env = random_assignment(rng, &phi, &alg);
        if eval(&phi, &alg, &env) != brute_force_eval(&phi, &alg, &env) {
            bad += 1;
        }
    }
    bad
}
