//! Exhaustive evaluation of bounded formulas over finite algebras.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::ast::{Atom, Formula, Quantifier};
use crate::algebra::{Closeness, ElemId, FiniteAlgebra, Term};
use crate::error::{Error, Result};
use crate::scalar::format_rational;

#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    /// Longest witness / counterexample chain kept in the trace.
    pub max_trace_depth: usize,
    /// Split the outermost quantifier across threads.
    pub parallel: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { max_trace_depth: 8, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub quantifier: &'static str,
    pub var: String,
    pub element: ElemId,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalOutcome {
    pub value: bool,
    /// Witnesses of a true ∃ or counterexamples of a false ∀, outermost
    /// first; stops at the first quantifier not decided by one element.
    pub trace: Vec<TraceStep>,
    /// The matrix compared carrier ids exactly in some equality atom.
    pub used_equality: bool,
}

#[derive(Debug, Clone)]
enum CTerm {
    Slot(usize),
    Elem(ElemId),
    App(usize, Vec<CTerm>),
}

enum CAtom {
    Eq(CTerm, CTerm),
    Close(CTerm, CTerm, usize),
}

struct Compiled<'a> {
    alg: &'a FiniteAlgebra,
    quants: Vec<Quantifier>,
    domains: Vec<Vec<ElemId>>,
    matrix: Vec<Vec<CAtom>>,
    closeness: Vec<Closeness<'a>>,
}

fn compile_term(t: &Term, alg: &FiniteAlgebra, slots: &HashMap<&str, usize>, consts: &mut HashMap<String, ElemId>) -> Result<CTerm> {
    Ok(match t {
        Term::Var(v) => CTerm::Slot(
            *slots.get(v.as_str()).ok_or_else(|| Error::Eval(format!("variable {v:?} is not in scope")))?,
        ),
        Term::Const(c) => {
            let key = format_rational(c);
            if let Some(&e) = consts.get(&key) {
                CTerm::Elem(e)
            } else {
                let e = alg.embedding().nearest(c).ok_or(Error::EmptyCarrier)?;
                consts.insert(key, e);
                CTerm::Elem(e)
            }
        }
        Term::App(f, args) => {
            let op = alg.op_index(f).map_err(|e| Error::Eval(e.to_string()))?;
            let arity = alg.signature().symbols()[op].arity;
            if arity != args.len() {
                return Err(Error::Eval(format!("{f:?} takes {arity} arguments, got {}", args.len())));
            }
            let cargs = args.iter().map(|a| compile_term(a, alg, slots, consts)).collect::<Result<Vec<_>>>()?;
            CTerm::App(op, cargs)
        }
    })
}

impl<'a> Compiled<'a> {
    fn new(phi: &Formula, alg: &'a FiniteAlgebra, assignment: &BTreeMap<String, ElemId>) -> Result<(Self, Vec<ElemId>, bool)> {
        if alg.size() == 0 {
            return Err(Error::EmptyCarrier);
        }
        let mut slots: HashMap<&str, usize> = HashMap::new();
        let mut env = Vec::new();
        for v in phi.free_vars() {
            let e = *assignment
                .get(&v)
                .ok_or_else(|| Error::Eval(format!("free variable {v:?} has no assignment")))?;
            if e as usize >= alg.size() {
                return Err(Error::Eval(format!("{v:?} is assigned {e}, outside the carrier")));
            }
            let name = phi.atoms().find_map(|a| find_var(a, &v)).expect("free var occurs");
            slots.insert(name, env.len());
            env.push(e);
        }
        let mut domains = Vec::new();
        for b in &phi.prefix {
            let r = b
                .bound
                .as_ref()
                .ok_or_else(|| Error::Eval(format!("quantifier over {:?} is unbounded", b.var)))?;
            r.check_kind(&alg.kind())?;
            domains.push(alg.embedding().preimage(r));
            slots.insert(b.var.as_str(), env.len());
            env.push(0);
        }
        let mut consts = HashMap::new();
        let mut closeness = Vec::new();
        let mut eps_index: HashMap<String, usize> = HashMap::new();
        let mut used_equality = false;
        let mut matrix = Vec::new();
        for conj in &phi.matrix {
            let mut out = Vec::new();
            for a in conj {
                let (x, y) = a.terms();
                let cx = compile_term(x, alg, &slots, &mut consts)?;
                let cy = compile_term(y, alg, &slots, &mut consts)?;
                out.push(match a {
                    Atom::Eq(..) => {
                        used_equality = true;
                        CAtom::Eq(cx, cy)
                    }
                    Atom::Close(_, _, w) => {
                        let key = format_rational(&w.epsilon);
                        let k = *eps_index.entry(key).or_insert_with(|| {
                            closeness.push(alg.embedding().closeness(w));
                            closeness.len() - 1
                        });
                        CAtom::Close(cx, cy, k)
                    }
                });
            }
            matrix.push(out);
        }
        let quants = phi.quantifiers();
        Ok((Self { alg, quants, domains, matrix, closeness }, env, used_equality))
    }

    fn term(&self, t: &CTerm, env: &[ElemId]) -> ElemId {
        match t {
            CTerm::Slot(i) => env[*i],
            CTerm::Elem(e) => *e,
            CTerm::App(op, args) => match args.len() {
                0 => self.alg.apply(*op, &[]),
                1 => self.alg.apply(*op, &[self.term(&args[0], env)]),
                2 => self.alg.apply(*op, &[self.term(&args[0], env), self.term(&args[1], env)]),
                _ => {
                    let v: Vec<ElemId> = args.iter().map(|a| self.term(a, env)).collect();
                    self.alg.apply(*op, &v)
                }
            },
        }
    }

    fn matrix(&self, env: &[ElemId]) -> bool {
        self.matrix.iter().any(|conj| {
            conj.iter().all(|a| match a {
                CAtom::Eq(x, y) => self.term(x, env) == self.term(y, env),
                CAtom::Close(x, y, k) => self.closeness[*k].ids(self.term(x, env), self.term(y, env)),
            })
        })
    }

    /// Verdict at prefix position `level` plus the decisive path below it.
    fn eval(&self, level: usize, base: usize, env: &mut Vec<ElemId>) -> (bool, Vec<ElemId>) {
        if level == self.quants.len() {
            return (self.matrix(env), Vec::new());
        }
        let want = self.quants[level] == Quantifier::Exists;
        for &e in &self.domains[level] {
            env[base + level] = e;
            let (v, mut path) = self.eval(level + 1, base, env);
            if v == want {
                path.insert(0, e);
                return (want, path);
            }
        }
        (!want, Vec::new())
    }

    fn eval_top(&self, base: usize, env: Vec<ElemId>, parallel: bool) -> (bool, Vec<ElemId>) {
        if !parallel || self.quants.is_empty() || self.domains[0].len() < 64 {
            let mut env = env;
            return self.eval(0, base, &mut env);
        }
        let want = self.quants[0] == Quantifier::Exists;
        let hit = self.domains[0].par_iter().find_map_first(|&e| {
            let mut local = env.clone();
            local[base] = e;
            let (v, mut path) = self.eval(1, base, &mut local);
            (v == want).then(|| {
                path.insert(0, e);
                path
            })
        });
        match hit {
            Some(path) => (want, path),
            None => (!want, Vec::new()),
        }
    }
}

fn find_var<'f>(a: &'f Atom, v: &str) -> Option<&'f str> {
    fn go<'f>(t: &'f Term, v: &str) -> Option<&'f str> {
        match t {
            Term::Var(x) if x == v => Some(x.as_str()),
            Term::App(_, args) => args.iter().find_map(|a| go(a, v)),
            _ => None,
        }
    }
    let (x, y) = a.terms();
    go(x, v).or_else(|| go(y, v))
}

pub fn eval_finite(phi: &Formula, alg: &FiniteAlgebra, assignment: &BTreeMap<String, ElemId>) -> Result<EvalOutcome> {
    eval_finite_with(phi, alg, assignment, &EvalConfig::default())
}

/// Evaluate a bounded formula in `alg`: quantifiers range over `j⁻¹(B)`,
/// terms go through the operation tables, closeness is decided on embedded
/// values and equality on carrier ids.
pub fn eval_finite_with(
    phi: &Formula,
    alg: &FiniteAlgebra,
    assignment: &BTreeMap<String, ElemId>,
    config: &EvalConfig,
) -> Result<EvalOutcome> {
    let (c, env, used_equality) = Compiled::new(phi, alg, assignment)?;
    let base = env.len() - phi.prefix.len();
    let (value, path) = c.eval_top(base, env, config.parallel);
    let trace = path
        .into_iter()
        .take(config.max_trace_depth)
        .enumerate()
        .map(|(i, e)| TraceStep {
            quantifier: match phi.prefix[i].quantifier {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            },
            var: phi.prefix[i].var.clone(),
            element: e,
            value: format_rational(alg.value(e)),
        })
        .collect();
    Ok(EvalOutcome { value, trace, used_equality })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{canonical_approximation, AmbientKind, AmbientStructure, Entourage, Region};
    use crate::pbf::parse_formula;
    use crate::scalar::{int, rat};

    fn grid() -> FiniteAlgebra {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let c = Region::closed(int(-3), int(3)).unwrap();
        canonical_approximation(amb, &c, &Entourage::new(rat(1, 4)).unwrap(), &rat(1, 8)).unwrap()
    }

    #[test]
    fn vacuous_quantifiers() {
        let g = grid();
        let none = BTreeMap::new();
        let ex = parse_formula("exists x in [100, 200] : x = x").unwrap();
        assert!(!eval_finite(&ex, &g, &none).unwrap().value);
        let all = parse_formula("forall x in (100, 200) : x = 1").unwrap();
        assert!(eval_finite(&all, &g, &none).unwrap().value);
    }

    #[test]
    fn witnesses_and_counterexamples() {
        let g = grid();
        let none = BTreeMap::new();
        let f = parse_formula("exists x in [0, 3] : close(x*x, 2, 1/5)").unwrap();
        let out = eval_finite(&f, &g, &none).unwrap();
        assert!(out.value);
        assert_eq!(out.trace[0].value, "11/8");
        assert!(!out.used_equality);
        let f = parse_formula("forall x in (-1, 1) : close(x*x, 0, 1/2)").unwrap();
        let out = eval_finite(&f, &g, &none).unwrap();
        assert!(!out.value);
        assert_eq!(out.trace[0].value, "-7/8");
    }

    #[test]
    fn free_variables_and_scope_errors() {
        let g = grid();
        let f = parse_formula("exists z in [-2, 2] : close(x + z*z, y, 1/4)").unwrap();
        let mut a = BTreeMap::new();
        a.insert("x".to_string(), g.embedding().nearest(&int(0)).unwrap());
        assert!(matches!(eval_finite(&f, &g, &a), Err(Error::Eval(_))));
        a.insert("y".to_string(), g.embedding().nearest(&int(1)).unwrap());
        assert!(eval_finite(&f, &g, &a).unwrap().value);
        let unbounded = parse_formula("exists z : z = z").unwrap();
        assert!(matches!(eval_finite(&unbounded, &g, &BTreeMap::new()), Err(Error::Eval(_))));
    }

    #[test]
    fn parallel_and_serial_agree() {
        let g = grid();
        let f = parse_formula("forall x in (-2, 2) exists y in [-3, 3] : close(x + y, 1, 1/4)").unwrap();
        let serial = eval_finite_with(&f, &g, &BTreeMap::new(), &EvalConfig { parallel: false, ..Default::default() }).unwrap();
        let par = eval_finite(&f, &g, &BTreeMap::new()).unwrap();
        assert_eq!(serial, par);
    }
}
