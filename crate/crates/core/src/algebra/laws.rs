//! Exhaustive counterexample search for algebraic laws.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::finite::{ElemId, FiniteAlgebra};
use super::region::Region;
use super::signature::{ADD, MUL};
use crate::error::{Error, Result};
use crate::scalar::format_rational;

/// How `inverse` finds `-x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegMap {
    /// A unary symbol of the algebra.
    Symbol(String),
    /// The carrier element embedded at `-j(x)`.
    ByValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Law {
    /// `(x∘y)∘z = x∘(y∘z)`
    Assoc(String),
    /// `x∘y = y∘x`
    Comm(String),
    /// `(x+y)*z = x*z + y*z`
    Distrib { mul: String, add: String },
    /// `x∘y = x∘z ⇒ y = z`
    Cancel(String),
    /// `x∘e = e∘x = x`
    Identity { op: String, elem: ElemId },
    /// `x∘(-x) = e`
    Inverse { op: String, identity: ElemId, neg: NegMap },
}

impl Law {
    pub fn arity(&self) -> usize {
        match self {
            Law::Assoc(_) | Law::Distrib { .. } | Law::Cancel(_) => 3,
            Law::Comm(_) => 2,
            Law::Identity { .. } | Law::Inverse { .. } => 1,
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Assoc(s) => write!(f, "assoc({s})"),
            Law::Comm(s) => write!(f, "comm({s})"),
            Law::Distrib { mul, add } => write!(f, "distrib({mul}, {add})"),
            Law::Cancel(s) => write!(f, "cancel({s})"),
            Law::Identity { op, elem } => write!(f, "identity({op}, #{elem})"),
            Law::Inverse { op, neg, .. } => match neg {
                NegMap::Symbol(n) => write!(f, "inverse({op}, {n})"),
                NegMap::ByValue => write!(f, "inverse({op}, -x)"),
            },
        }
    }
}

/// Law names without element parameters: `assoc-add`, `comm-mul`,
/// `distrib`, `cancel-add`. Identity and inverse laws need an element and
/// are built with [`Law::Identity`] / [`Law::Inverse`].
impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let op = |suffix: &str| match suffix {
            "add" => Ok(ADD.to_string()),
            "mul" => Ok(MUL.to_string()),
            other => Err(Error::invalid(format!("unknown operation {other:?}"))),
        };
        match s.split_once('-') {
            Some(("assoc", o)) => Ok(Law::Assoc(op(o)?)),
            Some(("comm", o)) => Ok(Law::Comm(op(o)?)),
            Some(("cancel", o)) => Ok(Law::Cancel(op(o)?)),
            None if s == "distrib" => Ok(Law::Distrib { mul: MUL.into(), add: ADD.into() }),
            _ => Err(Error::invalid(format!(
                "unknown law {s:?} (expected assoc-OP, comm-OP, cancel-OP or distrib)"
            ))),
        }
    }
}

/// A violating tuple with both sides of the failed equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawWitness {
    pub law: String,
    pub args: Vec<ElemId>,
    pub values: Vec<String>,
    pub lhs: String,
    pub rhs: String,
}

impl fmt::Display for LawWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.law.starts_with("cancel") { "=" } else { "≠" };
        write!(f, "{} fails at ({}): {} {rel} {}", self.law, self.values.join(", "), self.lhs, self.rhs)
    }
}

struct Ops {
    a: usize,
    b: usize,
    neg: Option<usize>,
}

fn resolve(alg: &FiniteAlgebra, law: &Law) -> Result<Ops> {
    let binary = |name: &str| -> Result<usize> {
        let i = alg.op_index(name)?;
        if alg.signature().symbols()[i].arity != 2 {
            return Err(Error::invalid(format!("{law} needs {name:?} to be binary")));
        }
        Ok(i)
    };
    let check_elem = |e: ElemId| {
        if e as usize >= alg.size() {
            Err(Error::invalid(format!("element {e} outside the carrier")))
        } else {
            Ok(())
        }
    };
    Ok(match law {
        Law::Assoc(s) | Law::Comm(s) | Law::Cancel(s) => {
            let i = binary(s)?;
            Ops { a: i, b: i, neg: None }
        }
        Law::Distrib { mul, add } => Ops { a: binary(mul)?, b: binary(add)?, neg: None },
        Law::Identity { op, elem } => {
            check_elem(*elem)?;
            let i = binary(op)?;
            Ops { a: i, b: i, neg: None }
        }
        Law::Inverse { op, identity, neg } => {
            check_elem(*identity)?;
            let i = binary(op)?;
            let n = match neg {
                NegMap::Symbol(s) => {
                    let k = alg.op_index(s)?;
                    if alg.signature().symbols()[k].arity != 1 {
                        return Err(Error::invalid(format!("{s:?} is not unary")));
                    }
                    Some(k)
                }
                NegMap::ByValue => None,
            };
            Ops { a: i, b: i, neg: n }
        }
    })
}

/// `(lhs, rhs)` of the law's equation at `t`, or `None` when the law
/// holds there. Cancellation returns the two equal products.
fn evaluate(alg: &FiniteAlgebra, law: &Law, ops: &Ops, t: &[ElemId], negs: &NegTable) -> Option<(ElemId, ElemId)> {
    let ap = |op: usize, x: ElemId, y: ElemId| alg.binary(op, x, y);
    let (l, r) = match law {
        Law::Assoc(_) => (ap(ops.a, ap(ops.a, t[0], t[1]), t[2]), ap(ops.a, t[0], ap(ops.a, t[1], t[2]))),
        Law::Comm(_) => (ap(ops.a, t[0], t[1]), ap(ops.a, t[1], t[0])),
        Law::Distrib { .. } => (
            ap(ops.a, ap(ops.b, t[0], t[1]), t[2]),
            ap(ops.b, ap(ops.a, t[0], t[2]), ap(ops.a, t[1], t[2])),
        ),
        Law::Cancel(_) => {
            let (l, r) = (ap(ops.a, t[0], t[1]), ap(ops.a, t[0], t[2]));
            return (l == r && t[1] != t[2]).then_some((l, r));
        }
        Law::Identity { elem, .. } => {
            let (l, r) = (ap(ops.a, t[0], *elem), ap(ops.a, *elem, t[0]));
            return (l != t[0] || r != t[0]).then_some((if l != t[0] { l } else { r }, t[0]));
        }
        Law::Inverse { identity, .. } => {
            let n = match ops.neg {
                Some(k) => alg.apply(k, &[t[0]]),
                None => match negs.get(t[0]) {
                    Some(n) => n,
                    None => return Some((t[0], *identity)),
                },
            };
            (ap(ops.a, t[0], n), *identity)
        }
    };
    (l != r).then_some((l, r))
}

/// For [`NegMap::ByValue`]: each element's negation, if embedded.
struct NegTable(Option<Vec<Option<ElemId>>>);

impl NegTable {
    fn build(alg: &FiniteAlgebra, law: &Law) -> Self {
        if !matches!(law, Law::Inverse { neg: NegMap::ByValue, .. }) {
            return NegTable(None);
        }
        let mut index: HashMap<&BigRational, ElemId> = HashMap::new();
        for (i, v) in alg.embedding().values().iter().enumerate() {
            index.entry(v).or_insert(i as ElemId);
        }
        let table = alg.embedding().values().iter().map(|v| index.get(&-v).copied()).collect();
        NegTable(Some(table))
    }

    fn get(&self, x: ElemId) -> Option<ElemId> {
        self.0.as_ref().and_then(|t| t[x as usize])
    }
}

fn witness(alg: &FiniteAlgebra, law: &Law, args: Vec<ElemId>, lr: (ElemId, ElemId)) -> LawWitness {
    LawWitness {
        law: law.to_string(),
        values: args.iter().map(|&a| format_rational(alg.value(a))).collect(),
        args,
        lhs: format_rational(alg.value(lr.0)),
        rhs: format_rational(alg.value(lr.1)),
    }
}

/// The lexicographically first violating tuple (by carrier id), scanning
/// all tuples over elements embedded in `restrict` (or the whole carrier).
/// `None` means the law holds exhaustively.
pub fn law_search(alg: &FiniteAlgebra, law: &Law, restrict: Option<&Region>) -> Result<Option<LawWitness>> {
    let ops = resolve(alg, law)?;
    let domain: Vec<ElemId> = match restrict {
        Some(r) => {
            r.check_kind(&alg.kind())?;
            alg.embedding().preimage(r)
        }
        None => (0..alg.size() as ElemId).collect(),
    };
    let negs = NegTable::build(alg, law);
    let n = domain.len();
    let found = match law {
        Law::Cancel(_) => cancel_search(alg, &ops, &domain),
        _ => (0..n).into_par_iter().find_map_first(|i| {
            let mut t = vec![domain[i]; law.arity()];
            let rest = law.arity() - 1;
            let total = (n as u128).pow(rest as u32);
            for mut k in 0..total {
                for slot in t[1..].iter_mut().rev() {
                    *slot = domain[(k % n as u128) as usize];
                    k /= n as u128;
                }
                if let Some(lr) = evaluate(alg, law, &ops, &t, &negs) {
                    return Some((t, lr));
                }
            }
            None
        }),
    };
    Ok(found.map(|(t, lr)| witness(alg, law, t, lr)))
}

/// First `(x, y, z)` with `y ≠ z` and `x∘y = x∘z`, in `O(n)` per `x`.
fn cancel_search(alg: &FiniteAlgebra, ops: &Ops, domain: &[ElemId]) -> Option<(Vec<ElemId>, (ElemId, ElemId))> {
    domain.par_iter().find_map_first(|&x| {
        // position of each y in domain order; find the first y that shares
        // its product with any other z, then the first such z
        let mut first_with: HashMap<ElemId, usize> = HashMap::new();
        let mut best: Option<(usize, usize)> = None;
        let products: Vec<ElemId> = domain.iter().map(|&y| alg.binary(ops.a, x, y)).collect();
        for (j, &r) in products.iter().enumerate() {
            match first_with.get(&r) {
                Some(&i) => {
                    // i < j; the pair (i, j) has y = domain[i]
                    if best.map_or(true, |(bi, _)| i < bi) {
                        best = Some((i, j));
                    }
                }
                None => {
                    first_with.insert(r, j);
                }
            }
        }
        let (i, j) = best?;
        let r = products[i];
        // with y = domain[i], the smallest z ≠ y having the same product
        let z = (0..products.len()).find(|&k| k != i && products[k] == r).unwrap_or(j);
        Some((vec![x, domain[i], domain[z]], (r, r)))
    })
}

/// Whether the law fails at one specific tuple.
pub fn law_violated_at(alg: &FiniteAlgebra, law: &Law, args: &[ElemId]) -> Result<Option<LawWitness>> {
    let ops = resolve(alg, law)?;
    if args.len() != law.arity() {
        return Err(Error::invalid(format!("{law} takes {} elements, got {}", law.arity(), args.len())));
    }
    if let Some(a) = args.iter().find(|&&a| a as usize >= alg.size()) {
        return Err(Error::invalid(format!("element {a} outside the carrier")));
    }
    let negs = NegTable::build(alg, law);
    Ok(evaluate(alg, law, &ops, args, &negs).map(|lr| witness(alg, law, args.to_vec(), lr)))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{table_from_fn, AmbientKind, AmbientStructure};
    use crate::scalar::int;

    fn zn(n: u32) -> FiniteAlgebra {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let add = table_from_fn(n as usize, 2, move |a| (a[0] + a[1]) % n);
        let mul = table_from_fn(n as usize, 2, move |a| (a[0] * a[1]) % n);
        FiniteAlgebra::new("Z/n", amb, n as usize, vec![add, mul], (0..n as i64).map(int).collect()).unwrap()
    }

    /// Brute-force first violation over all tuples, no early structure.
    fn naive(alg: &FiniteAlgebra, law: &Law) -> Option<Vec<ElemId>> {
        let ops = resolve(alg, law).unwrap();
        let negs = NegTable::build(alg, law);
        crate::algebra::tuples(alg.size(), law.arity()).find(|t| evaluate(alg, law, &ops, t, &negs).is_some())
    }

    #[test]
    fn ring_laws_hold_in_zn() {
        let z = zn(6);
        for law in ["assoc-add", "assoc-mul", "comm-add", "comm-mul", "distrib"] {
            assert_eq!(law_search(&z, &law.parse().unwrap(), None).unwrap(), None, "{law}");
        }
        let inv = Law::Inverse { op: ADD.into(), identity: 0, neg: NegMap::ByValue };
        // only 0 has its negation embedded in {0..5}
        assert_eq!(law_search(&z, &inv, None).unwrap().unwrap().args, vec![1]);
        assert_eq!(law_search(&z, &Law::Identity { op: MUL.into(), elem: 1 }, None).unwrap(), None);
    }

    #[test]
    fn cancellation_fails_for_zero_divisors() {
        let z = zn(6);
        let w = law_search(&z, &"cancel-mul".parse().unwrap(), None).unwrap().unwrap();
        // 0*0 = 0*1
        assert_eq!(w.args, vec![0, 0, 1]);
        let w = law_search(&zn(5), &"cancel-mul".parse().unwrap(), None).unwrap().unwrap();
        assert_eq!(w.args, vec![0, 0, 1]);
        assert_eq!(law_search(&zn(5), &"cancel-add".parse().unwrap(), None).unwrap(), None);
    }

    #[test]
    fn cancel_search_matches_naive_scan() {
        // a lopsided table where the first collision is not at y = 0
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let add = table_from_fn(5, 2, |a| if a[0] == 0 { [0, 1, 2, 1, 4][a[1] as usize] } else { (a[0] + a[1]) % 5 });
        let mul = table_from_fn(5, 2, |a| (a[0] * a[1]) % 5);
        let alg = FiniteAlgebra::new("lop", amb, 5, vec![add, mul], (0..5).map(int).collect()).unwrap();
        let law: Law = "cancel-add".parse().unwrap();
        let w = law_search(&alg, &law, None).unwrap().unwrap();
        assert_eq!(Some(w.args), naive(&alg, &law));
    }

    #[test]
    fn specific_tuple() {
        let z = zn(6);
        let law: Law = "cancel-mul".parse().unwrap();
        assert!(law_violated_at(&z, &law, &[2, 0, 3]).unwrap().is_some());
        assert!(law_violated_at(&z, &law, &[1, 0, 3]).unwrap().is_none());
        assert!(law_violated_at(&z, &law, &[1, 0]).is_err());
    }

    #[test]
    fn restriction_limits_the_scan() {
        let z = zn(6);
        let r = Region::closed(int(0), int(1)).unwrap();
        assert_eq!(law_search(&z, &"cancel-mul".parse().unwrap(), Some(&r)).unwrap().unwrap().args, vec![0, 0, 1]);
        let r = Region::closed(int(1), int(1) + int(1)).unwrap();
        // {1, 2}: 1*1 = 1 ≠ 1*2, 2*1 = 2 ≠ 2*2 = 4
        assert_eq!(law_search(&z, &"cancel-mul".parse().unwrap(), Some(&r)).unwrap(), None);
    }

    #[test]
    fn unknown_law_names() {
        assert!("assoc-sub".parse::<Law>().is_err());
        assert!("nonsense".parse::<Law>().is_err());
    }
}
