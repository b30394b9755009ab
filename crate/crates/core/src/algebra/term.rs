use std::collections::BTreeSet;

use num_rational::BigRational;

use super::signature::{Signature, ADD, MUL};
use crate::error::{Error, Result};

/// A term over a signature extended by rational literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// A literal constant, interpreted in a finite algebra by its nearest
    /// embedded carrier element.
    Const(BigRational),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(v: BigRational) -> Self {
        Term::Const(v)
    }

    pub fn app(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(symbol.into(), args)
    }

    pub fn add(a: Term, b: Term) -> Self {
        Term::App(ADD.into(), vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Self {
        Term::App(MUL.into(), vec![a, b])
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Every application uses a declared symbol at its declared arity.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) | Term::Const(_) => Ok(()),
            Term::App(f, args) => {
                let arity = sig
                    .arity(f)
                    .ok_or_else(|| Error::invalid(format!("unknown symbol {f:?}")))?;
                if arity != args.len() {
                    return Err(Error::invalid(format!(
                        "symbol {f:?} has arity {arity}, applied to {} arguments",
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Symbol;
    use crate::scalar::int;

    #[test]
    fn free_variables_are_collected() {
        let t = Term::mul(Term::add(Term::var("y"), Term::var("x")), Term::constant(int(2)));
        let vars: Vec<_> = t.free_vars().into_iter().collect();
        assert_eq!(vars, ["x", "y"]);
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let sig = Signature::ring();
        assert!(Term::app("+", vec![Term::var("x")]).check(&sig).is_err());
        assert!(Term::app("g", vec![Term::var("x")]).check(&sig).is_err());
        let sig = sig.with(Symbol::new("g", 1)).unwrap();
        assert!(Term::app("g", vec![Term::var("x")]).check(&sig).is_ok());
    }
}
