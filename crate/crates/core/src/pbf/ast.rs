use std::collections::BTreeSet;

use crate::algebra::{Entourage, Region, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Eq(Term, Term),
    /// `⟨t1, t2⟩ ∈ W`.
    Close(Term, Term, Entourage),
}

impl Atom {
    pub fn terms(&self) -> (&Term, &Term) {
        match self {
            Atom::Eq(a, b) | Atom::Close(a, b, _) => (a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub quantifier: Quantifier,
    pub var: String,
    pub bound: Option<Region>,
}

/// A prenex formula `Q_1 y_1 … Q_m y_m ψ` with `ψ` in disjunctive normal
/// form: `matrix` is a disjunction of conjunctions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    pub prefix: Vec<Binding>,
    pub matrix: Vec<Vec<Atom>>,
}

/// Quantifier bounds aligned with a formula's prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundTuple(pub Vec<Region>);

impl Formula {
    pub fn new(prefix: Vec<Binding>, matrix: Vec<Vec<Atom>>) -> Result<Self> {
        if matrix.is_empty() || matrix.iter().any(Vec::is_empty) {
            return Err(Error::invalid("the matrix needs at least one atom in every disjunct"));
        }
        let mut seen = BTreeSet::new();
        for b in &prefix {
            if !seen.insert(b.var.as_str()) {
                return Err(Error::invalid(format!("variable {:?} is quantified twice", b.var)));
            }
        }
        Ok(Self { prefix, matrix })
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.matrix.iter().flatten()
    }

    /// Matrix variables not bound by the prefix.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut all = BTreeSet::new();
        for a in self.atoms() {
            let (s, t) = a.terms();
            s.collect_vars(&mut all);
            t.collect_vars(&mut all);
        }
        for b in &self.prefix {
            all.remove(&b.var);
        }
        all
    }

    pub fn is_bounded(&self) -> bool {
        self.prefix.iter().all(|b| b.bound.is_some())
    }

    pub fn bounds(&self) -> Option<BoundTuple> {
        self.prefix.iter().map(|b| b.bound.clone()).collect::<Option<Vec<_>>>().map(BoundTuple)
    }

    /// `φ[c]`: the same formula with the prefix bounds replaced.
    pub fn with_bounds(&self, c: &BoundTuple) -> Result<Self> {
        if c.0.len() != self.prefix.len() {
            return Err(Error::invalid(format!(
                "{} bounds for a prefix of length {}",
                c.0.len(),
                self.prefix.len()
            )));
        }
        let prefix = self
            .prefix
            .iter()
            .zip(&c.0)
            .map(|(b, r)| Binding { bound: Some(r.clone()), ..b.clone() })
            .collect();
        Ok(Self { prefix, matrix: self.matrix.clone() })
    }

    pub fn quantifiers(&self) -> Vec<Quantifier> {
        self.prefix.iter().map(|b| b.quantifier).collect()
    }
}
