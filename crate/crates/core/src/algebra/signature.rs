use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ADD: &str = "+";
pub const MUL: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self { name: name.into(), arity }
    }
}

/// A finite list of function symbols with distinct names. Arity-0 symbols
/// are constants.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if s.name.is_empty() {
                return Err(Error::invalid("symbol names must be non-empty"));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::invalid(format!("duplicate symbol {:?}", s.name)));
            }
        }
        Ok(Self { symbols })
    }

    /// `⟨+, ×⟩`.
    pub fn ring() -> Self {
        Self { symbols: vec![Symbol::new(ADD, 2), Symbol::new(MUL, 2)] }
    }

    pub fn with(mut self, symbol: Symbol) -> Result<Self> {
        self.symbols.push(symbol);
        Self::new(self.symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.arity)
    }
}
