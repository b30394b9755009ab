//! The finite-algebra file format (JSON).
//!
//! ```json
//! { "signature": [{"name": "+", "arity": 2}, ...],
//!   "carrier_size": 3,
//!   "tables": {"+": [0, 1, 2, ...], ...},
//!   "embedding": ["-1/2", "0/1", {"p": 2, "valuation": -1, "digits": [1]}] }
//! ```
//!
//! Real embeddings are `num/den` strings; p-adic ones are digit records.
//! The ambient interpretation is derived from symbol names.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::ambient::AmbientStructure;
use super::finite::{ElemId, FiniteAlgebra, OpTable, DENSE_TABLE_LIMIT};
use super::region::AmbientKind;
use super::signature::{Signature, Symbol};
use crate::error::{Error, Result};
use crate::padic::PadicDigits;
use crate::scalar::{format_ratio, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmbeddedValue {
    Rational(String),
    Padic(PadicDigits),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub signature: Vec<Symbol>,
    pub carrier_size: usize,
    pub tables: BTreeMap<String, Vec<ElemId>>,
    pub embedding: Vec<EmbeddedValue>,
}

impl AlgebraFile {
    pub fn from_algebra(alg: &FiniteAlgebra) -> Result<Self> {
        let tables = alg.materialize(DENSE_TABLE_LIMIT)?;
        let embedding = alg
            .embedding()
            .values()
            .iter()
            .map(|v| match alg.kind() {
                AmbientKind::Real => Ok(EmbeddedValue::Rational(format_ratio(v))),
                AmbientKind::Padic { p } => PadicDigits::from_rational(v, p).map(EmbeddedValue::Padic),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            label: Some(alg.label().to_string()),
            signature: alg.signature().symbols().to_vec(),
            carrier_size: alg.size(),
            tables: alg
                .signature()
                .symbols()
                .iter()
                .zip(tables)
                .map(|(s, t)| (s.name.clone(), t.as_ref().clone()))
                .collect(),
            embedding,
        })
    }

    pub fn to_algebra(&self) -> Result<FiniteAlgebra> {
        let mut kind: Option<AmbientKind> = None;
        let mut values = Vec::with_capacity(self.embedding.len());
        for e in &self.embedding {
            let (k, v) = match e {
                EmbeddedValue::Rational(s) => (AmbientKind::Real, parse_rational(s)?),
                EmbeddedValue::Padic(d) => {
                    // re-canonicalize; rejects bad primes and digits
                    let d2 = PadicDigits::new(d.p, d.valuation, d.digits.clone())?;
                    if &d2 != d {
                        return Err(Error::Format(format!("non-canonical p-adic record {d}")));
                    }
                    (AmbientKind::Padic { p: d.p }, d.to_rational())
                }
            };
            match kind {
                None => kind = Some(k),
                Some(prev) if prev != k => {
                    return Err(Error::Format(format!("embedding mixes {prev} and {k}")))
                }
                _ => {}
            }
            values.push(v);
        }
        let kind = kind.unwrap_or(AmbientKind::Real);
        let sig = Signature::new(self.signature.clone())?;
        let ambient = Arc::new(AmbientStructure::standard(kind, &sig)?);
        if self.tables.len() != sig.len() {
            return Err(Error::malformed(format!("{} tables for {} symbols", self.tables.len(), sig.len())));
        }
        let tables = sig
            .symbols()
            .iter()
            .map(|s| {
                self.tables
                    .get(&s.name)
                    .map(|t| OpTable::Dense(Arc::new(t.clone())))
                    .ok_or_else(|| Error::malformed(format!("no table for {:?}", s.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = self.label.clone().unwrap_or_else(|| "file".to_string());
        FiniteAlgebra::new(label, ambient, self.carrier_size, tables, values)
    }
}

pub fn algebra_to_json(alg: &FiniteAlgebra) -> Result<String> {
    let file = AlgebraFile::from_algebra(alg)?;
    serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn algebra_from_json(text: &str) -> Result<FiniteAlgebra> {
    let file: AlgebraFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.to_algebra()
}

/// Exact value of an embedded record, for callers that read files directly.
pub fn embedded_value(e: &EmbeddedValue) -> Result<BigRational> {
    match e {
        EmbeddedValue::Rational(s) => parse_rational(s),
        EmbeddedValue::Padic(d) => Ok(d.to_rational()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{canonical_approximation, check_approximation, Entourage, Region};
    use crate::padic::build_hmn;
    use crate::padic::HmnParams;
    use crate::scalar::{int, rat};

    #[test]
    fn real_round_trip_is_bit_exact() {
        let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
        let c = Region::closed(int(-1), int(1)).unwrap();
        let w = Entourage::new(rat(1, 2)).unwrap();
        let alg = canonical_approximation(amb, &c, &w, &rat(1, 3)).unwrap();
        let text = algebra_to_json(&alg).unwrap();
        let back = algebra_from_json(&text).unwrap();
        assert_eq!(algebra_to_json(&back).unwrap(), text);
        assert_eq!(back.embedding().values(), alg.embedding().values());
        assert!(check_approximation(&back, &c, &w).unwrap().ok());
    }

    #[test]
    fn padic_round_trip_is_bit_exact() {
        let alg = build_hmn(&HmnParams::new(3, 1, 2).unwrap()).unwrap();
        let text = algebra_to_json(&alg).unwrap();
        assert!(text.contains("\"valuation\": -1"));
        let back = algebra_from_json(&text).unwrap();
        assert_eq!(back.kind(), AmbientKind::Padic { p: 3 });
        assert_eq!(algebra_to_json(&back).unwrap(), text);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let bad_entry = r#"{"signature":[{"name":"+","arity":2}],"carrier_size":2,
            "tables":{"+":[0,1,1,5]},"embedding":["0/1","1/1"]}"#;
        assert!(matches!(algebra_from_json(bad_entry), Err(Error::Malformed(_))));
        let short = r#"{"signature":[{"name":"+","arity":2}],"carrier_size":2,
            "tables":{"+":[0,1,1]},"embedding":["0/1","1/1"]}"#;
        assert!(matches!(algebra_from_json(short), Err(Error::Malformed(_))));
        let missing = r#"{"signature":[{"name":"+","arity":2}],"carrier_size":1,
            "tables":{"*":[0]},"embedding":["0/1"]}"#;
        assert!(algebra_from_json(missing).is_err());
        let mixed = r#"{"signature":[],"carrier_size":2,"tables":{},
            "embedding":["0/1",{"p":2,"valuation":0,"digits":[1]}]}"#;
        assert!(matches!(algebra_from_json(mixed), Err(Error::Format(_))));
    }
}
