use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ambient::AmbientStructure;
use super::region::{AmbientKind, Entourage, Region};
use super::signature::Signature;
use crate::error::{Error, Result};
use crate::scalar::valuation;

pub type ElemId = u32;

/// Materialize tables up to this many entries; larger ones stay rules.
pub const DENSE_TABLE_LIMIT: u128 = 1 << 22;

pub type Rule = Arc<dyn Fn(&[ElemId]) -> ElemId + Send + Sync>;

/// An operation table: a materialized row-major array, or a rule computed
/// on demand for carriers too large to materialize.
#[derive(Clone)]
pub enum OpTable {
    Dense(Arc<Vec<ElemId>>),
    Rule(Rule),
}

impl fmt::Debug for OpTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpTable::Dense(t) => write!(f, "Dense({} entries)", t.len()),
            OpTable::Rule(_) => f.write_str("Rule"),
        }
    }
}

/// Row-major index of an argument tuple.
pub fn table_index(size: usize, args: &[ElemId]) -> usize {
    args.iter().fold(0usize, |acc, &a| acc * size + a as usize)
}

/// Every argument tuple of the given arity in lexicographic order.
pub fn tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<ElemId>> {
    let total = (size as u128).pow(arity as u32);
    (0..total).map(move |mut k| {
        let mut t = vec![0 as ElemId; arity];
        for slot in t.iter_mut().rev() {
            *slot = (k % size as u128) as ElemId;
            k /= size as u128;
        }
        t
    })
}

/// Values on a common integer lattice, for fast exact closeness tests.
#[derive(Debug, Clone)]
struct Lattice {
    /// Every value equals `nums[i] / denom`.
    denom: BigInt,
    nums: Vec<i128>,
}

/// The map `j` from carrier ids to ambient values.
#[derive(Debug, Clone)]
pub struct Embedding {
    kind: AmbientKind,
    values: Vec<BigRational>,
    lattice: Option<Lattice>,
    /// Real embeddings: ids sorted by value (ties by id).
    sorted: Option<Vec<ElemId>>,
}

impl Embedding {
    pub fn new(kind: AmbientKind, values: Vec<BigRational>) -> Result<Self> {
        if let AmbientKind::Padic { p } = kind {
            for v in &values {
                if !is_p_power(v.denom(), p) {
                    return Err(Error::malformed(format!(
                        "embedded value {v} is not a finite {p}-adic expansion"
                    )));
                }
            }
        }
        let lattice = build_lattice(&values);
        let sorted = (kind == AmbientKind::Real).then(|| {
            let mut ids: Vec<ElemId> = (0..values.len() as ElemId).collect();
            ids.sort_by(|&a, &b| values[a as usize].cmp(&values[b as usize]).then(a.cmp(&b)));
            ids
        });
        Ok(Self { kind, values, lattice, sorted })
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn value(&self, id: ElemId) -> &BigRational {
        &self.values[id as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `j^{-1}(B)`, in id order.
    pub fn preimage(&self, region: &Region) -> Vec<ElemId> {
        if let (Some(sorted), Some(spans)) = (&self.sorted, region.spans()) {
            let mut out = Vec::new();
            for s in spans {
                let from = sorted.partition_point(|&i| {
                    let v = self.value(i);
                    v < &s.lo || (v == &s.lo && !s.lo_closed)
                });
                let to = sorted.partition_point(|&i| {
                    let v = self.value(i);
                    v < &s.hi || (v == &s.hi && s.hi_closed)
                });
                out.extend_from_slice(&sorted[from..to.max(from)]);
            }
            out.sort_unstable();
            out.dedup();
            return out;
        }
        (0..self.values.len() as ElemId).filter(|&i| region.contains(self.value(i))).collect()
    }

    /// The carrier element whose image is nearest to `x`. Real ties prefer
    /// the smaller magnitude, then the smaller id.
    pub fn nearest(&self, x: &BigRational) -> Option<ElemId> {
        let candidates: Vec<ElemId> = match &self.sorted {
            Some(sorted) if !sorted.is_empty() => {
                // only the closest distinct value on either side can win
                let pos = sorted.partition_point(|&i| self.value(i) < x);
                let mut c = Vec::new();
                for side in [pos.checked_sub(1), (pos < sorted.len()).then_some(pos)].into_iter().flatten() {
                    let v = self.value(sorted[side]);
                    let lo = sorted.partition_point(|&i| self.value(i) < v);
                    let hi = sorted.partition_point(|&i| self.value(i) <= v);
                    c.extend_from_slice(&sorted[lo..hi]);
                }
                c.sort_unstable();
                c.dedup();
                c
            }
            _ => (0..self.values.len() as ElemId).collect(),
        };
        let mut best: Option<(BigRational, ElemId)> = None;
        for i in candidates {
            let v = self.value(i);
            let d = self.kind.distance(v, x);
            let better = match &best {
                None => true,
                Some((bd, bi)) => match d.cmp(bd) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        self.kind == AmbientKind::Real
                            && v.abs() < self.values[*bi as usize].abs()
                    }
                },
            };
            if better {
                best = Some((d, i as ElemId));
            }
        }
        best.map(|(_, i)| i)
    }

    /// A closeness test for a fixed entourage.
    pub fn closeness(&self, eps: &Entourage) -> Closeness<'_> {
        let fast = self.lattice.as_ref().map(|lat| match self.kind {
            AmbientKind::Real => {
                // |Δn| < ε·D  ⇔  |Δn| ≤ ceil(ε·D) − 1
                let t = &eps.epsilon * BigRational::from_integer(lat.denom.clone());
                let bound: num_bigint::BigInt = t.ceil().to_integer() - 1;
                FastClose::Below(bound.to_i128().unwrap_or(i128::MAX))
            }
            AmbientKind::Padic { p } => {
                // v(Δn) − v(D) ≥ n  ⇔  p^{n + v(D)} divides Δn
                let n = eps.padic_cutoff(p);
                let k = valuation(&BigRational::from_integer(lat.denom.clone()), p).unwrap();
                let e = n + k;
                if e <= 0 {
                    FastClose::Always
                } else {
                    match (p as i128).checked_pow(e as u32) {
                        Some(m) => FastClose::Divisible(m),
                        None => FastClose::Divisible(0),
                    }
                }
            }
        });
        Closeness { emb: self, eps: eps.clone(), fast }
    }
}

fn is_p_power(d: &BigInt, p: u64) -> bool {
    let p = BigInt::from(p);
    let mut d = d.clone();
    while d > BigInt::one() {
        let (q, r) = d.div_rem(&p);
        if !r.is_zero() {
            return false;
        }
        d = q;
    }
    true
}

fn build_lattice(values: &[BigRational]) -> Option<Lattice> {
    let limit = BigInt::one() << 100;
    let mut denom = BigInt::one();
    for v in values {
        denom = denom.lcm(v.denom());
        if denom > limit {
            return None;
        }
    }
    let d = BigRational::from_integer(denom.clone());
    let nums = values
        .iter()
        .map(|v| {
            let n = (v * &d).to_integer();
            if n.abs() > limit {
                None
            } else {
                n.to_i128()
            }
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Lattice { denom, nums })
}

#[derive(Debug, Clone, Copy)]
enum FastClose {
    Below(i128),
    /// `0` stands for a modulus beyond `i128`: only equal values qualify.
    Divisible(i128),
    Always,
}

pub struct Closeness<'a> {
    emb: &'a Embedding,
    eps: Entourage,
    fast: Option<FastClose>,
}

impl Closeness<'_> {
    /// Whether `j(a)` and `j(b)` are `W`-close.
    pub fn ids(&self, a: ElemId, b: ElemId) -> bool {
        match (self.fast, &self.emb.lattice) {
            (Some(f), Some(lat)) => {
                let d = lat.nums[a as usize] - lat.nums[b as usize];
                match f {
                    FastClose::Below(bound) => d.abs() <= bound,
                    FastClose::Divisible(0) => d == 0,
                    FastClose::Divisible(m) => d % m == 0,
                    FastClose::Always => true,
                }
            }
            _ => self.emb.kind.close(self.emb.value(a), self.emb.value(b), &self.eps),
        }
    }

    pub fn values(&self, x: &BigRational, y: &BigRational) -> bool {
        self.emb.kind.close(x, y, &self.eps)
    }

    pub fn entourage(&self) -> &Entourage {
        &self.eps
    }
}

/// A finite algebra `⟨A_f, θ⟩` with its embedding `j` into an ambient
/// structure.
#[derive(Debug, Clone)]
pub struct FiniteAlgebra {
    label: String,
    ambient: Arc<AmbientStructure>,
    size: usize,
    tables: Vec<OpTable>,
    embedding: Embedding,
}

impl FiniteAlgebra {
    pub fn new(
        label: impl Into<String>,
        ambient: Arc<AmbientStructure>,
        size: usize,
        tables: Vec<OpTable>,
        values: Vec<BigRational>,
    ) -> Result<Self> {
        if size > ElemId::MAX as usize {
            return Err(Error::LimitExceeded { size: size as u128, limit: ElemId::MAX as u128 });
        }
        let sig = ambient.signature();
        if tables.len() != sig.len() {
            return Err(Error::malformed(format!(
                "{} tables for {} symbols",
                tables.len(),
                sig.len()
            )));
        }
        for (sym, table) in sig.symbols().iter().zip(&tables) {
            if let OpTable::Dense(t) = table {
                let want = (size as u128).pow(sym.arity as u32);
                if t.len() as u128 != want {
                    return Err(Error::malformed(format!(
                        "table for {:?} has {} entries, expected {want}",
                        sym.name,
                        t.len()
                    )));
                }
                if let Some(bad) = t.iter().find(|&&e| e as usize >= size) {
                    return Err(Error::malformed(format!(
                        "table for {:?} references element {bad} outside the carrier",
                        sym.name
                    )));
                }
            }
        }
        if values.len() != size {
            return Err(Error::malformed(format!(
                "embedding has {} values for a carrier of {size}",
                values.len()
            )));
        }
        let embedding = Embedding::new(ambient.kind(), values)?;
        Ok(Self { label: label.into(), ambient, size, tables, embedding })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn ambient(&self) -> &AmbientStructure {
        &self.ambient
    }

    pub fn ambient_arc(&self) -> Arc<AmbientStructure> {
        self.ambient.clone()
    }

    pub fn kind(&self) -> AmbientKind {
        self.ambient.kind()
    }

    pub fn signature(&self) -> &Signature {
        self.ambient.signature()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn value(&self, id: ElemId) -> &BigRational {
        self.embedding.value(id)
    }

    pub fn table(&self, op: usize) -> &OpTable {
        &self.tables[op]
    }

    pub fn op_index(&self, name: &str) -> Result<usize> {
        self.signature()
            .index_of(name)
            .ok_or_else(|| Error::invalid(format!("algebra has no symbol {name:?}")))
    }

    /// Apply operation `op` to valid carrier ids.
    #[inline]
    pub fn apply(&self, op: usize, args: &[ElemId]) -> ElemId {
        match &self.tables[op] {
            OpTable::Dense(t) => t[table_index(self.size, args)],
            OpTable::Rule(f) => f(args),
        }
    }

    /// Apply with range checks on arguments and result.
    pub fn try_apply(&self, op: usize, args: &[ElemId]) -> Result<ElemId> {
        if let Some(a) = args.iter().find(|&&a| a as usize >= self.size) {
            return Err(Error::malformed(format!("argument {a} outside the carrier")));
        }
        let r = self.apply(op, args);
        if r as usize >= self.size {
            return Err(Error::malformed(format!(
                "table lookup for {:?} at {args:?} gave {r}, outside the carrier",
                self.signature().symbols()[op].name
            )));
        }
        Ok(r)
    }

    pub fn binary(&self, op: usize, a: ElemId, b: ElemId) -> ElemId {
        self.apply(op, &[a, b])
    }

    pub fn is_dense(&self) -> bool {
        self.tables.iter().all(|t| matches!(t, OpTable::Dense(_)))
    }

    /// The dense table of every symbol, computing rules if needed.
    pub fn materialize(&self, limit: u128) -> Result<Vec<Arc<Vec<ElemId>>>> {
        self.signature()
            .symbols()
            .iter()
            .enumerate()
            .map(|(op, sym)| match &self.tables[op] {
                OpTable::Dense(t) => Ok(t.clone()),
                OpTable::Rule(f) => {
                    let want = (self.size as u128).pow(sym.arity as u32);
                    if want > limit {
                        return Err(Error::LimitExceeded { size: want, limit });
                    }
                    Ok(Arc::new(tuples(self.size, sym.arity).map(|t| f(&t)).collect()))
                }
            })
            .collect()
    }

    /// A copy with every table materialized.
    pub fn densified(&self, limit: u128) -> Result<Self> {
        let tables = self.materialize(limit)?.into_iter().map(OpTable::Dense).collect();
        Ok(Self { tables, ..self.clone() })
    }

    /// A copy with one dense table entry replaced.
    pub fn with_entry(&self, symbol: &str, args: &[ElemId], result: ElemId) -> Result<Self> {
        let op = self.op_index(symbol)?;
        let mut tables = self.materialize(DENSE_TABLE_LIMIT)?;
        let t = Arc::make_mut(&mut tables[op]);
        t[table_index(self.size, args)] = result;
        let tables = tables.into_iter().map(OpTable::Dense).collect();
        Self::new(
            self.label.clone(),
            self.ambient.clone(),
            self.size,
            tables,
            self.embedding.values.clone(),
        )
    }
}

/// Build a table for a binary or unary symbol: dense when small enough,
/// otherwise a rule.
pub fn table_from_fn<F>(size: usize, arity: usize, f: F) -> OpTable
where
    F: Fn(&[ElemId]) -> ElemId + Send + Sync + 'static,
{
    let entries = (size as u128).pow(arity as u32);
    if entries <= DENSE_TABLE_LIMIT {
        let mut out = Vec::with_capacity(entries as usize);
        let mut t = vec![0 as ElemId; arity];
        for _ in 0..entries {
            out.push(f(&t));
            // odometer step, last slot fastest
            for slot in t.iter_mut().rev() {
                *slot += 1;
                if (*slot as usize) < size {
                    break;
                }
                *slot = 0;
            }
        }
        OpTable::Dense(Arc::new(out))
    } else {
        OpTable::Rule(Arc::new(f))
    }
}
