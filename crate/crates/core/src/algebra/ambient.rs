use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::region::AmbientKind;
use super::signature::{Signature, Symbol, ADD, MUL};
use crate::error::{Error, Result};
use crate::scalar::{int, parse_rational, pow10, ExactScalar};

/// A real function available only through certified enclosures.
pub trait UnaryOracle: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// An enclosure of `f(x)` with radius at most `tol`.
    fn eval(&self, x: &BigRational, tol: &BigRational) -> ExactScalar;
}

/// `sin` via its Taylor series with the Lagrange remainder bound.
#[derive(Debug, Clone, Copy)]
pub struct Sin;

impl UnaryOracle for Sin {
    fn name(&self) -> &str {
        "sin"
    }

    fn eval(&self, x: &BigRational, tol: &BigRational) -> ExactScalar {
        if x.is_zero() {
            return ExactScalar::exact(BigRational::zero());
        }
        let half = tol / int(2);
        let x2 = x * x;
        let mut term = x.clone(); // x^{2k+1} / (2k+1)!
        let mut sum = BigRational::zero();
        let mut k: i64 = 0;
        loop {
            if k % 2 == 0 {
                sum += &term;
            } else {
                sum -= &term;
            }
            // next term magnitude bounds the remainder
            term = &term * &x2 / int((2 * k + 2) * (2 * k + 3));
            k += 1;
            if term.abs() <= half {
                break;
            }
        }
        let remainder = term.abs();
        // shrink the center to a decimal so repeated use stays cheap
        let digits = decimal_digits_for(&half);
        let scale = BigRational::from_integer(pow10(digits));
        let center = (&sum * &scale).round() / &scale;
        let rounding = (&center - &sum).abs();
        ExactScalar::enclosure(center, remainder + rounding)
    }
}

fn decimal_digits_for(tol: &BigRational) -> u32 {
    let mut d = 0u32;
    let mut unit = BigRational::one();
    while &unit > tol {
        unit /= int(10);
        d += 1;
    }
    d + 1
}

/// `x^2`, exact.
#[derive(Debug, Clone, Copy)]
pub struct Square;

impl UnaryOracle for Square {
    fn name(&self) -> &str {
        "square"
    }

    fn eval(&self, x: &BigRational, _tol: &BigRational) -> ExactScalar {
        ExactScalar::exact(x * x)
    }
}

/// `1 / (1 + x^2)`, exact.
#[derive(Debug, Clone, Copy)]
pub struct RecipShifted;

impl UnaryOracle for RecipShifted {
    fn name(&self) -> &str {
        "recip"
    }

    fn eval(&self, x: &BigRational, _tol: &BigRational) -> ExactScalar {
        ExactScalar::exact((BigRational::one() + x * x).recip())
    }
}

pub fn builtin_oracle(name: &str) -> Option<Arc<dyn UnaryOracle>> {
    match name {
        "sin" => Some(Arc::new(Sin)),
        "square" => Some(Arc::new(Square)),
        "recip" => Some(Arc::new(RecipShifted)),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub enum AmbientOp {
    Add,
    Mul,
    Neg,
    Const(BigRational),
    Unary(Arc<dyn UnaryOracle>),
}

/// The algebra being approximated: `R` or `Q_p` with an exact (or
/// certified) interpretation of every symbol.
#[derive(Debug, Clone)]
pub struct AmbientStructure {
    kind: AmbientKind,
    signature: Signature,
    ops: Vec<AmbientOp>,
}

impl AmbientStructure {
    /// `⟨R, +, ×⟩` or `⟨Q_p, +, ×⟩`.
    pub fn field(kind: AmbientKind) -> Self {
        Self { kind, signature: Signature::ring(), ops: vec![AmbientOp::Add, AmbientOp::Mul] }
    }

    pub fn new(kind: AmbientKind, symbols: Vec<(Symbol, AmbientOp)>) -> Result<Self> {
        let mut sig = Vec::new();
        let mut ops = Vec::new();
        for (s, op) in symbols {
            let want = match &op {
                AmbientOp::Add | AmbientOp::Mul => 2,
                AmbientOp::Neg | AmbientOp::Unary(_) => 1,
                AmbientOp::Const(_) => 0,
            };
            if s.arity != want {
                return Err(Error::invalid(format!("symbol {:?} needs arity {want}", s.name)));
            }
            if matches!(op, AmbientOp::Unary(_)) && kind != AmbientKind::Real {
                return Err(Error::invalid("oracle functions are only available over R"));
            }
            sig.push(s);
            ops.push(op);
        }
        Ok(Self { kind, signature: Signature::new(sig)?, ops })
    }

    /// Interpret symbols by name: `+`, `*`, `neg`, built-in oracles
    /// (`sin`, `square`, `recip`), and rational-literal constants.
    pub fn standard(kind: AmbientKind, sig: &Signature) -> Result<Self> {
        let mut symbols = Vec::new();
        for s in sig.symbols() {
            let op = match (s.name.as_str(), s.arity) {
                (ADD, 2) => AmbientOp::Add,
                (MUL, 2) => AmbientOp::Mul,
                ("neg", 1) => AmbientOp::Neg,
                (name, 1) => AmbientOp::Unary(
                    builtin_oracle(name)
                        .ok_or_else(|| Error::invalid(format!("no interpretation for {name:?}")))?,
                ),
                (name, 0) => AmbientOp::Const(parse_rational(name).map_err(|_| {
                    Error::invalid(format!("constant {name:?} is not a rational literal"))
                })?),
                (name, k) => {
                    return Err(Error::invalid(format!("no interpretation for {name:?}/{k}")))
                }
            };
            symbols.push((s.clone(), op));
        }
        Self::new(kind, symbols)
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn op(&self, index: usize) -> &AmbientOp {
        &self.ops[index]
    }

    pub fn is_exact(&self, index: usize) -> bool {
        !matches!(self.ops[index], AmbientOp::Unary(_))
    }

    /// Apply symbol `index` to exact arguments; `tol` bounds the enclosure
    /// radius of oracle symbols.
    pub fn apply(&self, index: usize, args: &[&BigRational], tol: &BigRational) -> ExactScalar {
        match &self.ops[index] {
            AmbientOp::Add => ExactScalar::exact(args[0] + args[1]),
            AmbientOp::Mul => ExactScalar::exact(args[0] * args[1]),
            AmbientOp::Neg => ExactScalar::exact(-args[0]),
            AmbientOp::Const(c) => ExactScalar::exact(c.clone()),
            AmbientOp::Unary(f) => f.eval(args[0], tol),
        }
    }

    /// Apply an exact symbol; panics on oracle symbols.
    pub fn apply_exact(&self, index: usize, args: &[&BigRational]) -> BigRational {
        match &self.ops[index] {
            AmbientOp::Add => args[0] + args[1],
            AmbientOp::Mul => args[0] * args[1],
            AmbientOp::Neg => -args[0],
            AmbientOp::Const(c) => c.clone(),
            AmbientOp::Unary(f) => panic!("{} is not exact", f.name()),
        }
    }
}

/// `10^{-d}` as a rational tolerance.
pub fn tolerance(digits: u32) -> BigRational {
    BigRational::new(BigInt::one(), pow10(digits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn sin_enclosure_brackets_reference_value() {
        // sin(1/2) = 0.479425538604203...
        let e = Sin.eval(&rat(1, 2), &tolerance(15));
        assert!(e.radius() <= &tolerance(15));
        let reference = rat(479_425_538_604_203, 1_000_000_000_000_000);
        assert!((e.value() - reference).abs() < tolerance(14));
    }

    #[test]
    fn standard_interpretations() {
        let sig = Signature::ring()
            .with(Symbol::new("sin", 1))
            .unwrap()
            .with(Symbol::new("1", 0))
            .unwrap();
        let amb = AmbientStructure::standard(AmbientKind::Real, &sig).unwrap();
        let two = int(2);
        assert_eq!(amb.apply_exact(1, &[&two, &two]), int(4));
        assert_eq!(amb.apply_exact(3, &[]), int(1));
        let bad = Signature::new(vec![Symbol::new("cos", 1)]).unwrap();
        assert!(AmbientStructure::standard(AmbientKind::Real, &bad).is_err());
        assert!(AmbientStructure::standard(AmbientKind::Padic { p: 2 }, &sig).is_err());
    }
}
