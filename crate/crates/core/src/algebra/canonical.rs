//! The canonical finite `(C, W)`-approximation: a uniform grid whose
//! operations round exact results to the nearest grid point.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::ambient::{AmbientOp, AmbientStructure};
use super::finite::{table_from_fn, ElemId, FiniteAlgebra, OpTable};
use super::region::{AmbientKind, Entourage, Region};
use crate::error::{Error, Result};
use crate::padic::{build_hmn, HmnParams};
use crate::scalar::{format_rational, int, round_ties_to_zero};

/// Largest carrier a canonical grid may have.
pub const CANONICAL_CARRIER_LIMIT: u128 = 20_000_000;

/// Nearest integer to `num / den` (`den > 0`), ties toward zero.
pub(crate) fn round_div_ties_to_zero(num: i128, den: i128) -> i128 {
    let q = num.div_euclid(den);
    let r = num - q * den;
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if num >= 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

/// A uniform grid `{k·step : k_min ≤ k ≤ k_max}`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub step: BigRational,
    pub k_min: i64,
    pub k_max: i64,
    step_num: i128,
    step_den: i128,
}

impl Grid {
    pub fn new(step: BigRational, k_min: i64, k_max: i64) -> Result<Self> {
        if !step.is_positive() || k_min > k_max {
            return Err(Error::invalid("grid needs a positive step and k_min ≤ k_max"));
        }
        let step_num = step.numer().to_i128().ok_or_else(|| Error::invalid("grid step too large"))?;
        let step_den = step.denom().to_i128().ok_or_else(|| Error::invalid("grid step too fine"))?;
        Ok(Self { step, k_min, k_max, step_num, step_den })
    }

    /// The grid over a slight enlargement of `[lo, hi]`.
    pub fn covering(lo: &BigRational, hi: &BigRational, step: BigRational) -> Result<Self> {
        let k_min: BigInt = (lo / &step).floor().to_integer() - 1;
        let k_max: BigInt = (hi / &step).ceil().to_integer() + 1;
        let k_min = k_min.to_i64().ok_or_else(|| Error::invalid("grid too large"))?;
        let k_max = k_max.to_i64().ok_or_else(|| Error::invalid("grid too large"))?;
        Self::new(step, k_min, k_max)
    }

    pub fn size(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn k_of(&self, id: ElemId) -> i64 {
        self.k_min + id as i64
    }

    pub fn id_of_clamped(&self, k: i128) -> ElemId {
        (k.clamp(self.k_min as i128, self.k_max as i128) - self.k_min as i128) as ElemId
    }

    pub fn value(&self, id: ElemId) -> BigRational {
        BigRational::from_integer(BigInt::from(self.k_of(id))) * &self.step
    }

    /// Nearest grid point to `x`, ties toward zero, clamped to the ends.
    pub fn nearest(&self, x: &BigRational) -> ElemId {
        let k = round_ties_to_zero(&(x / &self.step));
        let k = k.to_i128().unwrap_or(if x.is_negative() { i128::MIN / 4 } else { i128::MAX / 4 });
        self.id_of_clamped(k)
    }

    /// Index of `round(ka·kb·step)`, exact when the product fits `i128`.
    pub fn mul_index(&self, ka: i64, kb: i64) -> ElemId {
        let prod = (ka as i128)
            .checked_mul(kb as i128)
            .and_then(|p| p.checked_mul(self.step_num));
        match prod {
            Some(t) => self.id_of_clamped(round_div_ties_to_zero(t, self.step_den)),
            None => {
                let exact = BigRational::from_integer(BigInt::from(ka) * BigInt::from(kb)) * &self.step;
                self.nearest(&exact)
            }
        }
    }
}

/// The canonical `(C, W)`-approximation of `ambient`.
///
/// Over the reals the carrier is a `step`-spaced grid over a slight
/// enlargement of `C`; each table entry is the grid point nearest to the
/// exact result (ties toward zero), clamped at the grid's ends. Over `Q_p`
/// the carrier is `H_{m,n}` (or `K_n` when `m = 0`).
pub fn canonical_approximation(
    ambient: Arc<AmbientStructure>,
    c: &Region,
    w: &Entourage,
    step: &BigRational,
) -> Result<FiniteAlgebra> {
    c.check_kind(&ambient.kind())?;
    match ambient.kind() {
        AmbientKind::Real => {
            if step >= &w.epsilon {
                return Err(Error::invalid(format!(
                    "step {} must be smaller than epsilon {}",
                    format_rational(step),
                    format_rational(&w.epsilon)
                )));
            }
            let (lo, hi) = c.hull().expect("real region");
            let grid = Grid::covering(&lo, &hi, step.clone())?;
            grid_algebra(ambient, grid, &w.epsilon)
        }
        AmbientKind::Padic { p } => {
            let (_, m) = c.ball_radius().expect("p-adic region");
            let n = w.padic_level(p)?;
            if m < 0 || n < 1 {
                return Err(Error::invalid("p-adic canonical approximation needs m ≥ 0 and n ≥ 1"));
            }
            if ambient.signature() != &super::Signature::ring() {
                return Err(Error::invalid("p-adic canonical approximation supports ⟨+, ×⟩ only"));
            }
            build_hmn(&HmnParams::new(p, m as u32, n as u32)?)
        }
    }
}

/// A grid algebra for `ambient` on an explicit grid.
pub fn grid_algebra(ambient: Arc<AmbientStructure>, grid: Grid, eps: &BigRational) -> Result<FiniteAlgebra> {
    let size = grid.size() as u128;
    if size > CANONICAL_CARRIER_LIMIT {
        return Err(Error::LimitExceeded { size, limit: CANONICAL_CARRIER_LIMIT });
    }
    let size = size as usize;
    let grid = Arc::new(grid);
    let mut tables = Vec::new();
    for (index, sym) in ambient.signature().symbols().iter().enumerate() {
        let g = grid.clone();
        let table = match ambient.op(index).clone() {
            AmbientOp::Add => table_from_fn(size, 2, move |a| {
                g.id_of_clamped(g.k_of(a[0]) as i128 + g.k_of(a[1]) as i128)
            }),
            AmbientOp::Mul => table_from_fn(size, 2, move |a| g.mul_index(g.k_of(a[0]), g.k_of(a[1]))),
            AmbientOp::Neg => table_from_fn(size, 1, move |a| g.id_of_clamped(-(g.k_of(a[0]) as i128))),
            AmbientOp::Const(c) => OpTable::Dense(Arc::new(vec![grid.nearest(&c)])),
            AmbientOp::Unary(f) => {
                let cache: Arc<Vec<OnceLock<ElemId>>> = Arc::new((0..size).map(|_| OnceLock::new()).collect());
                let tol0 = &g.step / int(64);
                let name = sym.name.clone();
                OpTable::Rule(Arc::new(move |a| {
                    *cache[a[0] as usize].get_or_init(|| {
                        let x = g.value(a[0]);
                        let mut tol = tol0.clone();
                        for _ in 0..40 {
                            let e = f.eval(&x, &tol);
                            let lo = g.nearest(&e.lower());
                            if lo == g.nearest(&e.upper()) {
                                return lo;
                            }
                            tol /= int(1024);
                        }
                        panic!("{name}({x}) sits on a rounding boundary beyond oracle precision");
                    })
                }))
            }
        };
        tables.push(table);
    }
    let values = (0..size as ElemId).map(|i| grid.value(i)).collect();
    let label = format!(
        "grid(step={}, [{}, {}], eps={})",
        format_rational(&grid.step),
        format_rational(&grid.value(0)),
        format_rational(&grid.value(size as ElemId - 1)),
        format_rational(eps)
    );
    FiniteAlgebra::new(label, ambient, size, tables, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_approximation, check_restriction_monotone};
    use crate::scalar::rat;

    fn real() -> Arc<AmbientStructure> {
        Arc::new(AmbientStructure::field(AmbientKind::Real))
    }

    #[test]
    fn rounding_helper() {
        assert_eq!(round_div_ties_to_zero(5, 2), 2);
        assert_eq!(round_div_ties_to_zero(-5, 2), -2);
        assert_eq!(round_div_ties_to_zero(7, 4), 2);
        assert_eq!(round_div_ties_to_zero(-7, 4), -2);
        assert_eq!(round_div_ties_to_zero(1, 3), 0);
        assert_eq!(round_div_ties_to_zero(-2, 3), -1);
    }

    #[test]
    fn product_clamps_to_grid_max() {
        // the grid over [-2, 2] with step 1/2 is enlarged by one step; pin it to [-2, 2]
        let grid = Grid::new(rat(1, 2), -4, 4).unwrap();
        let alg = grid_algebra(real(), grid.clone(), &rat(1, 2)).unwrap();
        let three_halves = grid.nearest(&rat(3, 2));
        let r = alg.binary(1, three_halves, three_halves);
        assert_eq!(alg.value(r), &int(2));
    }

    #[test]
    fn step_must_be_below_epsilon() {
        let c = Region::closed(int(-1), int(1)).unwrap();
        let w = Entourage::new(rat(1, 4)).unwrap();
        assert!(canonical_approximation(real(), &c, &w, &rat(1, 4)).is_err());
        assert!(canonical_approximation(real(), &c, &w, &rat(1, 5)).is_ok());
    }

    #[test]
    fn on_grid_results_are_exact() {
        let c = Region::closed(int(-2), int(2)).unwrap();
        let w = Entourage::new(rat(1, 10)).unwrap();
        let alg = canonical_approximation(real(), &c, &w, &rat(1, 20)).unwrap();
        let e = alg.embedding();
        let a = e.nearest(&rat(3, 4)).unwrap();
        let b = e.nearest(&rat(1, 2)).unwrap();
        assert_eq!(alg.value(alg.binary(0, a, b)), &rat(5, 4));
        assert_eq!(alg.value(alg.binary(1, a, b)), &rat(3, 8).min(rat(7, 20)).max(rat(7, 20)));
    }

    #[test]
    fn canonical_passes_its_own_check() {
        for (lo, hi, eps, step) in [
            (-2, 2, rat(1, 2), rat(1, 4)),
            (-1, 3, rat(1, 3), rat(1, 5)),
            (0, 1, rat(1, 10), rat(1, 11)),
            (-3, 3, rat(1, 4), rat(3, 16)),
        ] {
            let c = Region::closed(int(lo), int(hi)).unwrap();
            let w = Entourage::new(eps).unwrap();
            let alg = canonical_approximation(real(), &c, &w, &step).unwrap();
            let r = check_approximation(&alg, &c, &w).unwrap();
            assert!(r.ok(), "{r:?}");
        }
    }

    #[test]
    fn restriction_to_smaller_region_and_larger_entourage() {
        let c = Region::closed(int(-4), int(4)).unwrap();
        let w = Entourage::new(rat(1, 4)).unwrap();
        let alg = canonical_approximation(real(), &c, &w, &rat(1, 8)).unwrap();
        let c2 = Region::closed(int(-2), int(2)).unwrap();
        let w2 = Entourage::new(rat(1, 2)).unwrap();
        assert!(check_restriction_monotone(&alg, &c, &w, &c2, &w2).unwrap());
        assert!(check_restriction_monotone(&alg, &c, &w, &c, &w).unwrap());
        assert!(matches!(
            check_restriction_monotone(&alg, &c2, &w2, &c, &w),
            Err(Error::Premise(_))
        ));
    }
}
