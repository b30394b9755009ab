//! Balanced modular fixed point `A'_{M,ε} = {kε : −M ≤ k ≤ M}`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::algebra::{table_from_fn, AmbientKind, AmbientStructure, ElemId, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::scalar::format_rational;

pub const MODULAR_CARRIER_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularParams {
    pub m: u64,
    pub epsilon: BigRational,
    eps_num: i128,
    eps_den: i128,
}

impl ModularParams {
    pub fn new(m: u64, epsilon: BigRational) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("M must be positive"));
        }
        if !epsilon.is_positive() {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if 2 * m + 1 > MODULAR_CARRIER_LIMIT {
            return Err(Error::LimitExceeded { size: 2 * m as u128 + 1, limit: MODULAR_CARRIER_LIMIT as u128 });
        }
        let to_small = |b: &BigInt| b.to_i128().filter(|v| v.abs() < 1 << 40);
        let (eps_num, eps_den) = match (to_small(epsilon.numer()), to_small(epsilon.denom())) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(Error::invalid("epsilon numerator and denominator must stay below 2^40")),
        };
        Ok(Self { m, epsilon, eps_num, eps_den })
    }

    /// `N = 2M + 1`.
    pub fn modulus(&self) -> i128 {
        2 * self.m as i128 + 1
    }

    pub fn size(&self) -> usize {
        self.modulus() as usize
    }

    /// Carrier id `i` holds `k = i − M`.
    pub fn k_of(&self, id: ElemId) -> i64 {
        id as i64 - self.m as i64
    }

    pub fn id_of(&self, k: i64) -> ElemId {
        (k + self.m as i64) as ElemId
    }

    pub fn value(&self, k: i64) -> BigRational {
        BigRational::from_integer(k.into()) * &self.epsilon
    }

    fn balanced(&self, x: i128) -> i64 {
        let n = self.modulus();
        let r = x.rem_euclid(n);
        (if r > self.m as i128 { r - n } else { r }) as i64
    }
}

/// `(k + m) mod N`, balanced into `[−M, M]`.
pub fn mod_add(k: i64, m: i64, params: &ModularParams) -> i64 {
    params.balanced(k as i128 + m as i128)
}

/// `[k·m·ε] mod N` with `[·]` the floor, balanced into `[−M, M]`.
pub fn mod_mul(k: i64, m: i64, params: &ModularParams) -> i64 {
    let t = k as i128 * m as i128 * params.eps_num;
    params.balanced(Integer::div_floor(&t, &params.eps_den))
}

pub fn build_modular(params: &ModularParams) -> Result<FiniteAlgebra> {
    let amb = Arc::new(AmbientStructure::field(AmbientKind::Real));
    let n = params.size();
    let (pa, pm) = (params.clone(), params.clone());
    let add = table_from_fn(n, 2, move |a| pa.id_of(mod_add(pa.k_of(a[0]), pa.k_of(a[1]), &pa)));
    let mul = table_from_fn(n, 2, move |a| pm.id_of(mod_mul(pm.k_of(a[0]), pm.k_of(a[1]), &pm)));
    let values = (0..n as ElemId).map(|i| params.value(params.k_of(i))).collect();
    let label = format!("A'(M={}, eps={})", params.m, format_rational(&params.epsilon));
    FiniteAlgebra::new(label, amb, n, vec![add, mul], values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_approximation, law_search, Entourage, Law, Region};
    use crate::scalar::{int, rat};

    fn mp(m: u64, eps: BigRational) -> ModularParams {
        ModularParams::new(m, eps).unwrap()
    }

    #[test]
    fn worked_values() {
        let p = mp(2, rat(1, 2));
        assert_eq!(mod_add(2, 1, &p), -2);
        assert_eq!(p.value(mod_add(2, 1, &p)), int(-1));
        assert_eq!(mod_mul(2, 2, &p), 2);
        assert_eq!(p.value(2), int(1));
        for k in -2..=2 {
            assert_eq!(mod_add(0, k, &p), k);
        }
        // floor, not truncation, for negative products
        assert_eq!(mod_mul(-1, 1, &p), -1);
    }

    #[test]
    fn is_an_approximation() {
        for (m, eps) in [(4, rat(1, 2)), (10, rat(1, 4)), (20, rat(1, 10)), (7, rat(1, 3))] {
            let p = mp(m, eps.clone());
            let alg = build_modular(&p).unwrap();
            let a = p.value(m as i64);
            let c = Region::closed(-a.clone(), a).unwrap();
            let r = check_approximation(&alg, &c, &Entourage::new(eps).unwrap()).unwrap();
            assert!(r.ok(), "M={m}: {r:?}");
        }
    }

    #[test]
    fn additive_group_but_not_a_ring() {
        let alg = build_modular(&mp(10, rat(1, 4))).unwrap();
        assert!(law_search(&alg, &"comm-add".parse::<Law>().unwrap(), None).unwrap().is_none());
        assert!(law_search(&alg, &"assoc-add".parse::<Law>().unwrap(), None).unwrap().is_none());
        assert!(law_search(&alg, &"distrib".parse::<Law>().unwrap(), None).unwrap().is_some());
        assert!(law_search(&alg, &"assoc-mul".parse::<Law>().unwrap(), None).unwrap().is_some());
    }

    #[test]
    fn corrupted_table_is_caught() {
        let p = mp(2, rat(1, 2));
        let alg = build_modular(&p).unwrap();
        let one = p.id_of(1);
        let bad = alg.with_entry("+", &[one, one], p.id_of(-1)).unwrap();
        let c = Region::closed(int(-1), int(1)).unwrap();
        let r = check_approximation(&bad, &c, &Entourage::new(rat(1, 2)).unwrap()).unwrap();
        assert!(!r.hom_ok);
        assert!(r.hom_violations.iter().any(|v| v.args == vec![one, one]));
    }
}
