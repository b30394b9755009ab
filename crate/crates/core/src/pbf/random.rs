//! Random formulas for round-trip and monotonicity testing.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use super::ast::{Atom, Binding, Formula, Quantifier};
use crate::algebra::{Entourage, Region, Term, ADD, MUL};
use crate::scalar::rat;

#[derive(Debug, Clone)]
pub struct RandomFormulaConfig {
    pub max_prefix: usize,
    pub max_term_depth: usize,
    pub max_disjuncts: usize,
    pub max_conjuncts: usize,
    /// Free variables the matrix may mention besides the bound ones.
    pub free_vars: Vec<String>,
    /// Allow `f(…)`-style applications of symbols other than `+` and `*`.
    pub foreign_symbols: bool,
    /// Allow equality atoms (otherwise every atom is a closeness atom).
    pub equalities: bool,
    /// Every quantifier gets a bound.
    pub bounded: bool,
    /// Allow p-adic balls as bounds.
    pub balls: bool,
    /// Constants and interval endpoints are `k/den` with `|k| ≤ range·den`.
    pub range: i64,
    pub den: i64,
}

impl Default for RandomFormulaConfig {
    fn default() -> Self {
        Self {
            max_prefix: 3,
            max_term_depth: 3,
            max_disjuncts: 3,
            max_conjuncts: 3,
            free_vars: vec!["x".into(), "y".into()],
            foreign_symbols: false,
            equalities: true,
            bounded: true,
            balls: false,
            range: 2,
            den: 4,
        }
    }
}

const BOUND_NAMES: [&str; 6] = ["u", "v", "w", "s", "t", "z"];

fn rational<R: Rng>(rng: &mut R, cfg: &RandomFormulaConfig) -> BigRational {
    let lim = cfg.range * cfg.den;
    rat(rng.gen_range(-lim..=lim), cfg.den)
}

pub fn random_interval<R: Rng>(rng: &mut R, cfg: &RandomFormulaConfig) -> Region {
    loop {
        let (a, b) = (rational(rng, cfg), rational(rng, cfg));
        if a < b {
            return Region::interval(a, b, rng.gen_bool(0.5)).expect("lo < hi");
        }
    }
}

pub fn random_region<R: Rng>(rng: &mut R, cfg: &RandomFormulaConfig) -> Region {
    if cfg.balls && rng.gen_bool(0.25) {
        let p = *[2u64, 3, 5].choose(rng).unwrap();
        let parts = (0..rng.gen_range(1..=2)).map(|_| Region::ball(p, rng.gen_range(-1..=2)).unwrap()).collect();
        return Region::union(parts).unwrap();
    }
    let parts = (0..rng.gen_range(1..=2)).map(|_| random_interval(rng, cfg)).collect();
    Region::union(parts).unwrap()
}

pub fn random_term<R: Rng>(rng: &mut R, vars: &[String], depth: usize, cfg: &RandomFormulaConfig) -> Term {
    if depth == 0 || rng.gen_bool(0.35) {
        return if !vars.is_empty() && rng.gen_bool(0.7) {
            Term::var(vars.choose(rng).unwrap().clone())
        } else {
            Term::Const(rational(rng, cfg))
        };
    }
    let mut sub = || random_term(rng, vars, depth - 1, cfg);
    let (a, b) = (sub(), sub());
    if cfg.foreign_symbols && rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 => Term::app("f", vec![a]),
            1 => Term::app("g", vec![a, b]),
            _ => Term::app("h", vec![]),
        };
    }
    if rng.gen_bool(0.5) {
        Term::app(ADD, vec![a, b])
    } else {
        Term::app(MUL, vec![a, b])
    }
}

pub fn random_atom<R: Rng>(rng: &mut R, vars: &[String], cfg: &RandomFormulaConfig) -> Atom {
    let a = random_term(rng, vars, cfg.max_term_depth, cfg);
    let b = random_term(rng, vars, cfg.max_term_depth, cfg);
    if cfg.equalities && rng.gen_bool(0.4) {
        Atom::Eq(a, b)
    } else {
        let eps = rat(rng.gen_range(1..=3 * cfg.den), 2 * cfg.den);
        Atom::Close(a, b, Entourage::new(eps).unwrap())
    }
}

pub fn random_formula<R: Rng>(rng: &mut R, cfg: &RandomFormulaConfig) -> Formula {
    let m = rng.gen_range(0..=cfg.max_prefix.min(BOUND_NAMES.len()));
    let mut names: Vec<&str> = BOUND_NAMES.to_vec();
    names.shuffle(rng);
    let prefix: Vec<Binding> = names[..m]
        .iter()
        .map(|v| Binding {
            quantifier: if rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists },
            var: v.to_string(),
            bound: (cfg.bounded || rng.gen_bool(0.7)).then(|| random_region(rng, cfg)),
        })
        .collect();
    let mut vars: Vec<String> = cfg.free_vars.clone();
    vars.extend(prefix.iter().map(|b| b.var.clone()));
    let matrix = (0..rng.gen_range(1..=cfg.max_disjuncts))
        .map(|_| (0..rng.gen_range(1..=cfg.max_conjuncts)).map(|_| random_atom(rng, &vars, cfg)).collect())
        .collect();
    Formula::new(prefix, matrix).expect("distinct bound names, nonempty matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_formulas_respect_the_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = RandomFormulaConfig { free_vars: vec![], ..Default::default() };
        for _ in 0..200 {
            let f = random_formula(&mut rng, &cfg);
            assert!(f.is_bounded());
            assert!(f.prefix.len() <= 3);
            assert!(f.free_vars().is_empty());
        }
    }
}
