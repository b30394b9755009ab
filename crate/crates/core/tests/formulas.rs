mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use finapprox::algebra::{ElemId, Region};
use finapprox::pbf::random::{random_formula, RandomFormulaConfig};
use finapprox::pbf::{eval_finite, format_formula, parse_formula, parse_formula_with, ParseOptions};
use finapprox::scalar::rat;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn evaluator_matches_expansion(seed in any::<u64>()) {
        prop_assert_eq!(evaluator_disagreements(&mut rng(seed), 1), 0);
    }

    #[test]
    fn truth_survives_larger_entourages(seed in any::<u64>()) {
        prop_assert_eq!(count_violations(&mut rng(seed), 1, monotone_in_eps), 0);
    }

    #[test]
    fn truth_survives_widened_bounds(seed in any::<u64>()) {
        prop_assert_eq!(count_violations(&mut rng(seed), 1, monotone_in_bounds), 0);
    }

    #[test]
    fn equalities_imply_their_relaxation(seed in any::<u64>()) {
        prop_assert_eq!(count_violations(&mut rng(seed), 1, positivity), 0);
    }

    #[test]
    fn closed_form_truth_survives_strong_approximation(seed in any::<u64>()) {
        prop_assert_eq!(count_violations(&mut rng(seed), 1, monotone_over_reals), 0);
    }

    #[test]
    fn format_then_parse_is_identity(seed in any::<u64>(), foreign in any::<bool>(), balls in any::<bool>()) {
        let cfg = RandomFormulaConfig { foreign_symbols: foreign, balls, bounded: false, ..Default::default() };
        let phi = random_formula(&mut rng(seed), &cfg);
        let text = format_formula(&phi);
        let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, phi, "{}", text);
    }

    #[test]
    fn indexed_embedding_matches_linear_scans(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = random_algebra(&mut r, 12, false);
        for _ in 0..8 {
            let x = rat(rand::Rng::gen_range(&mut r, -40..=40), 8);
            let got = alg.embedding().nearest(&x).unwrap();
            prop_assert_eq!(got, nearest_linear(&alg, &x));
        }
        let cfg = RandomFormulaConfig::default();
        for _ in 0..8 {
            let reg = finapprox::pbf::random::random_region(&mut r, &cfg);
            prop_assert_eq!(alg.embedding().preimage(&reg), preimage_linear(&alg, &reg));
        }
    }

    #[test]
    fn padic_nearest_matches_linear_scan(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = random_algebra(&mut r, 12, true);
        for _ in 0..8 {
            let x = rat(rand::Rng::gen_range(&mut r, -40..=40), 1 << rand::Rng::gen_range(&mut r, 0..3));
            prop_assert_eq!(alg.embedding().nearest(&x).unwrap(), nearest_linear(&alg, &x));
            let reg = Region::ball(2, rand::Rng::gen_range(&mut r, -2..=2)).unwrap();
            prop_assert_eq!(alg.embedding().preimage(&reg), preimage_linear(&alg, &reg));
        }
    }
}

#[test]
fn vacuous_quantifiers() {
    let alg = random_algebra(&mut rng(1), 6, false);
    let none = BTreeMap::<String, ElemId>::new();
    // no carrier value lies above 3
    let ex = parse_formula("exists z in (7, 8) : z = z").unwrap();
    let all = parse_formula("forall z in (7, 8) : z = 0").unwrap();
    assert!(!eval_finite(&ex, &alg, &none).unwrap().value);
    assert!(eval_finite(&all, &alg, &none).unwrap().value);
    assert!(!brute_force_eval(&ex, &alg, &none));
    assert!(brute_force_eval(&all, &alg, &none));
}

#[test]
fn dnf_normalization_matches_explicit_form() {
    let nested = parse_formula_with("exists z in [-1, 1] : (z = x or z = y) and close(z, 0, 1/2)", ParseOptions { normalize_dnf: true })
        .unwrap();
    let flat = parse_formula("exists z in [-1, 1] : z = x and close(z, 0, 1/2) or z = y and close(z, 0, 1/2)").unwrap();
    let mut r = rng(3);
    for _ in 0..50 {
        let alg = random_algebra(&mut r, 10, false);
        let env = random_assignment(&mut r, &flat, &alg);
        assert_eq!(eval_finite(&nested, &alg, &env).unwrap().value, brute_force_eval(&flat, &alg, &env));
    }
}
