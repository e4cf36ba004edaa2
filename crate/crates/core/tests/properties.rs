mod common;

use common::*;
use harmonic_trees::boundary::{p_metric, refine, tuple_p_metric, tuple_p_metric_by_components, LevelFunction};
use harmonic_trees::harmonic::{
    aggregate_upward, check_harmonic, extend_constant, linear_combination, omega, truncate_and_extend,
};
use harmonic_trees::universality::refine_mismatch;
use harmonic_trees::value::Value;
use harmonic_trees::{Rational, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn p_metric_axioms(seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = random_tree(&mut g, 4, 3);
        let dim = g.gen_range(1..=2);
        let [a, b, c] = [0, 1, 2].map(|_| {
            let lvl = g.gen_range(0..=4);
            random_level_function(&mut g, &t, lvl, dim)
        });
        let zero = Rational::zero();
        prop_assert_eq!(p_metric(&t, &a, &a).unwrap(), zero.clone());
        let ab = p_metric(&t, &a, &b).unwrap();
        prop_assert_eq!(ab.clone(), p_metric(&t, &b, &a).unwrap());
        prop_assert!(ab >= zero && ab <= Rational::one());
        let bc = p_metric(&t, &b, &c).unwrap();
        prop_assert!(p_metric(&t, &a, &c).unwrap() <= ab.clone() + bc);
        let shift = c.clone();
        let moved = p_metric(&t, &a.add(&t, &shift).unwrap(), &b.add(&t, &shift).unwrap()).unwrap();
        prop_assert_eq!(moved, ab.clone());
        let fine = a.level().max(b.level()) + g.gen_range(0..=4 - a.level().max(b.level()));
        let refined = p_metric(&t, &refine(&t, &a, fine).unwrap(), &refine(&t, &b, fine).unwrap()).unwrap();
        prop_assert_eq!(refined, ab);
    }

    #[test]
    fn tuple_metric_decomposes(seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = random_layered_tree(&mut g, 4, 3);
        let width = g.gen_range(1..=4);
        let (la, lb) = (g.gen_range(0..=3), g.gen_range(0..=3));
        let a = random_tuple(&mut g, &t, la, width, 1);
        let b = random_tuple(&mut g, &t, lb, width, 1);
        prop_assert_eq!(
            tuple_p_metric(&t, &a, &b).unwrap(),
            tuple_p_metric_by_components(&t, &a, &b).unwrap()
        );
    }

    #[test]
    fn omega_is_linear(seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = random_tree(&mut g, 4, 3);
        let f = extend_constant(&t, &aggregate_upward(&t, &random_level_function(&mut g, &t, 3, 1)).unwrap(), 4).unwrap();
        let h = extend_constant(&t, &aggregate_upward(&t, &random_level_function(&mut g, &t, 2, 1)).unwrap(), 4).unwrap();
        let (a, b) = (random_rational(&mut g), random_rational(&mut g));
        let combo = linear_combination(&t, &[a.clone(), b.clone()], &[&f, &h]).unwrap();
        prop_assert!(check_harmonic::<Rational, _>(&t, &combo).passes());
        for n in 0..=4 {
            let lhs = omega(&t, &combo, n).unwrap();
            let rhs = omega(&t, &f, n).unwrap().scale(&a).add(&t, &omega(&t, &h, n).unwrap().scale(&b)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn constructors_are_harmonic(seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = random_tree(&mut g, 5, 3);
        let leaves = random_level_function(&mut g, &t, 4, 2);
        let f = aggregate_upward(&t, &leaves).unwrap();
        prop_assert!(check_harmonic::<Rational, _>(&t, &f).passes());
        prop_assert_eq!(omega(&t, &f, 4).unwrap(), leaves);
        let f = extend_constant(&t, &f, 5).unwrap();
        prop_assert!(check_harmonic::<Rational, _>(&t, &f).passes());
        let p = extend_constant(&t, &aggregate_upward(&t, &random_level_function(&mut g, &t, 3, 2)).unwrap(), 5).unwrap();
        let cut = g.gen_range(0..=5);
        let gfun = truncate_and_extend(&t, &p, &f, cut).unwrap();
        prop_assert!(check_harmonic::<Rational, _>(&t, &gfun).passes());
        let sum = linear_combination(&t, &[Rational::one(), Rational::one()], &[&f, &gfun]).unwrap();
        for n in 0..=cut {
            prop_assert_eq!(omega(&t, &sum, n).unwrap(), omega(&t, &p, n).unwrap());
        }
    }

    #[test]
    fn refinement_shrinks_by_absorbing_probability(seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = random_layered_tree(&mut g, 7, 3);
        let target = random_level_function(&mut g, &t, 1, 1);
        let start = random_level_function(&mut g, &t, 2, 1);
        let res = refine_mismatch(&t, &start, &target, 5).unwrap();
        let initial = res.log[0].mismatch.clone();
        let mut product = Rational::one();
        for (k, step) in res.log.iter().enumerate() {
            product = product * step.absorbing_q_max.clone();
            prop_assert!(step.mismatch <= product.clone() * initial.clone());
            prop_assert!(product <= Rational::half_pow(k));
        }
        for (step, level) in res.log[1..].iter().zip(&res.levels) {
            prop_assert!(p_metric(&t, level, &target).unwrap() <= step.mismatch);
        }
    }
}

#[test]
fn zero_mismatch_stays_zero() {
    let mut g = rng(5);
    let t = random_layered_tree(&mut g, 5, 3);
    let target = random_level_function(&mut g, &t, 1, 1);
    let start = refine(&t, &target, 2).unwrap();
    let res = refine_mismatch(&t, &start, &target, 3).unwrap();
    assert!(res.log.iter().all(|s| s.mismatch.is_zero()));
}

#[test]
fn unit_gap_between_constants() {
    let mut g = rng(9);
    let t = random_tree(&mut g, 3, 3);
    let a = LevelFunction::constant(&t, 0, Value::scalar(r(0, 1))).unwrap();
    let b = LevelFunction::constant(&t, 0, Value::scalar(r(1, 1))).unwrap();
    assert_eq!(p_metric(&t, &a, &b).unwrap(), r(1, 2));
}
