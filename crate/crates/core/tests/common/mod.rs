#![allow(dead_code)]

use harmonic_trees::boundary::{LevelFunction, TupleLevelFunction};
use harmonic_trees::tree::{build_tree, Branching, EdgeRule, Tree, TreeSpec, VertexId};
use harmonic_trees::value::{TupleValue, Value};
use harmonic_trees::{Rational, Scalar};
use rand::Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Random per-vertex branching with random `q` and `w` rows.
pub fn random_tree(rng: &mut impl Rng, depth: usize, max_arity: usize) -> Tree {
    let mut counts = Vec::with_capacity(depth);
    let mut width = 1usize;
    for _ in 0..depth {
        let row: Vec<usize> = (0..width).map(|_| rng.gen_range(2..=max_arity)).collect();
        width = row.iter().sum();
        counts.push(row);
    }
    build_tree(&TreeSpec {
        depth,
        branching: Branching::Explicit { counts },
        q: EdgeRule::Random { max_weight: 6 },
        w: EdgeRule::Random { max_weight: 4 },
        seed: rng.gen(),
    })
    .unwrap()
}

fn random_rows(rng: &mut impl Rng, arities: &[usize]) -> EdgeRule {
    EdgeRule::PerLevel {
        rows: arities
            .iter()
            .map(|&a| {
                let weights: Vec<i64> = (0..a).map(|_| rng.gen_range(1..=6)).collect();
                let total: i64 = weights.iter().sum();
                weights.iter().map(|w| format!("{w}/{total}")).collect()
            })
            .collect(),
    }
}

/// Random layered tree: one random arity and one random row per level.
pub fn random_layered_tree(rng: &mut impl Rng, depth: usize, max_arity: usize) -> Tree {
    let arities: Vec<usize> = (0..depth).map(|_| rng.gen_range(2..=max_arity)).collect();
    build_tree(&TreeSpec {
        depth,
        q: random_rows(rng, &arities),
        w: random_rows(rng, &arities),
        branching: Branching::PerLevel { arities },
        seed: 0,
    })
    .unwrap()
}

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    r(rng.gen_range(-8..=8), rng.gen_range(1..=4))
}

pub fn random_value(rng: &mut impl Rng, dim: usize) -> Value<Rational> {
    Value::new((0..dim).map(|_| random_rational(rng)).collect())
}

pub fn random_level_function(rng: &mut impl Rng, tree: &Tree, level: usize, dim: usize) -> LevelFunction<Rational> {
    let size = tree.level_size(level) as usize;
    LevelFunction::new(tree, level, (0..size).map(|_| random_value(rng, dim)).collect()).unwrap()
}

pub fn random_tuple(rng: &mut impl Rng, tree: &Tree, level: usize, width: usize, dim: usize) -> TupleLevelFunction<Rational> {
    let size = tree.level_size(level) as usize;
    let values = (0..size)
        .map(|_| TupleValue::new((0..width).map(|_| random_value(rng, dim)).collect()).unwrap())
        .collect();
    TupleLevelFunction::new(tree, level, values).unwrap()
}

pub fn vertices(tree: &Tree, level: usize) -> impl Iterator<Item = VertexId> {
    (0..tree.level_size(level)).map(move |o| VertexId::new(level, o))
}
