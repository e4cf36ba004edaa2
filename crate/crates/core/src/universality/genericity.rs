use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boundary::{p_metric, LevelFunction};
use crate::error::{Error, Result};
use crate::harmonic::{linear_combination, product, HarmonicFunction};
use crate::scalar::{Rational, Scalar};
use crate::tree::Tree;
use crate::universality::certify::certify_function;
use crate::universality::targets::ProductTarget;
use crate::universality::witness::{build_ufm_witness, build_x_witness, Witness, XParams};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericityParams {
    pub dim: usize,
    pub block_length: usize,
    pub x: XParams,
    /// Radius of the reference neighborhood `V₀ = B(0, ε₀)`.
    pub reference_epsilon: Rational,
    /// Radius of the foreign product target.
    pub foreign_epsilon: Rational,
    /// Random combinations drawn from each span.
    pub samples: usize,
    pub seed: u64,
    pub horizon: Option<usize>,
    /// Warmup for the U_FM floor; defaults to one full cycle of blocks.
    pub ufm_warmup: Option<usize>,
    pub x_warmup: usize,
    pub floor: Rational,
    pub dip: Rational,
}

impl Default for GenericityParams {
    fn default() -> Self {
        GenericityParams {
            dim: 1,
            block_length: 10,
            x: XParams::default(),
            reference_epsilon: Rational::from_ratio(1, 8),
            foreign_epsilon: Rational::from_ratio(1, 4),
            samples: 5,
            seed: 0,
            horizon: None,
            ufm_warmup: None,
            x_warmup: 5,
            floor: Rational::from_ratio(1, 20),
            dip: Rational::from_ratio(3, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanSample<S> {
    pub coeffs: Vec<S>,
    pub hits: Vec<usize>,
    pub lower_density: Rational,
    pub upper_density: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericityReport<S> {
    pub horizon: usize,
    pub reference_epsilon: Rational,
    /// Some function lies outside the closed reference ball.
    pub reference_non_dense: bool,
    pub f1: Witness<S>,
    pub f2: Witness<S>,
    pub f1_combos: Vec<SpanSample<S>>,
    pub f2_singles: Vec<SpanSample<S>>,
    pub f2_combos: Vec<SpanSample<S>>,
    /// Every sampled F₁ combination has empirical lower density ≥ `floor`.
    pub f1_above_floor: bool,
    /// Every F₂ basis function has prefix-minimum ratio ≤ `dip`.
    pub f2_dips_below: bool,
    /// No sampled F₁ output equals a sampled F₂ output at every vertex.
    pub intersection_empty: bool,
    pub pairs_compared: usize,
}

/// Whether two functions on the same tree differ at some vertex.
pub fn functions_differ<S: Scalar>(tree: &Tree, f: &HarmonicFunction<S>, g: &HarmonicFunction<S>) -> Result<bool> {
    let diff = product(tree, &[f, g], |v| v[0] != v[1])?;
    Ok(diff.levels().iter().flatten().any(|n| n.value))
}

fn coefficient_pool<S: Scalar>() -> Vec<S> {
    [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)]
        .iter()
        .map(|&(n, d)| S::from_ratio(n, d))
        .collect()
}

/// Builds an F₁ sample (a U_FM-style tuple witness) and an F₂ sample (an
/// X-style tuple witness), both steered toward the zero tuple and one
/// foreign tuple, and compares their span elements against `V₀`.
pub fn double_genericity_check<S: Scalar>(tree: &Tree, params: &GenericityParams) -> Result<GenericityReport<S>> {
    let depth = tree.depth();
    let horizon = params.horizon.unwrap_or(depth);
    if horizon > depth || horizon == 0 {
        return Err(Error::InsufficientDepth(format!("horizon {horizon} outside [1, {depth}]")));
    }
    if params.samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let dim = params.dim;
    let zero = LevelFunction::constant(tree, 0, Value::zeros(dim))?;
    let minus_one = LevelFunction::constant(tree, 0, Value::constant(dim, -S::one()))?;
    let root_arity = tree.level_size(1) as usize;
    let split = LevelFunction::new(
        tree,
        1,
        (0..root_arity)
            .map(|i| if i == 0 { Value::constant(dim, -S::one()) } else { Value::zeros(dim) })
            .collect(),
    )?;
    let targets = vec![
        ProductTarget::new(1, vec![zero.clone(), zero.clone()], params.reference_epsilon.clone())?,
        ProductTarget::new(2, vec![minus_one, split], params.foreign_epsilon.clone())?,
    ];
    let f1 = build_ufm_witness(tree, targets.clone(), params.block_length)?;
    let f2 = build_x_witness(tree, targets, &params.x)?;

    let reference = ProductTarget::new(1, vec![zero.clone()], params.reference_epsilon.clone())?;
    let one = LevelFunction::constant(tree, 0, Value::constant(dim, S::one()))?;
    let reference_non_dense = p_metric(tree, &one, &zero)? > S::from_rational(&params.reference_epsilon);
    let ufm_warmup = params.ufm_warmup.unwrap_or(params.block_length * 2).min(horizon - 1);
    let x_warmup = params.x_warmup.min(horizon - 1);

    let sample = |f: &HarmonicFunction<S>, coeffs: Vec<S>, warmup: usize| -> Result<SpanSample<S>> {
        let report = certify_function(tree, f, std::slice::from_ref(&reference), horizon, warmup)?;
        let t = report.targets.into_iter().next().expect("one target");
        Ok(SpanSample {
            coeffs,
            hits: t.hits,
            lower_density: t.lower_density,
            upper_density: t.upper_density,
        })
    };

    let pool = coefficient_pool::<S>();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let draws: Vec<Vec<S>> = (0..params.samples)
        .map(|_| (0..2).map(|_| pool.choose(&mut rng).expect("non-empty").clone()).collect())
        .collect();
    let (f1_basis, f2_basis) = ([f1.component(0), f1.component(1)], [f2.component(0), f2.component(1)]);
    let combine = |basis: &[HarmonicFunction<S>; 2], c: &[S]| linear_combination(tree, c, &[&basis[0], &basis[1]]);

    let mut f1_fns = Vec::new();
    let mut f1_combos = Vec::new();
    for c in &draws {
        let f = combine(&f1_basis, c)?;
        f1_combos.push(sample(&f, c.clone(), ufm_warmup)?);
        f1_fns.push(f);
    }
    let mut f2_fns = Vec::new();
    let mut f2_singles = Vec::new();
    for (k, f) in f2_basis.iter().enumerate() {
        let mut c = vec![S::zero(), S::zero()];
        c[k] = S::one();
        f2_singles.push(sample(f, c, x_warmup)?);
        f2_fns.push(f.clone());
    }
    let mut f2_combos = Vec::new();
    for c in &draws {
        let f = combine(&f2_basis, c)?;
        f2_combos.push(sample(&f, c.clone(), x_warmup)?);
        f2_fns.push(f);
    }

    let mut intersection_empty = true;
    let mut pairs = 0;
    for a in &f1_fns {
        for b in &f2_fns {
            pairs += 1;
            intersection_empty &= functions_differ(tree, a, b)?;
        }
    }
    Ok(GenericityReport {
        horizon,
        reference_epsilon: params.reference_epsilon.clone(),
        reference_non_dense,
        f1_above_floor: f1_combos.iter().all(|s| s.lower_density >= params.floor),
        f2_dips_below: f2_singles.iter().all(|s| s.lower_density <= params.dip),
        f1,
        f2,
        f1_combos,
        f2_singles,
        f2_combos,
        intersection_empty,
        pairs_compared: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_tree, TreeSpec};

    #[test]
    fn binary_depth_forty() {
        let t = build_tree(&TreeSpec::uniform(2, 40)).unwrap();
        let rep = double_genericity_check::<Rational>(&t, &GenericityParams::default()).unwrap();
        assert!(rep.reference_non_dense);
        assert!(rep.f1_above_floor);
        assert!(rep.f2_dips_below);
        assert!(rep.intersection_empty);
        assert_eq!(rep.pairs_compared, 5 * 7);
    }

    #[test]
    fn differ_detects_equal_functions() {
        let t = build_tree(&TreeSpec::uniform(2, 40)).unwrap();
        let rep = double_genericity_check::<Rational>(&t, &GenericityParams::default()).unwrap();
        let f = rep.f1.component(0);
        assert!(!functions_differ(&t, &f, &f).unwrap());
        assert!(functions_differ(&t, &f, &rep.f1.component(1)).unwrap());
    }

    #[test]
    fn too_shallow() {
        let t = build_tree(&TreeSpec::uniform(2, 20)).unwrap();
        assert!(double_genericity_check::<Rational>(&t, &GenericityParams::default()).is_err());
    }
}
