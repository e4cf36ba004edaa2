use serde::{Deserialize, Serialize};

use crate::boundary::{LevelFunction, LevelFunctionEnumerator, TupleLevelFunction};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::tree::Tree;
use crate::value::GridParams;

/// Neighborhood `B(χ, ε)` of a level function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target<S> {
    pub index: usize,
    pub level_function: LevelFunction<S>,
    pub epsilon: Rational,
}

/// Box neighborhood `Π_k B(χ_k, ε)` in `L⁰(∂T, E)^m`. A tuple function hits
/// it when every component hits its own ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductTarget<S> {
    pub index: usize,
    pub components: Vec<LevelFunction<S>>,
    pub epsilon: Rational,
}

/// The level and radius of a target, which are all schedules need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetShape {
    pub level: usize,
    pub epsilon: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EpsilonLadder {
    /// `ε_i = 2^{-i}`.
    #[default]
    Halving,
    Fixed {
        epsilon: String,
    },
    List {
        values: Vec<String>,
    },
}

pub(crate) fn check_epsilon(eps: &Rational) -> Result<()> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidArgument(format!("epsilon {eps} outside (0, 1)")));
    }
    Ok(())
}

impl EpsilonLadder {
    /// Radius of the `i`-th target, counting from 1.
    pub fn epsilon(&self, i: usize) -> Result<Rational> {
        let eps = match self {
            EpsilonLadder::Halving => Rational::half_pow(i),
            EpsilonLadder::Fixed { epsilon } => parse_rational(epsilon)?,
            EpsilonLadder::List { values } => parse_rational(values.get(i - 1).ok_or_else(|| {
                Error::InvalidArgument(format!("epsilon list has {} entries, need {i}", values.len()))
            })?)?,
        };
        check_epsilon(&eps)?;
        Ok(eps)
    }
}

/// The first `count` members of the diagonal level-function enumeration,
/// each paired with a radius from `ladder`.
pub fn enumerate_targets<S: Scalar>(
    tree: &Tree,
    grid: GridParams,
    count: usize,
    ladder: &EpsilonLadder,
) -> Result<Vec<Target<S>>> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one target".into()));
    }
    let fns: Vec<_> = LevelFunctionEnumerator::<S>::new(tree, grid, tree.depth())?
        .take(count)
        .collect();
    if fns.len() < count {
        return Err(Error::InvalidArgument(format!(
            "enumeration exhausted after {} targets",
            fns.len()
        )));
    }
    fns.into_iter()
        .enumerate()
        .map(|(i, level_function)| {
            Ok(Target {
                index: i + 1,
                level_function,
                epsilon: ladder.epsilon(i + 1)?,
            })
        })
        .collect()
}

impl<S: Scalar> Target<S> {
    pub fn shape(&self) -> TargetShape {
        TargetShape {
            level: self.level_function.level(),
            epsilon: self.epsilon.clone(),
        }
    }
}

impl<S: Scalar> ProductTarget<S> {
    pub fn new(index: usize, components: Vec<LevelFunction<S>>, epsilon: Rational) -> Result<Self> {
        check_epsilon(&epsilon)?;
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("product target needs a component".into()))?;
        if let Some(c) = components.iter().find(|c| c.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: c.dim(),
            });
        }
        Ok(ProductTarget {
            index,
            components,
            epsilon,
        })
    }

    pub fn scalar(target: &Target<S>) -> Self {
        ProductTarget {
            index: target.index,
            components: vec![target.level_function.clone()],
            epsilon: target.epsilon.clone(),
        }
    }

    pub fn width(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn level(&self) -> usize {
        self.components.iter().map(LevelFunction::level).max().unwrap_or(0)
    }

    pub fn shape(&self) -> TargetShape {
        TargetShape {
            level: self.level(),
            epsilon: self.epsilon.clone(),
        }
    }

    pub fn tuple(&self, tree: &Tree) -> Result<TupleLevelFunction<S>> {
        TupleLevelFunction::from_components(tree, &self.components)
    }
}

/// Groups consecutive targets into product targets of the given width;
/// each group takes the smallest radius among its members.
pub fn product_targets<S: Scalar>(targets: &[Target<S>], width: usize) -> Result<Vec<ProductTarget<S>>> {
    if width == 0 || targets.is_empty() || targets.len() % width != 0 {
        return Err(Error::InvalidArgument(format!(
            "{} targets do not split into groups of {width}",
            targets.len()
        )));
    }
    targets
        .chunks(width)
        .enumerate()
        .map(|(i, group)| {
            let eps = group.iter().map(|t| t.epsilon.clone()).min().expect("non-empty");
            ProductTarget::new(i + 1, group.iter().map(|t| t.level_function.clone()).collect(), eps)
        })
        .collect()
}
