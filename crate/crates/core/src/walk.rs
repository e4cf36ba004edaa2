//! Level-by-level propagation of sector measure through a [`TreeFunction`].
//!
//! At level `n`, the vertices of `T_n` are grouped into cells by tree class,
//! automaton node, and ancestor on a fixed anchor level. Each cell carries
//! the total measure `Σ p(B_x)` of its vertices, so integrals of
//! `M_n`-measurable quantities that depend only on the node value and the
//! anchor are exact finite sums over cells, however wide `T_n` is.

use indexmap::IndexMap;

use crate::boundary::{p_metric, LevelFunction};
use crate::error::{Error, Result};
use crate::harmonic::{omega, HarmonicFunction, TreeFunction};
use crate::scalar::Scalar;
use crate::tree::{Tree, VertexId};
use crate::value::bounded_metric;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell<S> {
    pub class: usize,
    /// Ancestor on level `min(n, anchor_level)`.
    pub anchor: VertexId,
    pub node: u32,
    pub measure: S,
}

pub struct LevelWalk<'a, S, V> {
    tree: &'a Tree,
    f: &'a TreeFunction<V>,
    anchor_level: usize,
    level: usize,
    cells: Vec<Cell<S>>,
}

impl<'a, S: Scalar, V: Clone + PartialEq> LevelWalk<'a, S, V> {
    pub fn new(tree: &'a Tree, f: &'a TreeFunction<V>, anchor_level: usize) -> Result<Self> {
        if anchor_level > f.depth() {
            return Err(Error::LevelOutOfRange {
                level: anchor_level,
                limit: f.depth(),
            });
        }
        tree.dense_level_size(anchor_level)?;
        Ok(LevelWalk {
            tree,
            f,
            anchor_level,
            level: 0,
            cells: vec![Cell {
                class: 0,
                anchor: VertexId::ROOT,
                node: 0,
                measure: S::one(),
            }],
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn cells(&self) -> &[Cell<S>] {
        &self.cells
    }

    pub fn value(&self, cell: &Cell<S>) -> &V {
        &self.f.node(self.level, cell.node).value
    }

    /// Moves to the next level; `false` once the last level is reached.
    pub fn advance(&mut self) -> bool {
        if self.level == self.f.depth() {
            return false;
        }
        let n = self.level;
        let mut next: IndexMap<(usize, VertexId, u32), S> = IndexMap::new();
        for cell in &self.cells {
            let node = self.f.node(n, cell.node);
            let row = self.tree.class_row(n, cell.class);
            for (slot, q) in row.q().iter().enumerate() {
                let anchor = if n < self.anchor_level {
                    self.tree.child(cell.anchor, slot)
                } else {
                    cell.anchor
                };
                let key = (self.tree.class_child(n, cell.class, slot), anchor, node.children[slot]);
                let m = cell.measure.clone() * S::from_rational(q);
                next.entry(key)
                    .and_modify(|acc| *acc = acc.clone() + m.clone())
                    .or_insert(m);
            }
        }
        self.cells = next
            .into_iter()
            .map(|((class, anchor, node), measure)| Cell {
                class,
                anchor,
                node,
                measure,
            })
            .collect();
        self.level += 1;
        true
    }

    /// `Σ_cells measure · eval(value, anchor)` on every level in `from..=to`.
    pub fn integrate(
        mut self,
        from: usize,
        to: usize,
        mut eval: impl FnMut(&V, VertexId) -> Result<S>,
    ) -> Result<Vec<S>> {
        if to > self.f.depth() {
            return Err(Error::LevelOutOfRange {
                level: to,
                limit: self.f.depth(),
            });
        }
        let mut out = Vec::new();
        while self.level < from {
            self.advance();
        }
        loop {
            let mut total = S::zero();
            for cell in &self.cells {
                total = total + cell.measure.clone() * eval(self.value(cell), cell.anchor)?;
            }
            out.push(total);
            if self.level == to {
                break;
            }
            self.advance();
        }
        Ok(out)
    }
}

/// `P(ω_n(f), χ)` for `n = 0..=horizon`.
pub fn p_metric_series<S: Scalar>(
    tree: &Tree,
    f: &HarmonicFunction<S>,
    chi: &LevelFunction<S>,
    horizon: usize,
) -> Result<Vec<S>> {
    if horizon > f.depth() {
        return Err(Error::LevelOutOfRange {
            level: horizon,
            limit: f.depth(),
        });
    }
    let k = chi.level().min(horizon);
    let mut out = Vec::with_capacity(horizon + 1);
    for n in 0..k {
        out.push(p_metric(tree, &omega(tree, f, n)?, chi)?);
    }
    if chi.level() > horizon {
        out.push(p_metric(tree, &omega(tree, f, horizon)?, chi)?);
        return Ok(out);
    }
    let walk = LevelWalk::new(tree, f, k)?;
    out.extend(walk.integrate(k, horizon, |v, anchor| {
        bounded_metric(v, &chi.values()[anchor.offset as usize])
    })?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::LevelFunctionEnumerator;
    use crate::harmonic::enumerate_dense_harmonics;
    use crate::scalar::Rational;
    use crate::tree::{build_tree, Branching, EdgeRule, TreeSpec};
    use crate::value::GridParams;

    fn random_tree(seed: u64, depth: usize) -> Tree {
        build_tree(&TreeSpec {
            depth,
            branching: Branching::PerLevel {
                arities: (0..depth).map(|n| 2 + (n % 2)).collect(),
            },
            q: EdgeRule::Random { max_weight: 5 },
            w: EdgeRule::Random { max_weight: 3 },
            seed,
        })
        .unwrap()
    }

    #[test]
    fn series_matches_dense_p_metric() {
        let t = random_tree(3, 5);
        let targets: Vec<_> = LevelFunctionEnumerator::<Rational>::new(&t, GridParams::default(), 2)
            .unwrap()
            .take(12)
            .collect();
        for idx in [2, 7, 19] {
            let f = enumerate_dense_harmonics::<Rational>(&t, idx, GridParams::default(), 5).unwrap();
            for chi in &targets {
                let series = p_metric_series(&t, &f, chi, 5).unwrap();
                for n in 0..=5 {
                    let dense = p_metric(&t, &omega(&t, &f, n).unwrap(), chi).unwrap();
                    assert_eq!(series[n], dense, "level {n}");
                }
            }
        }
    }

    #[test]
    fn cell_measures_sum_to_one() {
        let t = random_tree(9, 6);
        let f = enumerate_dense_harmonics::<Rational>(&t, 11, GridParams::default(), 6).unwrap();
        let mut walk = LevelWalk::<Rational, _>::new(&t, &f, 2).unwrap();
        loop {
            let total = walk.cells().iter().fold(Rational::zero(), |a, c| a + c.measure.clone());
            assert_eq!(total, Rational::one());
            if !walk.advance() {
                break;
            }
        }
        assert_eq!(walk.level(), 6);
    }

    #[test]
    fn deep_layered_walk_stays_small() {
        let t = build_tree(&TreeSpec::uniform(2, 60)).unwrap();
        let f = enumerate_dense_harmonics::<Rational>(&t, 5, GridParams::default(), 60).unwrap();
        let zero = LevelFunction::constant(&t, 0, crate::value::Value::scalar(Rational::zero())).unwrap();
        let series = p_metric_series(&t, &f, &zero, 60).unwrap();
        assert_eq!(series.len(), 61);
        assert_eq!(series[60], series[2]);
    }
}
