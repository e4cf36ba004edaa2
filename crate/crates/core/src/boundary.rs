//! Level functions on `∂T` (functions constant on every sector `B_x`,
//! `x ∈ T_n`) and the convergence-in-probability metric between them,
//! evaluated as an exact finite sum after common refinement.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{Tree, VertexId};
use crate::value::{bounded_metric, grid_by_norm, tuple_metric, GridParams, TupleValue, Value, Vector};

/// An `M_level`-measurable simple function: one value per vertex of `T_level`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelFunction<S> {
    level: usize,
    values: Vec<Value<S>>,
}

/// An `M_level`-measurable function into `E^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TupleLevelFunction<S> {
    level: usize,
    values: Vec<TupleValue<S>>,
}

fn check_count(tree: &Tree, level: usize, found: usize) -> Result<()> {
    let expected = tree.dense_level_size(level)?;
    if expected != found {
        return Err(Error::MissingValues(format!(
            "level {level} has {expected} vertices, got {found} values"
        )));
    }
    Ok(())
}

impl<S: Scalar> LevelFunction<S> {
    pub fn new(tree: &Tree, level: usize, values: Vec<Value<S>>) -> Result<Self> {
        check_count(tree, level, values.len())?;
        if let Some(first) = values.first() {
            if let Some(bad) = values.iter().find(|v| v.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: bad.dim(),
                });
            }
        }
        Ok(LevelFunction { level, values })
    }

    pub fn constant(tree: &Tree, level: usize, value: Value<S>) -> Result<Self> {
        let n = tree.dense_level_size(level)?;
        Ok(LevelFunction {
            level,
            values: vec![value; n],
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[Value<S>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    /// Value on the sector of `v`, which must lie at or below this function's level.
    pub fn value_at(&self, tree: &Tree, v: VertexId) -> Result<&Value<S>> {
        let a = tree.ancestor(v, self.level)?;
        Ok(&self.values[a.offset as usize])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Vector::is_zero_vector)
    }

    pub fn map(&self, f: impl Fn(&Value<S>) -> Value<S>) -> Self {
        LevelFunction {
            level: self.level,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, a: &S) -> Self {
        self.map(|v| v.scale(a))
    }

    /// Pointwise combination after refining both to the finer level.
    pub fn zip_with(
        &self,
        tree: &Tree,
        other: &Self,
        f: impl Fn(&Value<S>, &Value<S>) -> Value<S>,
    ) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let n = self.level.max(other.level);
        let a = refine(tree, self, n)?;
        let b = refine(tree, other, n)?;
        Ok(LevelFunction {
            level: n,
            values: a.values.iter().zip(&b.values).map(|(x, y)| f(x, y)).collect(),
        })
    }

    pub fn add(&self, tree: &Tree, other: &Self) -> Result<Self> {
        self.zip_with(tree, other, Vector::add)
    }

    pub fn sub(&self, tree: &Tree, other: &Self) -> Result<Self> {
        self.zip_with(tree, other, Vector::sub)
    }
}

fn refine_values<T: Clone>(tree: &Tree, from: usize, values: &[T], to: usize) -> Vec<T> {
    let mut cur = values.to_vec();
    for level in from..to {
        let mut next = Vec::with_capacity(tree.level_size(level + 1) as usize);
        for (offset, v) in cur.iter().enumerate() {
            let arity = tree
                .arity(VertexId::new(level, offset as u64))
                .expect("non-leaf level");
            next.extend(std::iter::repeat(v.clone()).take(arity));
        }
        cur = next;
    }
    cur
}

/// Re-expresses `psi` on level `n`: every vertex inherits its ancestor's value.
pub fn refine<S: Scalar>(tree: &Tree, psi: &LevelFunction<S>, n: usize) -> Result<LevelFunction<S>> {
    if n < psi.level {
        return Err(Error::LevelOutOfRange {
            level: n,
            limit: psi.level,
        });
    }
    tree.dense_level_size(n)?;
    Ok(LevelFunction {
        level: n,
        values: refine_values(tree, psi.level, &psi.values, n),
    })
}

fn measures<S: Scalar>(tree: &Tree, n: usize) -> Result<Vec<S>> {
    Ok(tree.level_measures(n)?.iter().map(S::from_rational).collect())
}

fn common_refinement<S: Scalar>(
    tree: &Tree,
    psi: &LevelFunction<S>,
    phi: &LevelFunction<S>,
) -> Result<(LevelFunction<S>, LevelFunction<S>)> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: phi.dim(),
        });
    }
    let n = psi.level.max(phi.level);
    Ok((refine(tree, psi, n)?, refine(tree, phi, n)?))
}

/// `P(ψ, φ) = ∫ d(ψ, φ) / (1 + d(ψ, φ)) dP`.
pub fn p_metric<S: Scalar>(tree: &Tree, psi: &LevelFunction<S>, phi: &LevelFunction<S>) -> Result<S> {
    let (a, b) = common_refinement(tree, psi, phi)?;
    let mut total = S::zero();
    for ((m, x), y) in measures::<S>(tree, a.level)?.into_iter().zip(&a.values).zip(&b.values) {
        total = total + m * bounded_metric(x, y)?;
    }
    Ok(total)
}

/// Measure of the set where the two functions differ.
pub fn mismatch_measure<S: Scalar>(tree: &Tree, psi: &LevelFunction<S>, phi: &LevelFunction<S>) -> Result<S> {
    let (a, b) = common_refinement(tree, psi, phi)?;
    Ok(measures::<S>(tree, a.level)?
        .into_iter()
        .zip(a.values.iter().zip(&b.values))
        .filter(|(_, (x, y))| x != y)
        .fold(S::zero(), |acc, (m, _)| acc + m))
}

impl<S: Scalar> TupleLevelFunction<S> {
    pub fn new(tree: &Tree, level: usize, values: Vec<TupleValue<S>>) -> Result<Self> {
        check_count(tree, level, values.len())?;
        if let Some(first) = values.first() {
            for v in &values {
                if v.width() != first.width() {
                    return Err(Error::WidthMismatch {
                        expected: first.width(),
                        found: v.width(),
                    });
                }
                if v.dim() != first.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first.dim(),
                        found: v.dim(),
                    });
                }
            }
        }
        Ok(TupleLevelFunction { level, values })
    }

    /// Stacks component functions, refining all of them to the finest level.
    pub fn from_components(tree: &Tree, components: &[LevelFunction<S>]) -> Result<Self> {
        let level = components
            .iter()
            .map(LevelFunction::level)
            .max()
            .ok_or_else(|| Error::InvalidArgument("no components".into()))?;
        let refined = components
            .iter()
            .map(|c| refine(tree, c, level))
            .collect::<Result<Vec<_>>>()?;
        let n = tree.dense_level_size(level)?;
        let values = (0..n)
            .map(|i| TupleValue::new(refined.iter().map(|c| c.values[i].clone()).collect()))
            .collect::<Result<Vec<_>>>()?;
        TupleLevelFunction::new(tree, level, values)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn width(&self) -> usize {
        self.values[0].width()
    }

    pub fn values(&self) -> &[TupleValue<S>] {
        &self.values
    }

    pub fn component(&self, k: usize) -> LevelFunction<S> {
        LevelFunction {
            level: self.level,
            values: self.values.iter().map(|v| v.component(k).clone()).collect(),
        }
    }

    fn refined(&self, tree: &Tree, n: usize) -> Vec<TupleValue<S>> {
        refine_values(tree, self.level, &self.values, n)
    }
}

fn check_tuple_pair<S: Scalar>(a: &TupleLevelFunction<S>, b: &TupleLevelFunction<S>) -> Result<()> {
    if a.width() != b.width() {
        return Err(Error::WidthMismatch {
            expected: a.width(),
            found: b.width(),
        });
    }
    Ok(())
}

/// `P̃(ψ, φ)` as the direct integral of the product metric.
pub fn tuple_p_metric<S: Scalar>(
    tree: &Tree,
    psi: &TupleLevelFunction<S>,
    phi: &TupleLevelFunction<S>,
) -> Result<S> {
    check_tuple_pair(psi, phi)?;
    let n = psi.level.max(phi.level);
    let a = psi.refined(tree, n);
    let b = phi.refined(tree, n);
    let mut total = S::zero();
    for ((m, x), y) in measures::<S>(tree, n)?.into_iter().zip(&a).zip(&b) {
        total = total + m * tuple_metric(x, y)?;
    }
    Ok(total)
}

/// `P̃(ψ, φ) = Σ_k 2^{-k} P(ψ_k, φ_k)`, computed component by component.
pub fn tuple_p_metric_by_components<S: Scalar>(
    tree: &Tree,
    psi: &TupleLevelFunction<S>,
    phi: &TupleLevelFunction<S>,
) -> Result<S> {
    check_tuple_pair(psi, phi)?;
    let mut total = S::zero();
    for k in 0..psi.width() {
        total = total + S::half_pow(k + 1) * p_metric(tree, &psi.component(k), &phi.component(k))?;
    }
    Ok(total)
}

/// Deterministic diagonal enumeration of level functions with grid values.
///
/// Items are pairs `(level k, assignment j)` visited in order of `k + j`,
/// then `k`. Assignment `j` of level `k` is the `j`-th grid assignment on
/// `T_k` (mixed radix, vertex 0 least significant, grid ordered by norm)
/// that is not already constant on every sibling group, so no function is
/// listed twice. The first item is the zero function on level 0.
pub struct LevelFunctionEnumerator<'a, S> {
    tree: &'a Tree,
    grid: Vec<Value<S>>,
    max_level: usize,
    stage: usize,
    level_in_stage: usize,
    cursors: Vec<LevelCursor>,
}

struct LevelCursor {
    next_candidate: u128,
    total: Option<u128>,
    produced: usize,
    exhausted: bool,
}

impl<'a, S: Scalar> LevelFunctionEnumerator<'a, S> {
    pub fn new(tree: &'a Tree, grid: GridParams, max_level: usize) -> Result<Self> {
        let grid = grid_by_norm::<S>(grid)?;
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        let mut max_level = max_level.min(tree.depth());
        while max_level > 0 && tree.dense_level_size(max_level).is_err() {
            max_level -= 1;
        }
        let g = grid.len() as u128;
        let cursors = (0..=max_level)
            .map(|k| {
                let size = tree.level_size(k) as u32;
                LevelCursor {
                    next_candidate: 0,
                    total: g.checked_pow(size),
                    produced: 0,
                    exhausted: false,
                }
            })
            .collect();
        Ok(LevelFunctionEnumerator {
            tree,
            grid,
            max_level,
            stage: 0,
            level_in_stage: 0,
            cursors,
        })
    }

    fn assignment(&self, k: usize, mut c: u128) -> Vec<Value<S>> {
        let g = self.grid.len() as u128;
        let size = self.tree.level_size(k) as usize;
        let mut out = Vec::with_capacity(size);
        for _ in 0..size {
            out.push(self.grid[(c % g) as usize].clone());
            c /= g;
        }
        out
    }

    fn is_primitive(&self, k: usize, values: &[Value<S>]) -> bool {
        if k == 0 {
            return true;
        }
        let mut start = 0usize;
        for p in 0..self.tree.level_size(k - 1) {
            let arity = self.tree.arity(VertexId::new(k - 1, p)).expect("non-leaf");
            let group = &values[start..start + arity];
            if group.iter().any(|v| *v != group[0]) {
                return true;
            }
            start += arity;
        }
        false
    }

    /// Next primitive assignment of level `k`, if any remain.
    fn advance(&mut self, k: usize) -> Option<Vec<Value<S>>> {
        loop {
            let cur = &self.cursors[k];
            if cur.exhausted {
                return None;
            }
            if cur.total.is_some_and(|t| cur.next_candidate >= t) {
                self.cursors[k].exhausted = true;
                return None;
            }
            let c = cur.next_candidate;
            self.cursors[k].next_candidate += 1;
            let values = self.assignment(k, c);
            if self.is_primitive(k, &values) {
                self.cursors[k].produced += 1;
                return Some(values);
            }
        }
    }
}

impl<S: Scalar> Iterator for LevelFunctionEnumerator<'_, S> {
    type Item = LevelFunction<S>;

    fn next(&mut self) -> Option<LevelFunction<S>> {
        loop {
            if self.cursors.iter().all(|c| c.exhausted) {
                return None;
            }
            if self.level_in_stage > self.stage.min(self.max_level) {
                self.stage += 1;
                self.level_in_stage = 0;
                continue;
            }
            let k = self.level_in_stage;
            self.level_in_stage += 1;
            // level k is due for its (stage - k)-th item; cursors advance one per stage
            if self.cursors[k].produced != self.stage - k {
                continue;
            }
            if let Some(values) = self.advance(k) {
                return Some(LevelFunction { level: k, values });
            }
        }
    }
}
