//! Functions on the vertices of a finite-depth tree, generalized harmonic
//! functions, the restriction maps `ω_n`, and the pointwise metric `ρ`.
//!
//! A [`TreeFunction`] is stored as a layered automaton: each node stands for
//! a set of vertices on one level that share a tree class, a value, and
//! (node-wise) the same children. Walking child slots from the root node
//! reaches the node of any vertex. A dense function, one node per vertex,
//! is the special case built by [`TreeFunction::from_dense`]; functions
//! synthesized on 60-level trees stay small because whole families of
//! sectors collapse into shared nodes.

use indexmap::IndexMap;

use crate::boundary::{LevelFunction, LevelFunctionEnumerator};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{Tree, VertexId};
use crate::value::{bounded_metric, GridParams, TupleValue, Value, Vector};

/// Default cap on the number of enumerated vertices in [`rho_metric`].
pub const MAX_RHO_TERMS: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node<V> {
    pub class: usize,
    pub value: V,
    /// Node index on the next level for each child slot; empty on the last level.
    pub children: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFunction<V> {
    levels: Vec<Vec<Node<V>>>,
}

pub type HarmonicFunction<S> = TreeFunction<Value<S>>;
pub type HarmonicTuple<S> = TreeFunction<TupleValue<S>>;

impl<V: Clone + PartialEq> TreeFunction<V> {
    /// Validates node structure against the tree layout.
    pub fn from_nodes(tree: &Tree, levels: Vec<Vec<Node<V>>>) -> Result<Self> {
        if levels.is_empty() || levels[0].len() != 1 {
            return Err(Error::MissingValues("level 0 must hold exactly one node".into()));
        }
        let depth = levels.len() - 1;
        tree.check_level(depth)?;
        for (n, nodes) in levels.iter().enumerate() {
            if nodes.is_empty() {
                return Err(Error::MissingValues(format!("level {n} has no nodes")));
            }
            for node in nodes {
                if node.class >= tree.class_count(n) {
                    return Err(Error::InvalidArgument(format!("level {n}: class {} out of range", node.class)));
                }
                if n == depth {
                    if !node.children.is_empty() {
                        return Err(Error::InvalidArgument(format!("level {n}: last level has children")));
                    }
                    continue;
                }
                let row = tree.class_row(n, node.class);
                if node.children.len() != row.arity() {
                    return Err(Error::MissingValues(format!(
                        "level {n}: node has {} children, class arity {}",
                        node.children.len(),
                        row.arity()
                    )));
                }
                for (slot, &c) in node.children.iter().enumerate() {
                    let child = levels[n + 1]
                        .get(c as usize)
                        .ok_or_else(|| Error::InvalidArgument(format!("level {n}: dangling child {c}")))?;
                    if child.class != tree.class_child(n, node.class, slot) {
                        return Err(Error::InvalidArgument(format!("level {n}: child class mismatch")));
                    }
                }
            }
        }
        Ok(TreeFunction { levels })
    }

    /// One node per vertex; `values[n]` lists `T_n` in offset order.
    pub fn from_dense(tree: &Tree, values: Vec<Vec<V>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::MissingValues("no levels".into()));
        }
        let depth = values.len() - 1;
        tree.check_level(depth)?;
        let mut levels = Vec::with_capacity(values.len());
        for (n, vals) in values.into_iter().enumerate() {
            let size = tree.dense_level_size(n)?;
            if vals.len() != size {
                return Err(Error::MissingValues(format!(
                    "level {n} has {size} vertices, got {} values",
                    vals.len()
                )));
            }
            let nodes = vals
                .into_iter()
                .enumerate()
                .map(|(offset, value)| {
                    let v = VertexId::new(n, offset as u64);
                    let children = if n < depth {
                        tree.children(v)
                            .expect("non-leaf")
                            .into_iter()
                            .map(|c| c.offset as u32)
                            .collect()
                    } else {
                        Vec::new()
                    };
                    Node {
                        class: tree.class_of(v),
                        value,
                        children,
                    }
                })
                .collect();
            levels.push(nodes);
        }
        Ok(TreeFunction { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Node<V>>] {
        &self.levels
    }

    pub fn node(&self, level: usize, index: u32) -> &Node<V> {
        &self.levels[level][index as usize]
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn root_value(&self) -> &V {
        &self.levels[0][0].value
    }

    fn check_vertex_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            return Err(Error::LevelOutOfRange {
                level,
                limit: self.depth(),
            });
        }
        Ok(())
    }

    pub fn node_of(&self, tree: &Tree, v: VertexId) -> Result<u32> {
        self.check_vertex_level(v.level)?;
        let mut idx = 0u32;
        for (n, slot) in tree.path_slots(v)?.into_iter().enumerate() {
            idx = self.levels[n][idx as usize].children[slot];
        }
        Ok(idx)
    }

    pub fn value_at(&self, tree: &Tree, v: VertexId) -> Result<&V> {
        let idx = self.node_of(tree, v)?;
        Ok(&self.levels[v.level][idx as usize].value)
    }

    /// Node index of every vertex of `T_n`, in offset order.
    pub fn dense_nodes(&self, tree: &Tree, n: usize) -> Result<Vec<u32>> {
        self.check_vertex_level(n)?;
        tree.dense_level_size(n)?;
        let mut cur = vec![0u32];
        for level in 0..n {
            cur = cur
                .iter()
                .flat_map(|&i| self.levels[level][i as usize].children.iter().copied())
                .collect();
        }
        Ok(cur)
    }

    pub fn dense_values(&self, tree: &Tree, n: usize) -> Result<Vec<V>> {
        Ok(self
            .dense_nodes(tree, n)?
            .into_iter()
            .map(|i| self.levels[n][i as usize].value.clone())
            .collect())
    }

    pub fn map<W>(&self, f: impl Fn(&V) -> W) -> TreeFunction<W> {
        TreeFunction {
            levels: self
                .levels
                .iter()
                .map(|nodes| {
                    nodes
                        .iter()
                        .map(|n| Node {
                            class: n.class,
                            value: f(&n.value),
                            children: n.children.clone(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Levels `0..=n` only.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        self.check_vertex_level(n)?;
        let mut levels = self.levels[..=n].to_vec();
        for node in &mut levels[n] {
            node.children.clear();
        }
        Ok(TreeFunction { levels })
    }
}

impl<S: Scalar> HarmonicTuple<S> {
    pub fn width(&self) -> usize {
        self.root_value().width()
    }

    /// The `k`-th coordinate function, sharing this function's node structure.
    pub fn component(&self, k: usize) -> HarmonicFunction<S> {
        self.map(|v| v.component(k).clone())
    }
}

/// Builds the product automaton of several functions on the same tree and
/// maps each joint node to a value.
pub fn product<V, W>(
    tree: &Tree,
    fs: &[&TreeFunction<V>],
    value: impl Fn(&[&V]) -> W,
) -> Result<TreeFunction<W>>
where
    V: Clone + PartialEq,
    W: Clone + PartialEq,
{
    let first = fs.first().ok_or_else(|| Error::InvalidArgument("no functions".into()))?;
    let depth = first.depth();
    if let Some(f) = fs.iter().find(|f| f.depth() != depth) {
        return Err(Error::InvalidArgument(format!(
            "depth mismatch: {} vs {}",
            depth,
            f.depth()
        )));
    }
    let mut keys: Vec<(usize, Vec<u32>)> = vec![(0, vec![0; fs.len()])];
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let mut next: IndexMap<(usize, Vec<u32>), u32> = IndexMap::new();
        let mut nodes = Vec::with_capacity(keys.len());
        for (class, idxs) in &keys {
            let vals: Vec<&V> = fs.iter().zip(idxs).map(|(f, &i)| &f.levels[n][i as usize].value).collect();
            let mut children = Vec::new();
            if n < depth {
                let arity = tree.class_row(n, *class).arity();
                for slot in 0..arity {
                    let key = (
                        tree.class_child(n, *class, slot),
                        fs.iter()
                            .zip(idxs)
                            .map(|(f, &i)| f.levels[n][i as usize].children[slot])
                            .collect(),
                    );
                    let len = next.len() as u32;
                    children.push(*next.entry(key).or_insert(len));
                }
            }
            nodes.push(Node {
                class: *class,
                value: value(&vals),
                children,
            });
        }
        levels.push(nodes);
        keys = next.into_keys().collect();
    }
    Ok(TreeFunction { levels })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual<V> {
    pub level: usize,
    pub node: u32,
    pub residual: V,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicityReport<V> {
    pub checked_nodes: usize,
    /// Residuals `f(x) − Σ w(x,y) f(y)` that are not negligible.
    pub violations: Vec<Residual<V>>,
}

impl<V> HarmonicityReport<V> {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Residual at one node.
pub fn residual<S: Scalar, V: Vector<S>>(tree: &Tree, f: &TreeFunction<V>, level: usize, node: u32) -> V {
    let x = f.node(level, node);
    let row = tree.class_row(level, x.class);
    let mut avg = x.value.zero_like();
    for (w, &c) in row.w().iter().zip(&x.children) {
        avg = avg.add(&f.node(level + 1, c).value.scale(&S::from_rational(w)));
    }
    x.value.sub(&avg)
}

/// Checks `f(x) = Σ_{y∈S(x)} w(x,y) f(y)` at every non-leaf node: exactly in
/// exact mode, up to [`crate::scalar::FLOAT_TOLERANCE`] in float mode.
pub fn check_harmonic<S: Scalar, V: Vector<S>>(tree: &Tree, f: &TreeFunction<V>) -> HarmonicityReport<V> {
    let mut violations = Vec::new();
    let mut checked = 0;
    for level in 0..f.depth() {
        for i in 0..f.levels[level].len() as u32 {
            checked += 1;
            let r = residual::<S, V>(tree, f, level, i);
            if !r.is_negligible() {
                violations.push(Residual {
                    level,
                    node: i,
                    residual: r,
                });
            }
        }
    }
    HarmonicityReport {
        checked_nodes: checked,
        violations,
    }
}

/// The unique harmonic function on levels `0..=leaves.level()` with the given
/// values on the deepest level.
pub fn aggregate_upward<S: Scalar>(tree: &Tree, leaves: &LevelFunction<S>) -> Result<HarmonicFunction<S>> {
    aggregate_dense(tree, leaves.level(), leaves.values().to_vec())
}

pub fn aggregate_dense<S: Scalar, V: Vector<S>>(tree: &Tree, level: usize, leaves: Vec<V>) -> Result<TreeFunction<V>> {
    let size = tree.dense_level_size(level)?;
    if leaves.len() != size {
        return Err(Error::MissingValues(format!(
            "level {level} has {size} vertices, got {} values",
            leaves.len()
        )));
    }
    let mut values = vec![leaves];
    for n in (0..level).rev() {
        let below = values.last().expect("nonempty");
        let mut cur = Vec::with_capacity(tree.level_size(n) as usize);
        for offset in 0..tree.level_size(n) {
            let v = VertexId::new(n, offset);
            let row = tree.row(v)?;
            let first = tree.child(v, 0).offset as usize;
            let mut acc = below[first].zero_like();
            for (slot, w) in row.w().iter().enumerate() {
                acc = acc.add(&below[first + slot].scale(&S::from_rational(w)));
            }
            cur.push(acc);
        }
        values.push(cur);
    }
    values.reverse();
    TreeFunction::from_dense(tree, values)
}

/// Copies every value of the last level down to `to_depth`; harmonic
/// because each `w` row sums to one.
pub fn extend_constant<V: Clone + PartialEq + Eq + std::hash::Hash>(
    tree: &Tree,
    f: &TreeFunction<V>,
    to_depth: usize,
) -> Result<TreeFunction<V>> {
    tree.check_level(to_depth)?;
    if to_depth < f.depth() {
        return Err(Error::LevelOutOfRange {
            level: to_depth,
            limit: f.depth(),
        });
    }
    let mut levels = f.levels.clone();
    for n in f.depth()..to_depth {
        let mut next: IndexMap<(usize, V), u32> = IndexMap::new();
        for node in levels[n].iter_mut() {
            let arity = tree.class_row(n, node.class).arity();
            node.children = (0..arity)
                .map(|slot| {
                    let key = (tree.class_child(n, node.class, slot), node.value.clone());
                    let len = next.len() as u32;
                    *next.entry(key).or_insert(len)
                })
                .collect();
        }
        levels.push(
            next.into_keys()
                .map(|(class, value)| Node {
                    class,
                    value,
                    children: Vec::new(),
                })
                .collect(),
        );
    }
    Ok(TreeFunction { levels })
}

/// `ω_n(f)`: the restriction of `f` to `T_n` as a level function.
pub fn omega<S: Scalar>(tree: &Tree, f: &HarmonicFunction<S>, n: usize) -> Result<LevelFunction<S>> {
    LevelFunction::new(tree, n, f.dense_values(tree, n)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoReport<S> {
    /// `Σ_{j ≤ terms} 2^{-j} d/(1+d)` over the first `terms` enumerated vertices.
    pub sum: S,
    pub terms: usize,
    /// `Σ_{j > terms} 2^{-j} = 2^{-terms}`, bounding everything not summed.
    pub tail: S,
}

impl<S: Scalar> RhoReport<S> {
    pub fn upper_bound(&self) -> S {
        self.sum.clone() + self.tail.clone()
    }
}

/// `ρ` on two value sequences already listed in enumeration order.
pub fn rho_values<S: Scalar>(f: &[Value<S>], g: &[Value<S>]) -> Result<RhoReport<S>> {
    if f.len() != g.len() {
        return Err(Error::MissingValues(format!("{} vs {} values", f.len(), g.len())));
    }
    let mut sum = S::zero();
    for (j, (a, b)) in f.iter().zip(g).enumerate() {
        sum = sum + S::half_pow(j + 1) * bounded_metric(a, b)?;
    }
    Ok(RhoReport {
        sum,
        terms: f.len(),
        tail: S::half_pow(f.len()),
    })
}

/// `ρ(f, g)` over the first `max_terms` vertices in breadth-first order
/// (or all vertices through the common depth, if fewer).
pub fn rho_metric<S: Scalar>(
    tree: &Tree,
    f: &HarmonicFunction<S>,
    g: &HarmonicFunction<S>,
    max_terms: usize,
) -> Result<RhoReport<S>> {
    if f.depth() != g.depth() {
        return Err(Error::InvalidArgument("depth mismatch".into()));
    }
    tree.check_level(f.depth())?;
    if f.root_value().dim() != g.root_value().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.root_value().dim(),
            found: g.root_value().dim(),
        });
    }
    let mut fv = Vec::new();
    let mut gv = Vec::new();
    let mut cur = vec![(0u32, 0u32)];
    'levels: for n in 0..=f.depth() {
        for &(a, b) in &cur {
            if fv.len() == max_terms {
                break 'levels;
            }
            fv.push(f.node(n, a).value.clone());
            gv.push(g.node(n, b).value.clone());
        }
        if n == f.depth() {
            break;
        }
        let mut next = Vec::new();
        for &(a, b) in &cur {
            let (na, nb) = (f.node(n, a), g.node(n, b));
            next.extend(na.children.iter().copied().zip(nb.children.iter().copied()));
            if fv.len() + next.len() >= max_terms {
                break;
            }
        }
        cur = next;
    }
    rho_values(&fv, &gv)
}

/// `Σ a_i f_i`, computed node-wise on the product automaton.
pub fn linear_combination<S: Scalar, V: Vector<S>>(
    tree: &Tree,
    coeffs: &[S],
    fs: &[&TreeFunction<V>],
) -> Result<TreeFunction<V>> {
    if coeffs.len() != fs.len() || fs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for {} functions",
            coeffs.len(),
            fs.len()
        )));
    }
    product(tree, fs, |vals| {
        vals.iter()
            .zip(coeffs)
            .fold(vals[0].zero_like(), |acc, (v, a)| acc.add(&v.scale(a)))
    })
}

/// `g = p − h` on levels `0..=N`, extended constantly below `N`.
pub fn truncate_and_extend<S: Scalar, V: Vector<S>>(
    tree: &Tree,
    p: &TreeFunction<V>,
    h: &TreeFunction<V>,
    truncation: usize,
) -> Result<TreeFunction<V>> {
    let depth = p.depth().min(h.depth());
    if truncation > depth {
        return Err(Error::LevelOutOfRange {
            level: truncation,
            limit: depth,
        });
    }
    let diff = product(tree, &[p, h], |v| v[0].sub(v[1]))?;
    extend_constant(tree, &diff.truncate(truncation)?, depth)
}

/// The `index`-th (1-based) member of a dense sequence in `H(T, E)`: a
/// grid-valued level function from the diagonal enumeration, aggregated
/// upward and extended constantly to `depth`.
pub fn enumerate_dense_harmonics<S: Scalar>(
    tree: &Tree,
    index: usize,
    grid: GridParams,
    depth: usize,
) -> Result<HarmonicFunction<S>> {
    if index == 0 {
        return Err(Error::InvalidArgument("indices start at 1".into()));
    }
    let psi = LevelFunctionEnumerator::<S>::new(tree, grid, depth)?
        .nth(index - 1)
        .ok_or_else(|| Error::InvalidArgument(format!("enumeration has fewer than {index} members")))?;
    extend_constant(tree, &aggregate_upward(tree, &psi)?, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::tree::{build_tree, Branching, EdgeRule, TreeSpec};

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn sv(n: i64) -> Value<Rational> {
        Value::scalar(r(n))
    }

    fn binary(depth: usize) -> Tree {
        build_tree(&TreeSpec::uniform(2, depth)).unwrap()
    }

    fn weighted(depth: usize) -> Tree {
        // w = (1/3, 2/3) everywhere
        build_tree(&TreeSpec {
            depth,
            branching: Branching::Uniform { arity: 2 },
            q: EdgeRule::Uniform,
            w: EdgeRule::PerLevel {
                rows: vec![vec!["1/3".into(), "2/3".into()]; depth],
            },
            seed: 0,
        })
        .unwrap()
    }

    #[test]
    fn check_harmonic_examples() {
        let t = binary(1);
        let c = TreeFunction::from_dense(&t, vec![vec![sv(4)], vec![sv(4), sv(4)]]).unwrap();
        assert!(check_harmonic::<Rational, _>(&t, &c).passes());
        let f = TreeFunction::from_dense(&t, vec![vec![sv(0)], vec![sv(1), sv(-1)]]).unwrap();
        assert!(check_harmonic::<Rational, _>(&t, &f).passes());
        let g = TreeFunction::from_dense(&t, vec![vec![sv(0)], vec![sv(1), sv(1)]]).unwrap();
        let report = check_harmonic::<Rational, _>(&t, &g);
        assert_eq!(report.violations.len(), 1);
        // 0 - (1/2 + 1/2)
        assert_eq!(report.violations[0].residual, sv(-1));
        assert!(TreeFunction::from_dense(&t, vec![vec![sv(0)], vec![sv(1)]]).is_err());
    }

    #[test]
    fn aggregate_upward_examples() {
        let t = binary(1);
        let leaves = LevelFunction::new(&t, 1, vec![sv(2), sv(4)]).unwrap();
        assert_eq!(aggregate_upward(&t, &leaves).unwrap().root_value(), &sv(3));

        let t = weighted(1);
        let leaves = LevelFunction::new(&t, 1, vec![sv(3), sv(6)]).unwrap();
        let f = aggregate_upward(&t, &leaves).unwrap();
        assert_eq!(f.root_value(), &sv(5));
        assert!(check_harmonic::<Rational, _>(&t, &f).passes());

        let t = binary(3);
        let c = LevelFunction::constant(&t, 3, sv(7)).unwrap();
        let f = aggregate_upward(&t, &c).unwrap();
        assert!(f.levels().iter().flatten().all(|n| n.value == sv(7)));
    }

    #[test]
    fn extend_constant_examples() {
        let t = binary(4);
        let leaves = LevelFunction::new(&t, 2, vec![sv(1), sv(2), sv(3), sv(6)]).unwrap();
        let f = aggregate_upward(&t, &leaves).unwrap();
        assert_eq!(extend_constant(&t, &f, 2).unwrap(), f);
        let g = extend_constant(&t, &f, 4).unwrap();
        assert!(check_harmonic::<Rational, _>(&t, &g).passes());
        let w2 = omega(&t, &g, 2).unwrap();
        for k in 3..=4 {
            assert_eq!(omega(&t, &g, k).unwrap(), crate::boundary::refine(&t, &w2, k).unwrap());
        }
        assert!(extend_constant(&t, &f, 5).is_err());
    }

    #[test]
    fn omega_examples() {
        let t = binary(3);
        let c = extend_constant(&t, &TreeFunction::from_dense(&t, vec![vec![sv(2)]]).unwrap(), 3).unwrap();
        assert_eq!(omega(&t, &c, 3).unwrap(), LevelFunction::constant(&t, 3, sv(2)).unwrap());
        assert!(omega(&t, &c, 4).is_err());
    }

    #[test]
    fn rho_examples() {
        let t = binary(2);
        let zero = extend_constant(&t, &TreeFunction::from_dense(&t, vec![vec![sv(0)]]).unwrap(), 2).unwrap();
        let rep = rho_metric(&t, &zero, &zero, MAX_RHO_TERMS).unwrap();
        assert_eq!(rep.sum, r(0));
        assert_eq!(rep.terms, 7);
        assert_eq!(rep.tail, Rational::half_pow(7));

        // differ by d = 1 only at z_1 = x_0: (1/2)(1/2)
        let leaves = vec![sv(0), sv(0), sv(0), sv(0)];
        let dense: Vec<Vec<_>> = vec![vec![sv(1)], vec![sv(0), sv(0)], leaves];
        let bumped = TreeFunction::from_dense(&t, dense).unwrap();
        assert_eq!(rho_metric(&t, &bumped, &zero, MAX_RHO_TERMS).unwrap().sum, Rational::from_ratio(1, 4));
        let capped = rho_metric(&t, &bumped, &zero, 3).unwrap();
        assert_eq!(capped.terms, 3);
        assert_eq!(capped.tail, Rational::from_ratio(1, 8));
    }

    #[test]
    fn linear_combination_examples() {
        let t = binary(2);
        let leaves = LevelFunction::new(&t, 2, vec![sv(1), sv(-2), sv(3), sv(0)]).unwrap();
        let f = aggregate_upward(&t, &leaves).unwrap();
        assert_eq!(linear_combination(&t, &[r(1)], &[&f]).unwrap().dense_values(&t, 2).unwrap(), leaves.values());
        let z = linear_combination(&t, &[r(1), r(-1)], &[&f, &f]).unwrap();
        assert!(z.levels().iter().flatten().all(|n| n.value.is_zero_vector()));
        assert!(linear_combination(&t, &[r(1)], &[&f, &f]).is_err());
    }

    #[test]
    fn truncate_and_extend_examples() {
        let t = binary(4);
        let p = enumerate_dense_harmonics::<Rational>(&t, 9, GridParams::default(), 4).unwrap();
        let h = enumerate_dense_harmonics::<Rational>(&t, 17, GridParams::default(), 4).unwrap();
        let z = truncate_and_extend(&t, &p, &p, 2).unwrap();
        assert!(z.levels().iter().flatten().all(|n| n.value.is_zero_vector()));
        let full = truncate_and_extend(&t, &p, &h, 4).unwrap();
        let diff = linear_combination(&t, &[r(1), r(-1)], &[&p, &h]).unwrap();
        assert_eq!(rho_metric(&t, &full, &diff, MAX_RHO_TERMS).unwrap().sum, r(0));
        let g = truncate_and_extend(&t, &p, &h, 1).unwrap();
        assert!(check_harmonic::<Rational, _>(&t, &g).passes());
        let w1 = omega(&t, &g, 1).unwrap();
        for k in 2..=4 {
            assert_eq!(omega(&t, &g, k).unwrap(), crate::boundary::refine(&t, &w1, k).unwrap());
        }
        assert!(truncate_and_extend(&t, &p, &h, 5).is_err());
    }

    #[test]
    fn dense_harmonics_first_is_zero() {
        let t = binary(3);
        let p1 = enumerate_dense_harmonics::<Rational>(&t, 1, GridParams::default(), 3).unwrap();
        assert!(p1.levels().iter().flatten().all(|n| n.value.is_zero_vector()));
        assert!(enumerate_dense_harmonics::<Rational>(&t, 0, GridParams::default(), 3).is_err());
    }

    #[test]
    fn node_lookup_matches_dense_expansion() {
        let t = binary(3);
        let p = enumerate_dense_harmonics::<Rational>(&t, 30, GridParams::default(), 3).unwrap();
        let dense = p.dense_values(&t, 3).unwrap();
        for (o, v) in dense.iter().enumerate() {
            assert_eq!(p.value_at(&t, VertexId::new(3, o as u64)).unwrap(), v);
        }
    }
}
