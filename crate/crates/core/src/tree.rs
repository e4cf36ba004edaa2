//! Finite-depth rooted trees with transition probabilities `q`, harmonic
//! weights `w`, and the boundary sector measures they induce.
//!
//! Vertices are addressed densely by `(level, offset)`. Two layouts share
//! that addressing:
//!
//! * **layered**: every vertex of a level has the same arity and the same
//!   `q`/`w` rows, so nothing per-vertex is stored and depth can reach ~60;
//! * **explicit**: per-vertex child counts and rows, fully materialized.
//!
//! Algorithms that must not enumerate whole levels work with *classes*: a
//! class groups the vertices of a level that have identical rows and
//! identical child classes. A layered level is one class; in an explicit
//! tree every vertex is its own class.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{encode_rational, parse_rational, Rational};

/// Largest level that dense per-vertex operations will materialize.
pub const MAX_DENSE_LEVEL: u64 = 1 << 20;
/// Largest vertex count of an explicit tree.
pub const MAX_EXPLICIT_VERTICES: u64 = 1 << 22;

pub const TREE_SCHEMA: &str = "harmonic-trees/tree/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub level: usize,
    pub offset: u64,
}

impl VertexId {
    pub const ROOT: VertexId = VertexId { level: 0, offset: 0 };

    pub fn new(level: usize, offset: u64) -> Self {
        VertexId { level, offset }
    }
}

/// Outgoing edges of a vertex (or a class of vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRow {
    q: Vec<Rational>,
    w: Vec<Rational>,
    absorbing: usize,
}

impl EdgeRow {
    pub fn new(q: Vec<Rational>, w: Vec<Rational>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidTree(format!(
                "every vertex needs at least two children, found {}",
                q.len()
            )));
        }
        if w.len() != q.len() {
            return Err(Error::InvalidTree(format!(
                "q row has {} entries but w row has {}",
                q.len(),
                w.len()
            )));
        }
        if q.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidTree("transition probabilities must be positive".into()));
        }
        let q_sum: Rational = q.iter().sum();
        if !q_sum.is_one() {
            return Err(Error::InvalidTree(format!(
                "q row sums to {}, not 1",
                encode_rational(&q_sum)
            )));
        }
        if w.iter().any(Zero::is_zero) {
            return Err(Error::InvalidTree("harmonic weights must be nonzero".into()));
        }
        let w_sum: Rational = w.iter().sum();
        if !w_sum.is_one() {
            return Err(Error::InvalidTree(format!(
                "w row sums to {}, not 1",
                encode_rational(&w_sum)
            )));
        }
        // argmin of q, first occurrence wins
        let mut absorbing = 0;
        for (i, p) in q.iter().enumerate() {
            if *p < q[absorbing] {
                absorbing = i;
            }
        }
        Ok(EdgeRow { q, w, absorbing })
    }

    pub fn uniform(arity: usize) -> Result<Self> {
        let p = Rational::new(1.into(), (arity.max(1) as i64).into());
        EdgeRow::new(vec![p.clone(); arity], vec![p; arity])
    }

    pub fn arity(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[Rational] {
        &self.q
    }

    pub fn w(&self) -> &[Rational] {
        &self.w
    }

    /// Slot of the minimum-probability child (smallest slot on ties).
    pub fn absorbing_slot(&self) -> usize {
        self.absorbing
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    Layered {
        rows: Vec<EdgeRow>,
    },
    Explicit {
        rows: Vec<Vec<EdgeRow>>,
        first_child: Vec<Vec<u64>>,
        parent: Vec<Vec<u64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    depth: usize,
    sizes: Vec<u64>,
    layout: Layout,
}

impl Tree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level_size(&self, n: usize) -> u64 {
        self.sizes[n]
    }

    pub fn level_sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn is_layered(&self) -> bool {
        matches!(self.layout, Layout::Layered { .. })
    }

    /// Number of vertices on levels `0..=n`, saturating.
    pub fn vertices_through(&self, n: usize) -> u64 {
        self.sizes[..=n.min(self.depth)]
            .iter()
            .fold(0u64, |acc, s| acc.saturating_add(*s))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.level <= self.depth && v.offset < self.sizes[v.level]
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n > self.depth {
            return Err(Error::LevelOutOfRange {
                level: n,
                limit: self.depth,
            });
        }
        Ok(())
    }

    /// Size of level `n` as a `usize`, if it is small enough to materialize.
    pub fn dense_level_size(&self, n: usize) -> Result<usize> {
        self.check_level(n)?;
        let size = self.sizes[n];
        if size > MAX_DENSE_LEVEL {
            return Err(Error::TooLarge {
                level: n,
                size,
                limit: MAX_DENSE_LEVEL,
            });
        }
        Ok(size as usize)
    }

    pub fn class_count(&self, n: usize) -> usize {
        match &self.layout {
            Layout::Layered { .. } => 1,
            Layout::Explicit { .. } => self.sizes[n] as usize,
        }
    }

    pub fn class_of(&self, v: VertexId) -> usize {
        match &self.layout {
            Layout::Layered { .. } => 0,
            Layout::Explicit { .. } => v.offset as usize,
        }
    }

    /// Edge row shared by the vertices of class `class` on level `n < depth`.
    pub fn class_row(&self, n: usize, class: usize) -> &EdgeRow {
        match &self.layout {
            Layout::Layered { rows } => &rows[n],
            Layout::Explicit { rows, .. } => &rows[n][class],
        }
    }

    pub fn class_child(&self, n: usize, class: usize, slot: usize) -> usize {
        match &self.layout {
            Layout::Layered { .. } => 0,
            Layout::Explicit { first_child, .. } => first_child[n][class] as usize + slot,
        }
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        v.level == self.depth
    }

    pub fn row(&self, v: VertexId) -> Result<&EdgeRow> {
        self.check(v)?;
        if self.is_leaf(v) {
            return Err(Error::LeafVertex(v));
        }
        Ok(self.class_row(v.level, self.class_of(v)))
    }

    pub fn arity(&self, v: VertexId) -> Result<usize> {
        self.row(v).map(EdgeRow::arity)
    }

    /// Child of a non-leaf vertex in the given slot.
    pub fn child(&self, v: VertexId, slot: usize) -> VertexId {
        let offset = match &self.layout {
            Layout::Layered { rows } => v.offset * rows[v.level].arity() as u64 + slot as u64,
            Layout::Explicit { first_child, .. } => first_child[v.level][v.offset as usize] + slot as u64,
        };
        VertexId::new(v.level + 1, offset)
    }

    pub fn children(&self, v: VertexId) -> Result<Vec<VertexId>> {
        let arity = self.arity(v)?;
        Ok((0..arity).map(|s| self.child(v, s)).collect())
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        if v.level == 0 || !self.contains(v) {
            return None;
        }
        let offset = match &self.layout {
            Layout::Layered { rows } => v.offset / rows[v.level - 1].arity() as u64,
            Layout::Explicit { parent, .. } => parent[v.level][v.offset as usize],
        };
        Some(VertexId::new(v.level - 1, offset))
    }

    /// Position of `v` among its parent's children.
    pub fn slot_of(&self, v: VertexId) -> Option<usize> {
        let p = self.parent(v)?;
        let first = self.child(p, 0);
        Some((v.offset - first.offset) as usize)
    }

    /// Child slots along the root-to-`v` path.
    pub fn path_slots(&self, v: VertexId) -> Result<Vec<usize>> {
        self.check(v)?;
        let mut slots = Vec::with_capacity(v.level);
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            slots.push(self.slot_of(cur).expect("has parent"));
            cur = p;
        }
        slots.reverse();
        Ok(slots)
    }

    pub fn ancestor(&self, v: VertexId, level: usize) -> Result<VertexId> {
        self.check(v)?;
        if level > v.level {
            return Err(Error::LevelOutOfRange {
                level,
                limit: v.level,
            });
        }
        let mut cur = v;
        while cur.level > level {
            cur = self.parent(cur).expect("non-root has parent");
        }
        Ok(cur)
    }

    /// `p(B_x)`: product of transition probabilities along the root path.
    pub fn sector_measure(&self, x: VertexId) -> Result<Rational> {
        let slots = self.path_slots(x)?;
        let mut cur = VertexId::ROOT;
        let mut measure = Rational::one();
        for slot in slots {
            let row = self.class_row(cur.level, self.class_of(cur));
            measure *= &row.q()[slot];
            cur = self.child(cur, slot);
        }
        Ok(measure)
    }

    /// Sector measures of all vertices of level `n`, in offset order.
    pub fn level_measures(&self, n: usize) -> Result<Vec<Rational>> {
        Ok(self.measures_through(n)?.pop().expect("level 0 present"))
    }

    /// `p(B_x)` for every vertex of `T_0, …, T_n`, one vector per level.
    pub fn measures_through(&self, n: usize) -> Result<Vec<Vec<Rational>>> {
        self.dense_level_size(n)?;
        let mut levels = vec![vec![Rational::one()]];
        for level in 0..n {
            let mut next = Vec::with_capacity(self.sizes[level + 1] as usize);
            for (offset, m) in levels[level].iter().enumerate() {
                let row = self.class_row(level, self.class_of(VertexId::new(level, offset as u64)));
                for q in row.q() {
                    next.push(m * q);
                }
            }
            levels.push(next);
        }
        Ok(levels)
    }

    /// Child with the smallest transition probability, smallest offset on ties.
    pub fn min_child_probability(&self, x: VertexId) -> Result<(VertexId, Rational)> {
        let row = self.row(x)?;
        let slot = row.absorbing_slot();
        Ok((self.child(x, slot), row.q()[slot].clone()))
    }

    /// Vertices in enumeration order `z_1, z_2, …`: level by level, offsets ascending.
    pub fn bfs(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..=self.depth).flat_map(move |level| (0..self.sizes[level]).map(move |o| VertexId::new(level, o)))
    }

    pub fn to_document(&self) -> TreeDocument {
        let strings = |row: &[Rational]| row.iter().map(encode_rational).collect::<Vec<_>>();
        let layout = match &self.layout {
            Layout::Layered { rows } => LayoutDocument::Layered {
                arities: rows.iter().map(EdgeRow::arity).collect(),
                q: rows.iter().map(|r| strings(r.q())).collect(),
                w: rows.iter().map(|r| strings(r.w())).collect(),
            },
            Layout::Explicit { rows, .. } => LayoutDocument::Explicit {
                arities: rows.iter().map(|l| l.iter().map(EdgeRow::arity).collect()).collect(),
                q: rows.iter().map(|l| l.iter().map(|r| strings(r.q())).collect()).collect(),
                w: rows.iter().map(|l| l.iter().map(|r| strings(r.w())).collect()).collect(),
            },
        };
        TreeDocument {
            schema: TREE_SCHEMA.to_string(),
            depth: self.depth,
            layout,
        }
    }

    pub fn from_document(doc: &TreeDocument) -> Result<Tree> {
        if doc.schema != TREE_SCHEMA {
            return Err(Error::Parse(format!("unsupported tree schema `{}`", doc.schema)));
        }
        let spec = match &doc.layout {
            LayoutDocument::Layered { arities, q, w } => TreeSpec {
                depth: doc.depth,
                branching: Branching::PerLevel { arities: arities.clone() },
                q: EdgeRule::PerLevel { rows: q.clone() },
                w: EdgeRule::PerLevel { rows: w.clone() },
                seed: 0,
            },
            LayoutDocument::Explicit { arities, q, w } => TreeSpec {
                depth: doc.depth,
                branching: Branching::Explicit { counts: arities.clone() },
                q: EdgeRule::Explicit { rows: q.clone() },
                w: EdgeRule::Explicit { rows: w.clone() },
                seed: 0,
            },
        };
        build_tree(&spec)
    }
}

/// Versioned JSON form of a tree with exact `"p/q"` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema: String,
    pub depth: usize,
    #[serde(flatten)]
    pub layout: LayoutDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum LayoutDocument {
    Layered {
        arities: Vec<usize>,
        q: Vec<Vec<String>>,
        w: Vec<Vec<String>>,
    },
    Explicit {
        arities: Vec<Vec<usize>>,
        q: Vec<Vec<Vec<String>>>,
        w: Vec<Vec<Vec<String>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Branching {
    Uniform { arity: usize },
    /// One arity per level `0..depth`.
    PerLevel { arities: Vec<usize> },
    /// Child counts per vertex, per level `0..depth`.
    Explicit { counts: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeRule {
    /// `1/arity` on every edge.
    Uniform,
    /// One row per level, shared by all vertices of the level.
    PerLevel { rows: Vec<Vec<String>> },
    /// One row per vertex, per level.
    Explicit { rows: Vec<Vec<Vec<String>>> },
    /// Seeded random integers in `[1, max_weight]` (q) or
    /// `[-max_weight, max_weight] \ {0}` (w), normalized exactly.
    Random { max_weight: u32 },
}

impl EdgeRule {
    fn is_per_vertex(&self) -> bool {
        matches!(self, EdgeRule::Explicit { .. } | EdgeRule::Random { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub depth: usize,
    pub branching: Branching,
    pub q: EdgeRule,
    pub w: EdgeRule,
    #[serde(default)]
    pub seed: u64,
}

impl TreeSpec {
    pub fn uniform(arity: usize, depth: usize) -> Self {
        TreeSpec {
            depth,
            branching: Branching::Uniform { arity },
            q: EdgeRule::Uniform,
            w: EdgeRule::Uniform,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy)]
enum RowKind {
    Q,
    W,
}

fn parse_row(strings: &[String]) -> Result<Vec<Rational>> {
    strings.iter().map(|s| parse_rational(s)).collect()
}

fn random_row(rng: &mut ChaCha8Rng, arity: usize, max_weight: u32, kind: RowKind) -> Result<Vec<Rational>> {
    if max_weight == 0 {
        return Err(Error::InvalidTree("random rule needs max_weight >= 1".into()));
    }
    let m = max_weight as i64;
    loop {
        let raw: Vec<i64> = (0..arity)
            .map(|_| match kind {
                RowKind::Q => rng.gen_range(1..=m),
                RowKind::W => {
                    let k = rng.gen_range(1..=m);
                    if rng.gen_bool(0.5) {
                        k
                    } else {
                        -k
                    }
                }
            })
            .collect();
        let total: i64 = raw.iter().sum();
        if total != 0 {
            return Ok(raw
                .into_iter()
                .map(|k| Rational::new(k.into(), total.into()))
                .collect());
        }
    }
}

struct RowSource<'a> {
    rule: &'a EdgeRule,
    kind: RowKind,
    rng: ChaCha8Rng,
}

impl<'a> RowSource<'a> {
    fn new(rule: &'a EdgeRule, kind: RowKind, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(match kind {
            RowKind::Q => 1,
            RowKind::W => 2,
        });
        RowSource { rule, kind, rng }
    }

    fn row(&mut self, level: usize, offset: usize, arity: usize) -> Result<Vec<Rational>> {
        let name = match self.kind {
            RowKind::Q => "q",
            RowKind::W => "w",
        };
        let row = match self.rule {
            EdgeRule::Uniform => vec![Rational::new(1.into(), (arity as i64).into()); arity],
            EdgeRule::PerLevel { rows } => parse_row(
                rows.get(level)
                    .ok_or_else(|| Error::InvalidTree(format!("{name} table has no row for level {level}")))?,
            )?,
            EdgeRule::Explicit { rows } => parse_row(
                rows.get(level)
                    .and_then(|l| l.get(offset))
                    .ok_or_else(|| {
                        Error::InvalidTree(format!("{name} table has no row for vertex ({level}, {offset})"))
                    })?,
            )?,
            EdgeRule::Random { max_weight } => random_row(&mut self.rng, arity, *max_weight, self.kind)?,
        };
        if row.len() != arity {
            return Err(Error::InvalidTree(format!(
                "{name} row at ({level}, {offset}) has {} entries for {arity} children",
                row.len()
            )));
        }
        Ok(row)
    }
}

/// Builds and validates a tree. Deterministic given the spec (seed included).
pub fn build_tree(spec: &TreeSpec) -> Result<Tree> {
    if spec.depth == 0 {
        return Err(Error::InvalidTree("depth must be at least 1".into()));
    }
    let depth = spec.depth;
    let level_arities: Option<Vec<usize>> = match &spec.branching {
        Branching::Uniform { arity } => Some(vec![*arity; depth]),
        Branching::PerLevel { arities } => {
            if arities.len() < depth {
                return Err(Error::InvalidTree(format!(
                    "per-level arities cover {} levels, depth is {depth}",
                    arities.len()
                )));
            }
            Some(arities[..depth].to_vec())
        }
        Branching::Explicit { .. } => None,
    };
    if let Some(arities) = &level_arities {
        if let Some(a) = arities.iter().find(|a| **a < 2) {
            return Err(Error::InvalidTree(format!("arity {a} < 2")));
        }
    }

    let mut q_src = RowSource::new(&spec.q, RowKind::Q, spec.seed);
    let mut w_src = RowSource::new(&spec.w, RowKind::W, spec.seed);

    match level_arities {
        Some(arities) if !spec.q.is_per_vertex() && !spec.w.is_per_vertex() => {
            let mut sizes = vec![1u64];
            let mut rows = Vec::with_capacity(depth);
            for (level, &arity) in arities.iter().enumerate() {
                let next = sizes[level]
                    .checked_mul(arity as u64)
                    .filter(|s| *s < (1u64 << 63))
                    .ok_or_else(|| Error::InvalidTree(format!("level {} is too wide to address", level + 1)))?;
                sizes.push(next);
                rows.push(EdgeRow::new(q_src.row(level, 0, arity)?, w_src.row(level, 0, arity)?)?);
            }
            Ok(Tree {
                depth,
                sizes,
                layout: Layout::Layered { rows },
            })
        }
        arities => {
            let counts_for = |level: usize, size: usize| -> Result<Vec<usize>> {
                match (&arities, &spec.branching) {
                    (Some(a), _) => Ok(vec![a[level]; size]),
                    (None, Branching::Explicit { counts }) => {
                        let row = counts.get(level).ok_or_else(|| {
                            Error::InvalidTree(format!("child counts missing for level {level}"))
                        })?;
                        if row.len() != size {
                            return Err(Error::InvalidTree(format!(
                                "level {level} has {size} vertices but {} child counts",
                                row.len()
                            )));
                        }
                        Ok(row.clone())
                    }
                    _ => unreachable!(),
                }
            };
            let mut sizes = vec![1u64];
            let mut rows = Vec::with_capacity(depth);
            let mut first_child = Vec::with_capacity(depth);
            let mut parent = vec![Vec::new()];
            let mut total = 1u64;
            for level in 0..depth {
                let size = sizes[level] as usize;
                let counts = counts_for(level, size)?;
                if let Some(a) = counts.iter().find(|a| **a < 2) {
                    return Err(Error::InvalidTree(format!("arity {a} < 2 on level {level}")));
                }
                let next: u64 = counts.iter().map(|c| *c as u64).sum();
                total += next;
                if total > MAX_EXPLICIT_VERTICES {
                    return Err(Error::InvalidTree(format!(
                        "explicit tree exceeds {MAX_EXPLICIT_VERTICES} vertices"
                    )));
                }
                let mut level_rows = Vec::with_capacity(size);
                let mut firsts = Vec::with_capacity(size);
                let mut parents = Vec::with_capacity(next as usize);
                let mut cursor = 0u64;
                for (offset, &arity) in counts.iter().enumerate() {
                    level_rows.push(EdgeRow::new(
                        q_src.row(level, offset, arity)?,
                        w_src.row(level, offset, arity)?,
                    )?);
                    firsts.push(cursor);
                    cursor += arity as u64;
                    parents.extend(std::iter::repeat(offset as u64).take(arity));
                }
                sizes.push(next);
                rows.push(level_rows);
                first_child.push(firsts);
                parent.push(parents);
            }
            Ok(Tree {
                depth,
                sizes,
                layout: Layout::Explicit {
                    rows,
                    first_child,
                    parent,
                },
            })
        }
    }
}
