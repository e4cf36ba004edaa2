//! The absorbing-child rule and its two drivers: a dense one working on
//! explicit level functions, and a compact one that builds witnesses on
//! deep trees directly as automata.

use indexmap::IndexMap;

use crate::boundary::{refine, LevelFunction};
use crate::error::{Error, Result};
use crate::harmonic::{Node, TreeFunction};
use crate::scalar::{Rational, Scalar};
use crate::tree::{EdgeRow, Tree, VertexId};
use crate::universality::schedule::Schedule;
use crate::value::{Value, Vector};

/// Children of one vertex: every child but the absorbing one takes its
/// target value, and the absorbing child takes whatever value keeps the
/// weighted average equal to `parent`.
pub fn local_rule<S: Scalar, V: Vector<S>>(row: &EdgeRow, parent: &V, targets: &[V]) -> Vec<V> {
    let a = row.absorbing_slot();
    let mut rest = parent.clone();
    for (i, (t, w)) in targets.iter().zip(row.w()).enumerate() {
        if i != a {
            rest = rest.sub(&t.scale(&S::from_rational(w)));
        }
    }
    let corrected = rest.scale(&(S::one() / S::from_rational(&row.w()[a])));
    let mut out = targets.to_vec();
    out[a] = corrected;
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approximation<S> {
    pub values: LevelFunction<S>,
    /// Offsets in `T_n` where `values` differs from the target.
    pub mismatch: Vec<u64>,
    pub mismatch_measure: S,
}

fn dense_step<S: Scalar>(
    tree: &Tree,
    parent: &LevelFunction<S>,
    target: &LevelFunction<S>,
) -> Result<(Approximation<S>, Rational)> {
    let n = parent.level() + 1;
    if n > tree.depth() {
        return Err(Error::LevelOutOfRange {
            level: n,
            limit: tree.depth(),
        });
    }
    if target.level() > n {
        return Err(Error::InvalidArgument(format!(
            "target lives on level {}, past level {n}",
            target.level()
        )));
    }
    if target.dim() != parent.dim() {
        return Err(Error::DimensionMismatch {
            expected: parent.dim(),
            found: target.dim(),
        });
    }
    let chi = refine(tree, target, n)?;
    let pre = refine(tree, target, n - 1).ok();
    let measures = tree.level_measures(n)?;
    let mut values = Vec::with_capacity(chi.values().len());
    let mut q_max = Rational::zero();
    for (offset, pv) in parent.values().iter().enumerate() {
        let x = VertexId::new(n - 1, offset as u64);
        let row = tree.row(x)?;
        let first = tree.child(x, 0).offset as usize;
        let t = &chi.values()[first..first + row.arity()];
        values.extend(local_rule::<S, Value<S>>(row, pv, t));
        let corrected = pre.as_ref().map_or(true, |p| p.values()[offset] != *pv);
        if corrected {
            q_max = q_max.max(row.q()[row.absorbing_slot()].clone());
        }
    }
    let mut mismatch = Vec::new();
    let mut measure = S::zero();
    for (offset, (v, t)) in values.iter().zip(chi.values()).enumerate() {
        if v != t {
            mismatch.push(offset as u64);
            measure = measure + S::from_rational(&measures[offset]);
        }
    }
    Ok((
        Approximation {
            values: LevelFunction::new(tree, n, values)?,
            mismatch,
            mismatch_measure: measure,
        },
        q_max,
    ))
}

/// Applies [`local_rule`] to every vertex of `T_{n−1}` toward `target`.
pub fn one_level_approximation<S: Scalar>(
    tree: &Tree,
    parent: &LevelFunction<S>,
    target: &LevelFunction<S>,
) -> Result<Approximation<S>> {
    dense_step(tree, parent, target).map(|(a, _)| a)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchStep<S> {
    pub level: usize,
    pub mismatch: S,
    /// Largest absorbing probability among the vertices corrected on the
    /// way to this level; `mismatch ≤ absorbing_q_max · previous mismatch`.
    pub absorbing_q_max: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement<S> {
    /// Values on `T_{n+1}, …, T_{n+m}`.
    pub levels: Vec<LevelFunction<S>>,
    /// Step 0 is the mismatch of the input on `T_n`.
    pub log: Vec<MismatchStep<S>>,
}

/// Runs `steps` further levels of the rule. Matched sectors extend
/// constantly; only mismatched sectors change.
pub fn refine_mismatch<S: Scalar>(
    tree: &Tree,
    values: &LevelFunction<S>,
    target: &LevelFunction<S>,
    steps: usize,
) -> Result<Refinement<S>> {
    let n = values.level();
    if n + steps > tree.depth() {
        return Err(Error::InsufficientDepth(format!(
            "{steps} steps from level {n} pass depth {}",
            tree.depth()
        )));
    }
    if target.level() > n {
        return Err(Error::InvalidArgument(format!(
            "target lives on level {}, past level {n}",
            target.level()
        )));
    }
    let initial = crate::boundary::mismatch_measure(tree, values, target)?;
    let mut log = vec![MismatchStep {
        level: n,
        mismatch: initial,
        absorbing_q_max: Rational::one(),
    }];
    let mut levels = Vec::with_capacity(steps);
    let mut cur = values.clone();
    for _ in 0..steps {
        let (a, q_max) = dense_step(tree, &cur, target)?;
        log.push(MismatchStep {
            level: a.values.level(),
            mismatch: a.mismatch_measure.clone(),
            absorbing_q_max: q_max,
        });
        cur = a.values.clone();
        levels.push(a.values);
    }
    Ok(Refinement { levels, log })
}

/// A target as the synthesizer sees it: values on `T_level`, in offset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthTarget<V> {
    pub level: usize,
    pub values: Vec<V>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry<S> {
    pub level: usize,
    pub block: usize,
    pub target: usize,
    /// 0 on the block's approximation level, then one per refinement level.
    pub step: usize,
    pub mismatch: S,
    pub absorbing_q_max: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synthesis<V, S> {
    pub function: TreeFunction<V>,
    pub log: Vec<LogEntry<S>>,
}

struct Slot<S> {
    anchor: VertexId,
    measure: S,
}

/// Builds the witness for `schedule` level by level from the constant
/// function `initial`.
///
/// Nodes on level `n` are keyed by tree class, value and ancestor on level
/// `min(n, K)`, where `K` is the deepest target level; vertices sharing a
/// key receive identical subtrees, so the automaton stays small however
/// wide the tree is. Each node carries the measure of its sector set, which
/// gives exact mismatch measures for the log.
pub fn synthesize<S: Scalar, V: Vector<S>>(
    tree: &Tree,
    schedule: &Schedule,
    targets: &[SynthTarget<V>],
    initial: V,
) -> Result<Synthesis<V, S>> {
    let depth = schedule.depth();
    tree.check_level(depth)?;
    let anchor_level = targets.iter().map(|t| t.level).max().unwrap_or(0).min(depth);
    for t in targets {
        let size = tree.dense_level_size(t.level)?;
        if t.values.len() != size {
            return Err(Error::MissingValues(format!(
                "target on level {} needs {size} values, got {}",
                t.level,
                t.values.len()
            )));
        }
    }
    let mut levels: Vec<Vec<Node<V>>> = vec![vec![Node {
        class: 0,
        value: initial,
        children: Vec::new(),
    }]];
    let mut slots = vec![Slot {
        anchor: VertexId::ROOT,
        measure: S::one(),
    }];
    let mut log = Vec::new();
    for t in 1..=depth {
        let bi = schedule
            .block_index_at(t)
            .ok_or_else(|| Error::InfeasibleSchedule(format!("no block covers level {t}")))?;
        let block = schedule.blocks[bi];
        let target = targets
            .get(block.target)
            .ok_or_else(|| Error::InvalidArgument(format!("missing target {}", block.target + 1)))?;
        let a = block.start.max(target.level);
        let approximate = t >= a;
        let chi_at = |anchor: VertexId| -> Result<&V> {
            let v = tree.ancestor(anchor, target.level)?;
            Ok(&target.values[v.offset as usize])
        };

        let parents = levels.last_mut().expect("root level");
        let mut next: IndexMap<(usize, V, VertexId), Slot<S>> = IndexMap::new();
        let mut q_max = Rational::zero();
        for (node, slot) in parents.iter_mut().zip(&slots) {
            let row = tree.class_row(t - 1, node.class);
            let child_anchor = |s: usize| {
                if t <= anchor_level {
                    tree.child(slot.anchor, s)
                } else {
                    slot.anchor
                }
            };
            let values = if approximate {
                let goals = (0..row.arity())
                    .map(|s| chi_at(child_anchor(s)).cloned())
                    .collect::<Result<Vec<_>>>()?;
                let corrected = target.level >= t || node.value != *chi_at(slot.anchor)?;
                if corrected {
                    q_max = q_max.max(row.q()[row.absorbing_slot()].clone());
                }
                local_rule::<S, V>(row, &node.value, &goals)
            } else {
                vec![node.value.clone(); row.arity()]
            };
            node.children = values
                .into_iter()
                .enumerate()
                .map(|(s, value)| {
                    let anchor = child_anchor(s);
                    let key = (tree.class_child(t - 1, node.class, s), value, anchor);
                    let m = slot.measure.clone() * S::from_rational(&row.q()[s]);
                    let entry = next.entry(key);
                    let idx = entry.index() as u32;
                    match entry {
                        indexmap::map::Entry::Occupied(mut o) => {
                            let acc = &mut o.get_mut().measure;
                            *acc = acc.clone() + m;
                        }
                        indexmap::map::Entry::Vacant(v) => {
                            v.insert(Slot { anchor, measure: m });
                        }
                    }
                    idx
                })
                .collect();
        }
        let mut nodes = Vec::with_capacity(next.len());
        slots = Vec::with_capacity(next.len());
        let mut mismatch = S::zero();
        for ((class, value, _), slot) in next {
            if approximate && value != *chi_at(slot.anchor)? {
                mismatch = mismatch + slot.measure.clone();
            }
            nodes.push(Node {
                class,
                value,
                children: Vec::new(),
            });
            slots.push(slot);
        }
        levels.push(nodes);
        if approximate {
            log.push(LogEntry {
                level: t,
                block: bi,
                target: block.target,
                step: t - a,
                mismatch,
                absorbing_q_max: q_max,
            });
        }
    }
    Ok(Synthesis {
        function: TreeFunction::from_nodes(tree, levels)?,
        log,
    })
}
