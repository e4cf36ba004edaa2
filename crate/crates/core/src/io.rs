//! JSON documents for level functions, tree functions and witnesses.
//! Scalars are strings: `"p/q"` in exact mode, decimals in float mode.

use serde::{Deserialize, Serialize};

use crate::boundary::LevelFunction;
use crate::error::{Error, Result};
use crate::harmonic::{HarmonicTuple, Node, TreeFunction};
use crate::scalar::{encode_rational, parse_rational, ArithmeticMode, Scalar};
use crate::tree::{Tree, TreeDocument};
use crate::universality::{LogEntry, ProductTarget, Schedule, Witness};
use crate::value::{TupleValue, Value};

pub const WITNESS_SCHEMA: &str = "harmonic-trees/witness/v1";

pub fn encode_value<S: Scalar>(v: &Value<S>) -> Vec<String> {
    v.coords().iter().map(Scalar::encode).collect()
}

pub fn decode_value<S: Scalar>(coords: &[String]) -> Result<Value<S>> {
    Ok(Value::new(coords.iter().map(|c| S::decode(c)).collect::<Result<_>>()?))
}

pub fn encode_tuple<S: Scalar>(v: &TupleValue<S>) -> Vec<Vec<String>> {
    v.components().iter().map(encode_value).collect()
}

pub fn decode_tuple<S: Scalar>(parts: &[Vec<String>]) -> Result<TupleValue<S>> {
    TupleValue::new(parts.iter().map(|p| decode_value(p)).collect::<Result<_>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunctionDocument {
    pub level: usize,
    pub values: Vec<Vec<String>>,
}

impl LevelFunctionDocument {
    pub fn encode<S: Scalar>(f: &LevelFunction<S>) -> Self {
        LevelFunctionDocument {
            level: f.level(),
            values: f.values().iter().map(encode_value).collect(),
        }
    }

    pub fn decode<S: Scalar>(&self, tree: &Tree) -> Result<LevelFunction<S>> {
        LevelFunction::new(
            tree,
            self.level,
            self.values.iter().map(|v| decode_value(v)).collect::<Result<_>>()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument<T> {
    pub class: usize,
    pub value: T,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<u32>,
}

pub fn encode_function<V, T>(f: &TreeFunction<V>, enc: impl Fn(&V) -> T) -> Vec<Vec<NodeDocument<T>>>
where
    V: Clone + PartialEq,
{
    f.levels()
        .iter()
        .map(|nodes| {
            nodes
                .iter()
                .map(|n| NodeDocument {
                    class: n.class,
                    value: enc(&n.value),
                    children: n.children.clone(),
                })
                .collect()
        })
        .collect()
}

pub fn decode_function<V, T>(
    tree: &Tree,
    levels: &[Vec<NodeDocument<T>>],
    dec: impl Fn(&T) -> Result<V>,
) -> Result<TreeFunction<V>>
where
    V: Clone + PartialEq,
{
    let levels = levels
        .iter()
        .map(|nodes| {
            nodes
                .iter()
                .map(|n| {
                    Ok(Node {
                        class: n.class,
                        value: dec(&n.value)?,
                        children: n.children.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    TreeFunction::from_nodes(tree, levels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDocument {
    pub index: usize,
    pub epsilon: String,
    pub components: Vec<LevelFunctionDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDocument {
    pub level: usize,
    pub block: usize,
    pub target: usize,
    pub step: usize,
    pub mismatch: String,
    pub absorbing_q_max: String,
}

pub fn encode_log<S: Scalar>(log: &[LogEntry<S>]) -> Vec<LogDocument> {
    log.iter()
        .map(|e| LogDocument {
            level: e.level,
            block: e.block,
            target: e.target,
            step: e.step,
            mismatch: e.mismatch.encode(),
            absorbing_q_max: encode_rational(&e.absorbing_q_max),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub schema: String,
    pub mode: ArithmeticMode,
    pub tree: TreeDocument,
    pub schedule: Schedule,
    pub targets: Vec<TargetDocument>,
    pub function: Vec<Vec<NodeDocument<Vec<Vec<String>>>>>,
    pub log: Vec<LogDocument>,
}

impl WitnessDocument {
    pub fn encode<S: Scalar>(tree: &Tree, w: &Witness<S>) -> Self {
        WitnessDocument {
            schema: WITNESS_SCHEMA.to_string(),
            mode: S::MODE,
            tree: tree.to_document(),
            schedule: w.schedule.clone(),
            targets: w
                .targets
                .iter()
                .map(|t| TargetDocument {
                    index: t.index,
                    epsilon: encode_rational(&t.epsilon),
                    components: t.components.iter().map(LevelFunctionDocument::encode).collect(),
                })
                .collect(),
            function: encode_function(&w.function, encode_tuple),
            log: encode_log(&w.log),
        }
    }

    pub fn decode<S: Scalar>(&self) -> Result<(Tree, Witness<S>)> {
        if self.schema != WITNESS_SCHEMA {
            return Err(Error::Parse(format!("unsupported witness schema `{}`", self.schema)));
        }
        if self.mode != S::MODE {
            return Err(Error::Parse(format!("witness was built in {} mode", self.mode)));
        }
        let tree = Tree::from_document(&self.tree)?;
        let targets = self
            .targets
            .iter()
            .map(|t| {
                ProductTarget::new(
                    t.index,
                    t.components.iter().map(|c| c.decode(&tree)).collect::<Result<_>>()?,
                    parse_rational(&t.epsilon)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let function: HarmonicTuple<S> = decode_function(&tree, &self.function, |v| decode_tuple(v))?;
        let log = self
            .log
            .iter()
            .map(|e| {
                Ok(LogEntry {
                    level: e.level,
                    block: e.block,
                    target: e.target,
                    step: e.step,
                    mismatch: S::decode(&e.mismatch)?,
                    absorbing_q_max: parse_rational(&e.absorbing_q_max)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let witness = Witness {
            function,
            schedule: self.schedule.clone(),
            targets,
            log,
        };
        witness.verify(&tree)?;
        Ok((tree, witness))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Float, Rational};
    use crate::tree::{build_tree, TreeSpec};
    use crate::universality::{build_x_witness, enumerate_targets, product_targets, EpsilonLadder, XParams};
    use crate::value::GridParams;

    #[test]
    fn witness_round_trip() {
        let t = build_tree(&TreeSpec::uniform(3, 14)).unwrap();
        let ts = enumerate_targets::<Rational>(&t, GridParams::default(), 4, &EpsilonLadder::Halving).unwrap();
        let w = build_x_witness(&t, product_targets(&ts, 2).unwrap(), &XParams::default()).unwrap();
        let doc = WitnessDocument::encode(&t, &w);
        let json = serde_json::to_string(&doc).unwrap();
        let back: WitnessDocument = serde_json::from_str(&json).unwrap();
        let (t2, w2) = back.decode::<Rational>().unwrap();
        assert_eq!(t2, t);
        assert_eq!(w2, w);
        assert!(back.decode::<Float>().is_err());
    }
}
