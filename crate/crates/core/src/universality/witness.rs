use crate::error::{Error, Result};
use crate::harmonic::{check_harmonic, HarmonicFunction, HarmonicTuple};
use crate::scalar::{Rational, Scalar};
use crate::tree::Tree;
use crate::universality::schedule::Schedule;
use crate::universality::synthesis::{synthesize, LogEntry, SynthTarget};
use crate::universality::targets::{ProductTarget, TargetShape};
use crate::value::TupleValue;

/// A synthesized tuple function together with the schedule and targets it
/// was built for and the per-level mismatch log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness<S> {
    pub function: HarmonicTuple<S>,
    pub schedule: Schedule,
    pub targets: Vec<ProductTarget<S>>,
    pub log: Vec<LogEntry<S>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XParams {
    pub growth: Rational,
    pub first_block_end: Option<usize>,
}

impl Default for XParams {
    fn default() -> Self {
        XParams {
            growth: Rational::from_i64(5),
            first_block_end: None,
        }
    }
}

fn shapes<S: Scalar>(targets: &[ProductTarget<S>]) -> Result<(Vec<TargetShape>, usize, usize)> {
    let first = targets
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one target".into()))?;
    for t in targets {
        if t.width() != first.width() {
            return Err(Error::WidthMismatch {
                expected: first.width(),
                found: t.width(),
            });
        }
        if t.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: t.dim(),
            });
        }
    }
    Ok((targets.iter().map(ProductTarget::shape).collect(), first.width(), first.dim()))
}

fn build<S: Scalar>(tree: &Tree, targets: Vec<ProductTarget<S>>, schedule: Schedule) -> Result<Witness<S>> {
    let (_, width, dim) = shapes(&targets)?;
    let synth = targets
        .iter()
        .map(|t| {
            let tuple = t.tuple(tree)?;
            Ok(SynthTarget {
                level: tuple.level(),
                values: tuple.values().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = synthesize::<S, TupleValue<S>>(tree, &schedule, &synth, TupleValue::zeros(width, dim))?;
    let witness = Witness {
        function: out.function,
        schedule,
        targets,
        log: out.log,
    };
    witness.verify(tree)?;
    Ok(witness)
}

/// Geometric blocks (see [`Schedule::x`]) steering toward each target in turn.
pub fn build_x_witness<S: Scalar>(tree: &Tree, targets: Vec<ProductTarget<S>>, params: &XParams) -> Result<Witness<S>> {
    let (shapes, _, _) = shapes(&targets)?;
    let schedule = Schedule::x(tree.depth(), &shapes, &params.growth, params.first_block_end)?;
    build(tree, targets, schedule)
}

/// Fixed-length cyclic blocks (see [`Schedule::ufm`]).
pub fn build_ufm_witness<S: Scalar>(tree: &Tree, targets: Vec<ProductTarget<S>>, block_length: usize) -> Result<Witness<S>> {
    let (shapes, _, _) = shapes(&targets)?;
    let schedule = Schedule::ufm(tree.depth(), &shapes, block_length)?;
    build(tree, targets, schedule)
}

/// Witness for an explicitly given schedule.
pub fn build_scheduled_witness<S: Scalar>(
    tree: &Tree,
    targets: Vec<ProductTarget<S>>,
    schedule: Schedule,
) -> Result<Witness<S>> {
    let (shapes, _, _) = shapes(&targets)?;
    schedule.validate(schedule.depth(), &shapes)?;
    build(tree, targets, schedule)
}

impl<S: Scalar> Witness<S> {
    pub fn width(&self) -> usize {
        self.function.width()
    }

    pub fn component(&self, k: usize) -> HarmonicFunction<S> {
        self.function.component(k)
    }

    /// Harmonicity, and per block: mismatch non-increasing, bounded by
    /// `absorbing_q_max` times the previous level, and by `2^{-k}` times
    /// the block-initial value after `k` refinement levels.
    pub fn verify(&self, tree: &Tree) -> Result<()> {
        let report = check_harmonic::<S, _>(tree, &self.function);
        if let Some(v) = report.violations.first() {
            return Err(Error::Invariant(format!(
                "witness is not harmonic at level {} node {}",
                v.level, v.node
            )));
        }
        let mut prev: Option<&LogEntry<S>> = None;
        let mut initial = S::one();
        for e in &self.log {
            match prev {
                Some(p) if p.block == e.block => {
                    if e.mismatch > p.mismatch {
                        return Err(Error::Invariant(format!("mismatch grows at level {}", e.level)));
                    }
                    if e.mismatch > S::from_rational(&e.absorbing_q_max) * p.mismatch.clone() {
                        return Err(Error::Invariant(format!(
                            "mismatch at level {} exceeds the absorbing bound",
                            e.level
                        )));
                    }
                    if e.mismatch > S::half_pow(e.step) * initial.clone() {
                        return Err(Error::Invariant(format!("mismatch at level {} above 2^-k bound", e.level)));
                    }
                }
                _ => {
                    if e.mismatch > S::from_rational(&e.absorbing_q_max) {
                        return Err(Error::Invariant(format!(
                            "initial mismatch at level {} exceeds the absorbing bound",
                            e.level
                        )));
                    }
                    initial = e.mismatch.clone();
                }
            }
            prev = Some(e);
        }
        Ok(())
    }
}
