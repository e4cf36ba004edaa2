use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::universality::targets::TargetShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    X,
    Ufm,
}

/// Levels `start..=end` are steered toward target number `target`
/// (a position in the witness's target list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub target: usize,
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn length(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn contains(&self, level: usize) -> bool {
        (self.start..=self.end).contains(&level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub blocks: Vec<Block>,
}

/// `⌈log₂(1/ε)⌉`.
pub fn refinement_levels(eps: &Rational) -> usize {
    let mut c = 0;
    let mut pow = BigInt::one();
    while eps.numer() * &pow < *eps.denom() {
        pow <<= 1;
        c += 1;
    }
    c
}

/// First level of a block at which the approximation rule runs: the
/// target must be defined, so nothing happens above its own level.
pub fn approximation_level(shape: &TargetShape, start: usize) -> usize {
    start.max(shape.level)
}

/// Levels from block start up to and including the first level where a
/// hit is guaranteed: any wait for the target level, one approximation
/// level, and `⌈log₂(1/ε)⌉` refinement levels.
pub fn setup_length(shape: &TargetShape, start: usize) -> usize {
    approximation_level(shape, start) - start + 1 + refinement_levels(&shape.epsilon)
}

fn check_block(shape: &TargetShape, b: &Block) -> Result<()> {
    let setup = setup_length(shape, b.start);
    if b.length() < setup {
        return Err(Error::InfeasibleSchedule(format!(
            "block {}..={} for target {} has length {}, setup needs {setup}",
            b.start,
            b.end,
            b.target + 1,
            b.length()
        )));
    }
    Ok(())
}

/// Appends `block`, clamped to `depth`. A clamped block too short for its
/// setup is dropped and the previous block runs to `depth` instead.
fn push_clamped(blocks: &mut Vec<Block>, mut block: Block, shape: &TargetShape, depth: usize) -> Result<()> {
    block.end = block.end.min(depth);
    if block.end < depth || block.length() >= setup_length(shape, block.start) {
        blocks.push(block);
        return Ok(());
    }
    match blocks.last_mut() {
        Some(prev) => {
            prev.end = depth;
            Ok(())
        }
        None => Err(Error::InsufficientDepth(format!(
            "depth {depth} is below the setup length {} of the first target",
            setup_length(shape, block.start)
        ))),
    }
}

fn ceil_product(growth: &Rational, n: usize) -> usize {
    let v = (growth * Rational::from_integer(BigInt::from(n))).ceil();
    v.to_integer().try_into().unwrap_or(usize::MAX)
}

impl Schedule {
    /// Geometric blocks cycling through the targets: the first block ends
    /// at `first_end` (default `max(⌈g⌉, setup)`), and the block after one
    /// ending at `e` ends at `max(⌈g·e⌉, e + setup)`.
    pub fn x(depth: usize, targets: &[TargetShape], growth: &Rational, first_end: Option<usize>) -> Result<Schedule> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("need at least one target".into()));
        }
        if *growth <= Rational::one() || !growth.is_positive() {
            return Err(Error::InvalidArgument(format!("growth factor {growth} must exceed 1")));
        }
        let mut blocks: Vec<Block> = Vec::new();
        let mut end = 0;
        let mut i = 0;
        while end < depth {
            let target = i % targets.len();
            let shape = &targets[target];
            let start = end + 1;
            let setup = setup_length(shape, start);
            let stop = if i == 0 {
                first_end.unwrap_or_else(|| ceil_product(growth, 1)).max(setup)
            } else {
                ceil_product(growth, end).max(end + setup)
            };
            push_clamped(&mut blocks, Block { target, start, end: stop }, shape, depth)?;
            end = blocks.last().expect("pushed").end;
            i += 1;
        }
        let schedule = Schedule {
            kind: ScheduleKind::X,
            blocks,
        };
        schedule.require_every_target(targets.len(), depth)?;
        schedule.validate(depth, targets)?;
        Ok(schedule)
    }

    /// Blocks of `block_length` levels assigned to the targets in turn.
    pub fn ufm(depth: usize, targets: &[TargetShape], block_length: usize) -> Result<Schedule> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("need at least one target".into()));
        }
        if block_length == 0 {
            return Err(Error::InvalidArgument("block length must be positive".into()));
        }
        let needed = block_length * targets.len() * 2;
        if depth < needed {
            return Err(Error::InsufficientDepth(format!(
                "depth {depth} is below two cycles of {} blocks of length {block_length}",
                targets.len()
            )));
        }
        let mut blocks: Vec<Block> = Vec::new();
        let mut end = 0;
        let mut i = 0;
        while end < depth {
            let target = i % targets.len();
            let block = Block {
                target,
                start: end + 1,
                end: end + block_length,
            };
            if block.end <= depth {
                check_block(&targets[target], &block)?;
            }
            push_clamped(&mut blocks, block, &targets[target], depth)?;
            end = blocks.last().expect("pushed").end;
            i += 1;
        }
        let schedule = Schedule {
            kind: ScheduleKind::Ufm,
            blocks,
        };
        schedule.validate(depth, targets)?;
        Ok(schedule)
    }

    fn require_every_target(&self, count: usize, depth: usize) -> Result<()> {
        let covered = (0..count).filter(|&t| self.blocks.iter().any(|b| b.target == t)).count();
        if covered < count {
            return Err(Error::InfeasibleSchedule(format!(
                "depth {depth} fits blocks for only {covered} of {count} targets"
            )));
        }
        Ok(())
    }

    /// Blocks are contiguous from level 1 to `depth`, point at existing
    /// targets, and each is at least as long as its setup.
    pub fn validate(&self, depth: usize, targets: &[TargetShape]) -> Result<()> {
        let mut next = 1;
        for b in &self.blocks {
            if b.start != next || b.end < b.start {
                return Err(Error::InfeasibleSchedule(format!(
                    "block {}..={} does not continue at level {next}",
                    b.start, b.end
                )));
            }
            let shape = targets.get(b.target).ok_or_else(|| {
                Error::InvalidArgument(format!("block refers to missing target {}", b.target + 1))
            })?;
            check_block(shape, b)?;
            next = b.end + 1;
        }
        if next != depth + 1 {
            return Err(Error::InfeasibleSchedule(format!(
                "blocks end at level {}, depth is {depth}",
                next - 1
            )));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn block_index_at(&self, level: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(level))
    }

    pub fn block_at(&self, level: usize) -> Option<&Block> {
        self.block_index_at(level).map(|i| &self.blocks[i])
    }

    pub fn blocks_for(&self, target: usize) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(move |b| b.target == target)
    }
}
