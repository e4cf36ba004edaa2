//! Witness synthesis for the universality classes and the certifiers
//! that check their finite-horizon behavior.
//!
//! A witness is built level by level: blocks of levels are assigned to
//! targets by a [`Schedule`], and inside each block the absorbing-child
//! rule ([`local_rule`]) steers the function toward the block's target
//! while keeping it exactly harmonic. All density verdicts are empirical
//! statements about a finite horizon.

mod certify;
mod family;
mod genericity;
mod schedule;
mod span;
mod synthesis;
mod targets;
mod witness;

pub use certify::{
    certify_function, certify_hits, guarantee_violations, hit_levels, lower_density_verdicts,
    upper_density_verdicts, HitReport, TargetHits, Verdict,
};
pub use family::{dense_family, tail_terms, truncation_depth, DenseFamily, FamilyMember, FamilyParams};
pub use genericity::{double_genericity_check, functions_differ, GenericityParams, GenericityReport, SpanSample};
pub use schedule::{approximation_level, refinement_levels, setup_length, Block, Schedule, ScheduleKind};
pub use span::{span_inclusion_check, SpanReport};
pub use synthesis::{
    local_rule, one_level_approximation, refine_mismatch, synthesize, Approximation, LogEntry, MismatchStep,
    Refinement, Synthesis, SynthTarget,
};
pub use targets::{enumerate_targets, product_targets, EpsilonLadder, ProductTarget, Target, TargetShape};
pub use witness::{build_scheduled_witness, build_ufm_witness, build_x_witness, Witness, XParams};
