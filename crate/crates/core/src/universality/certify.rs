use serde::Serialize;

use crate::density::{empirical_lower_density, empirical_upper_density, profile, DensityProfile};
use crate::error::{Error, Result};
use crate::harmonic::{HarmonicFunction, HarmonicTuple};
use crate::scalar::{Rational, Scalar};
use crate::tree::Tree;
use crate::universality::targets::ProductTarget;
use crate::universality::witness::Witness;
use crate::walk::p_metric_series;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetHits<S> {
    pub target: usize,
    pub epsilon: Rational,
    /// `distances[k][n]` = `P(ω_n(f_k), χ_k)` for `n = 0..=horizon`.
    pub distances: Vec<Vec<S>>,
    /// Levels in `[1, horizon]` where every component is within `ε`.
    pub hits: Vec<usize>,
    pub component_hits: Vec<Vec<usize>>,
    pub profile: DensityProfile,
    pub upper_density: Rational,
    pub lower_density: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitReport<S> {
    pub horizon: usize,
    pub warmup: usize,
    pub targets: Vec<TargetHits<S>>,
}

/// `P(ω_n(f), χ) < ε` per level for one scalar function.
pub fn hit_levels<S: Scalar>(distances: &[S], epsilon: &Rational) -> Vec<usize> {
    let eps = S::from_rational(epsilon);
    distances
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, d)| **d < eps)
        .map(|(n, _)| n)
        .collect()
}

pub fn certify_function<S: Scalar>(
    tree: &Tree,
    f: &HarmonicFunction<S>,
    targets: &[ProductTarget<S>],
    horizon: usize,
    warmup: usize,
) -> Result<HitReport<S>> {
    let tuple = f.map(|v| crate::value::TupleValue::new(vec![v.clone()]).expect("one component"));
    certify_hits(tree, &tuple, targets, horizon, warmup)
}

/// Exact hit sets and density profiles of `f` against each target.
pub fn certify_hits<S: Scalar>(
    tree: &Tree,
    f: &HarmonicTuple<S>,
    targets: &[ProductTarget<S>],
    horizon: usize,
    warmup: usize,
) -> Result<HitReport<S>> {
    if horizon > f.depth() {
        return Err(Error::LevelOutOfRange {
            level: horizon,
            limit: f.depth(),
        });
    }
    let components: Vec<HarmonicFunction<S>> = (0..f.width()).map(|k| f.component(k)).collect();
    let mut out = Vec::with_capacity(targets.len());
    for target in targets {
        if target.width() != f.width() {
            return Err(Error::WidthMismatch {
                expected: f.width(),
                found: target.width(),
            });
        }
        let distances = components
            .iter()
            .zip(&target.components)
            .map(|(c, chi)| p_metric_series(tree, c, chi, horizon))
            .collect::<Result<Vec<_>>>()?;
        let component_hits: Vec<Vec<usize>> = distances.iter().map(|d| hit_levels(d, &target.epsilon)).collect();
        let hits: Vec<usize> = (1..=horizon)
            .filter(|n| component_hits.iter().all(|h| h.binary_search(n).is_ok()))
            .collect();
        let p = profile(&hits, horizon, warmup)?;
        out.push(TargetHits {
            target: target.index,
            epsilon: target.epsilon.clone(),
            distances,
            hits,
            component_hits,
            upper_density: empirical_upper_density(&p),
            lower_density: empirical_lower_density(&p),
            profile: p,
        });
    }
    Ok(HitReport {
        horizon,
        warmup,
        targets: out,
    })
}

/// Levels where the log promises a hit (mismatch below `ε`) that the
/// report does not contain; empty for a correct witness.
pub fn guarantee_violations<S: Scalar>(witness: &Witness<S>, report: &HitReport<S>) -> Vec<usize> {
    witness
        .log
        .iter()
        .filter(|e| e.level <= report.horizon)
        .filter(|e| e.mismatch < S::from_rational(&witness.targets[e.target].epsilon))
        .filter(|e| {
            report
                .targets
                .get(e.target)
                .map_or(true, |t| t.hits.binary_search(&e.level).is_err())
        })
        .map(|e| e.level)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub target: usize,
    pub statistic: String,
    pub value: String,
    pub threshold: String,
    pub pass: bool,
}

/// Empirical finite-horizon comparisons; never a class-membership claim.
pub fn upper_density_verdicts<S: Scalar>(report: &HitReport<S>, threshold: &Rational) -> Vec<Verdict> {
    verdicts(report, threshold, "empirical upper density", |t| &t.upper_density)
}

pub fn lower_density_verdicts<S: Scalar>(report: &HitReport<S>, threshold: &Rational) -> Vec<Verdict> {
    verdicts(report, threshold, "empirical lower density", |t| &t.lower_density)
}

fn verdicts<S: Scalar>(
    report: &HitReport<S>,
    threshold: &Rational,
    statistic: &str,
    pick: impl Fn(&TargetHits<S>) -> &Rational,
) -> Vec<Verdict> {
    report
        .targets
        .iter()
        .map(|t| Verdict {
            target: t.target,
            statistic: statistic.to_string(),
            value: pick(t).encode(),
            threshold: threshold.encode(),
            pass: pick(t) >= threshold,
        })
        .collect()
}
