use crate::boundary::LevelFunction;
use crate::error::{Error, Result};
use crate::harmonic::{linear_combination, HarmonicFunction};
use crate::scalar::{Rational, Scalar};
use crate::tree::Tree;
use crate::value::{Value, Vector};
use crate::walk::p_metric_series;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanReport<S> {
    pub horizon: usize,
    /// `b_i = a_i`, or 1 where `a_i = 0`.
    pub b: Vec<S>,
    /// `δ = ε / s`.
    pub delta: S,
    /// Levels where `b_i ω_n(f_i) ∈ B(0, δ)` for `i < s` and `b_s ω_n(f_s) ∈ B(ψ, δ)`.
    pub vhat_hits: Vec<usize>,
    /// Levels where `ω_n(Σ a_i f_i) ∈ B(ψ, ε)`.
    pub combo_hits: Vec<usize>,
    /// `P(ω_n(Σ a_i f_i), ψ)` for `n = 0..=horizon`.
    pub combo_distances: Vec<S>,
    /// `Σ_{i<s} P(ω_n(a_i f_i), 0) + P(ω_n(a_s f_s), ψ)`.
    pub triangle_bounds: Vec<S>,
    pub inclusion_violations: Vec<usize>,
    pub triangle_violations: Vec<usize>,
}

impl<S> SpanReport<S> {
    pub fn passes(&self) -> bool {
        self.inclusion_violations.is_empty() && self.triangle_violations.is_empty()
    }
}

fn scaled<S: Scalar>(f: &HarmonicFunction<S>, a: &S) -> HarmonicFunction<S> {
    f.map(|v| v.scale(a))
}

/// Level-by-level check that the product neighborhood `V̂` built from
/// `δ = ε/s` lands inside `B(ψ, ε)` under `(f_i) ↦ Σ a_i f_i`.
pub fn span_inclusion_check<S: Scalar>(
    tree: &Tree,
    components: &[&HarmonicFunction<S>],
    coeffs: &[S],
    psi: &LevelFunction<S>,
    epsilon: &Rational,
    horizon: usize,
) -> Result<SpanReport<S>> {
    let s = components.len();
    if s == 0 || coeffs.len() != s {
        return Err(Error::InvalidArgument(format!("{} coefficients for {s} functions", coeffs.len())));
    }
    if coeffs[s - 1].is_zero() {
        return Err(Error::InvalidArgument("last coefficient must be nonzero".into()));
    }
    crate::universality::targets::check_epsilon(epsilon)?;
    for f in components {
        if f.root_value().dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                found: f.root_value().dim(),
            });
        }
    }
    let zero = LevelFunction::constant(tree, 0, Value::zeros(psi.dim()))?;
    let eps = S::from_rational(epsilon);
    let delta = eps.clone() / S::from_i64(s as i64);
    let b: Vec<S> = coeffs
        .iter()
        .map(|a| if a.is_zero() { S::one() } else { a.clone() })
        .collect();

    let goal = |i: usize| if i + 1 == s { psi } else { &zero };
    let mut vhat = vec![true; horizon + 1];
    let mut bound = vec![S::zero(); horizon + 1];
    for (i, f) in components.iter().enumerate() {
        let near = p_metric_series(tree, &scaled(f, &b[i]), goal(i), horizon)?;
        for (n, d) in near.iter().enumerate() {
            vhat[n] &= *d < delta;
        }
        let term = if coeffs[i].is_zero() && i + 1 < s {
            vec![S::zero(); horizon + 1]
        } else {
            p_metric_series(tree, &scaled(f, &coeffs[i]), goal(i), horizon)?
        };
        for (acc, d) in bound.iter_mut().zip(term) {
            *acc = acc.clone() + d;
        }
    }
    let combo = linear_combination(tree, coeffs, components)?;
    let combo_distances = p_metric_series(tree, &combo, psi, horizon)?;

    let vhat_hits: Vec<usize> = (1..=horizon).filter(|&n| vhat[n]).collect();
    let combo_hits: Vec<usize> = (1..=horizon).filter(|&n| combo_distances[n] < eps).collect();
    let inclusion_violations = vhat_hits
        .iter()
        .copied()
        .filter(|n| combo_hits.binary_search(n).is_err())
        .collect();
    let triangle_violations = (0..=horizon).filter(|&n| combo_distances[n] > bound[n]).collect();
    Ok(SpanReport {
        horizon,
        b,
        delta,
        vhat_hits,
        combo_hits,
        combo_distances,
        triangle_bounds: bound,
        inclusion_violations,
        triangle_violations,
    })
}
