use crate::error::{Error, Result};
use crate::harmonic::{
    enumerate_dense_harmonics, linear_combination, rho_metric, truncate_and_extend, HarmonicFunction, RhoReport,
    MAX_RHO_TERMS,
};
use crate::scalar::{Rational, Scalar};
use crate::tree::Tree;
use crate::universality::targets::{enumerate_targets, product_targets, EpsilonLadder};
use crate::universality::witness::{build_x_witness, Witness, XParams};
use crate::value::GridParams;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    /// Number of members, and the width of the underlying tuple witness.
    pub members: usize,
    pub grid: GridParams,
    /// Product targets steering the tuple witness `h`.
    pub witness_targets: usize,
    pub witness_epsilon: Rational,
    pub x: XParams,
    pub max_terms: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            members: 20,
            grid: GridParams::default(),
            witness_targets: 2,
            witness_epsilon: Rational::from_ratio(1, 4),
            x: XParams::default(),
            max_terms: MAX_RHO_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyMember<S> {
    pub n: usize,
    /// Smallest `j₀` with `2^{-j₀} < 1/n`.
    pub j0: usize,
    /// `N(n)`: smallest depth whose breadth-first prefix holds `j₀` vertices.
    pub truncation: usize,
    pub f: HarmonicFunction<S>,
    pub rho: RhoReport<S>,
    /// `ρ` sum plus tail is below `1/n`.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseFamily<S> {
    pub witness: Witness<S>,
    pub members: Vec<FamilyMember<S>>,
}

/// `⌊log₂ n⌋ + 1`.
pub fn tail_terms(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

pub fn truncation_depth(tree: &Tree, j0: usize) -> Result<usize> {
    (0..=tree.depth())
        .find(|&k| tree.vertices_through(k) >= j0 as u64)
        .ok_or_else(|| Error::InsufficientDepth(format!("tree has fewer than {j0} vertices")))
}

/// `f_n = h_n + g_n` with `g_n` the truncated, constantly extended
/// `p_n − h_n`, where `p_n` runs through the dense enumeration and `h_n`
/// through the components of one X-style tuple witness.
pub fn dense_family<S: Scalar>(tree: &Tree, params: &FamilyParams) -> Result<DenseFamily<S>> {
    let m = params.members;
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one family member".into()));
    }
    let ladder = EpsilonLadder::Fixed {
        epsilon: params.witness_epsilon.encode(),
    };
    let targets = enumerate_targets::<S>(tree, params.grid, m * params.witness_targets, &ladder)?;
    let witness = build_x_witness(tree, product_targets(&targets, m)?, &params.x)?;
    let depth = tree.depth();
    let mut members = Vec::with_capacity(m);
    for n in 1..=m {
        let j0 = tail_terms(n);
        let truncation = truncation_depth(tree, j0)?;
        let p = enumerate_dense_harmonics::<S>(tree, n, params.grid, depth)?;
        let h = witness.component(n - 1);
        let g = truncate_and_extend(tree, &p, &h, truncation)?;
        let f = linear_combination(tree, &[S::one(), S::one()], &[&h, &g])?;
        let rho = rho_metric(tree, &p, &f, params.max_terms)?;
        let certified = rho.upper_bound() < S::from_rational(&Rational::from_ratio(1, n as i64));
        members.push(FamilyMember {
            n,
            j0,
            truncation,
            f,
            rho,
            certified,
        });
    }
    Ok(DenseFamily { witness, members })
}
