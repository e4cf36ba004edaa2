use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::{encode_rational, parse_rational, ArithmeticMode, Rational};
use crate::tree::{build_tree, Tree, TreeSpec};
use crate::universality::{EpsilonLadder, FamilyParams, GenericityParams, XParams};
use crate::value::GridParams;

pub const CONFIG_SCHEMA: &str = "harmonic-trees/config/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub tree: TreeSpec,
    #[serde(default)]
    pub mode: ArithmeticMode,
    #[serde(default = "one")]
    pub dim: usize,
    /// Width of the tuple witnesses built by `witness-x`, `witness-ufm`
    /// and `span-check`.
    #[serde(default = "one")]
    pub width: usize,
    #[serde(default)]
    pub targets: TargetConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    /// Defaults to the tree depth.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Defaults to 5 for X witnesses and one full block cycle for U_FM ones.
    #[serde(default)]
    pub warmup: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub span: SpanConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub genericity: GenericityConfig,
    #[serde(default = "default_out")]
    pub out: String,
}

fn one() -> usize {
    1
}

fn default_out() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    /// Number of (product) targets.
    pub count: usize,
    pub resolution: u32,
    pub bound: u32,
    pub epsilon: EpsilonLadder,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig {
            count: 3,
            resolution: 0,
            bound: 1,
            epsilon: EpsilonLadder::Fixed { epsilon: "1/8".into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub growth: String,
    pub first_block_end: Option<usize>,
    pub block_length: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            growth: "5".into(),
            first_block_end: None,
            block_length: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub x_upper: String,
    pub ufm_lower: String,
    pub dip: String,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            x_upper: "3/4".into(),
            ufm_lower: "1/20".into(),
            dip: "3/10".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpanConfig {
    pub combinations: usize,
    /// Largest number of components in one combination, capped by `width`.
    pub max_terms: usize,
    pub epsilon: String,
}

impl Default for SpanConfig {
    fn default() -> Self {
        SpanConfig {
            combinations: 20,
            max_terms: 3,
            epsilon: "1/4".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub members: usize,
    pub witness_targets: usize,
    pub witness_epsilon: String,
    pub max_rho_terms: usize,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        let d = FamilyParams::default();
        FamilyConfig {
            members: d.members,
            witness_targets: d.witness_targets,
            witness_epsilon: encode_rational(&d.witness_epsilon),
            max_rho_terms: d.max_terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenericityConfig {
    pub samples: usize,
    pub reference_epsilon: String,
    pub foreign_epsilon: String,
    pub ufm_warmup: Option<usize>,
    pub x_warmup: usize,
}

impl Default for GenericityConfig {
    fn default() -> Self {
        let d = GenericityParams::default();
        GenericityConfig {
            samples: d.samples,
            reference_epsilon: encode_rational(&d.reference_epsilon),
            foreign_epsilon: encode_rational(&d.foreign_epsilon),
            ufm_warmup: d.ufm_warmup,
            x_warmup: d.x_warmup,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: CONFIG_SCHEMA.into(),
            tree: TreeSpec::uniform(2, 60),
            mode: ArithmeticMode::Exact,
            dim: 1,
            width: 1,
            targets: TargetConfig::default(),
            schedule: ScheduleConfig::default(),
            horizon: None,
            warmup: None,
            seed: 0,
            thresholds: Thresholds::default(),
            span: SpanConfig::default(),
            family: FamilyConfig::default(),
            genericity: GenericityConfig::default(),
            out: default_out(),
        }
    }
}

fn rational_field(errors: &mut Vec<String>, name: &str, s: &str) -> Option<Rational> {
    match parse_rational(s) {
        Ok(r) => Some(r),
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            None
        }
    }
}

fn unit_interval(errors: &mut Vec<String>, name: &str, s: &str, open: bool) {
    if let Some(r) = rational_field(errors, name, s) {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        let ok = if open { r > zero && r < one } else { r >= zero && r <= one };
        if !ok {
            errors.push(format!("{name}: {s} outside {}", if open { "(0, 1)" } else { "[0, 1]" }));
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The config as embedded in reports: everything except the output
    /// directory, which does not affect results.
    pub fn report_value(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("out");
        v
    }

    /// Hex SHA-256 of the compact JSON form of [`Self::report_value`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(&self.report_value()).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(self.tree.depth)
    }

    pub fn grid(&self) -> GridParams {
        GridParams {
            dim: self.dim,
            resolution: self.targets.resolution,
            bound: self.targets.bound,
        }
    }

    pub fn growth(&self) -> Result<Rational> {
        parse_rational(&self.schedule.growth)
    }

    pub fn x_params(&self) -> Result<XParams> {
        Ok(XParams {
            growth: self.growth()?,
            first_block_end: self.schedule.first_block_end,
        })
    }

    pub fn family_params(&self) -> Result<FamilyParams> {
        Ok(FamilyParams {
            members: self.family.members,
            grid: self.grid(),
            witness_targets: self.family.witness_targets,
            witness_epsilon: parse_rational(&self.family.witness_epsilon)?,
            x: self.x_params()?,
            max_terms: self.family.max_rho_terms,
        })
    }

    pub fn genericity_params(&self) -> Result<GenericityParams> {
        let g = &self.genericity;
        Ok(GenericityParams {
            dim: self.dim,
            block_length: self.schedule.block_length,
            x: self.x_params()?,
            reference_epsilon: parse_rational(&g.reference_epsilon)?,
            foreign_epsilon: parse_rational(&g.foreign_epsilon)?,
            samples: g.samples,
            seed: self.seed,
            horizon: self.horizon,
            ufm_warmup: g.ufm_warmup,
            x_warmup: g.x_warmup,
            floor: parse_rational(&self.thresholds.ufm_lower)?,
            dip: parse_rational(&self.thresholds.dip)?,
        })
    }

    /// Checks every field and builds the tree; all problems are reported
    /// together as [`Error::InvalidConfig`].
    pub fn validate(&self) -> Result<Tree> {
        let mut errors = Vec::new();
        if self.schema != CONFIG_SCHEMA {
            errors.push(format!("schema: expected `{CONFIG_SCHEMA}`, found `{}`", self.schema));
        }
        if self.dim == 0 {
            errors.push("dim: must be at least 1".into());
        }
        if self.width == 0 {
            errors.push("width: must be at least 1".into());
        }
        if self.targets.count == 0 {
            errors.push("targets.count: must be at least 1".into());
        }
        if self.targets.bound == 0 {
            errors.push("targets.bound: must be at least 1".into());
        }
        for i in 1..=self.targets.count * self.width.max(1) {
            if let Err(e) = self.targets.epsilon.epsilon(i) {
                errors.push(format!("targets.epsilon: {e}"));
                break;
            }
        }
        let horizon = self.horizon();
        if horizon == 0 || horizon > self.tree.depth {
            errors.push(format!("horizon: {horizon} outside [1, {}]", self.tree.depth));
        }
        if let Some(w) = self.warmup {
            if w >= horizon {
                errors.push(format!("warmup: {w} must be below the horizon {horizon}"));
            }
        }
        if let Some(g) = rational_field(&mut errors, "schedule.growth", &self.schedule.growth) {
            if g <= Rational::from_integer(1.into()) {
                errors.push("schedule.growth: must exceed 1".into());
            }
        }
        if self.schedule.block_length == 0 {
            errors.push("schedule.block_length: must be at least 1".into());
        }
        unit_interval(&mut errors, "thresholds.x_upper", &self.thresholds.x_upper, false);
        unit_interval(&mut errors, "thresholds.ufm_lower", &self.thresholds.ufm_lower, false);
        unit_interval(&mut errors, "thresholds.dip", &self.thresholds.dip, false);
        unit_interval(&mut errors, "span.epsilon", &self.span.epsilon, true);
        if self.span.max_terms == 0 {
            errors.push("span.max_terms: must be at least 1".into());
        }
        if self.family.members == 0 || self.family.witness_targets == 0 {
            errors.push("family: members and witness_targets must be at least 1".into());
        }
        unit_interval(&mut errors, "family.witness_epsilon", &self.family.witness_epsilon, true);
        unit_interval(&mut errors, "genericity.reference_epsilon", &self.genericity.reference_epsilon, true);
        unit_interval(&mut errors, "genericity.foreign_epsilon", &self.genericity.foreign_epsilon, true);
        if self.genericity.samples == 0 {
            errors.push("genericity.samples: must be at least 1".into());
        }
        let tree = match build_tree(&self.tree) {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("tree: {e}"));
                None
            }
        };
        match tree {
            Some(t) if errors.is_empty() => Ok(t),
            _ => Err(Error::InvalidConfig(errors)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::EdgeRule;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        assert!(c.validate().is_ok());
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn minimal_document() {
        let c = RunConfig::from_json(
            r#"{"schema": "harmonic-trees/config/v1",
                "tree": {"depth": 8, "branching": {"kind": "uniform", "arity": 3}, "q": {"kind": "uniform"}, "w": {"kind": "uniform"}}}"#,
        )
        .unwrap();
        assert_eq!(c.horizon(), 8);
        assert_eq!(c.targets.count, 3);
        assert!(RunConfig::from_json(r#"{"schema": "x", "tree": {}, "bogus": 1}"#).is_err());
    }

    #[test]
    fn errors_are_collected() {
        let mut c = RunConfig::default();
        c.tree.depth = 4;
        c.tree.q = EdgeRule::PerLevel {
            rows: vec![vec!["1/2".into(), "1/3".into()]; 4],
        };
        c.horizon = Some(9);
        c.schedule.growth = "1".into();
        let Err(Error::InvalidConfig(errs)) = c.validate() else { panic!() };
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("tree:")));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.out = "elsewhere".into();
        assert_eq!(a.hash(), c.hash());
    }
}
