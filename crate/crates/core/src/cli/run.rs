use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::cli::config::RunConfig;
use crate::density::profile;
use crate::error::{Error, Result};
use crate::io::{encode_log, WitnessDocument};
use crate::scalar::{encode_rational, parse_rational, ArithmeticMode, Float, Rational, Scalar};
use crate::tree::Tree;
use crate::universality::{
    build_ufm_witness, build_x_witness, certify_hits, dense_family, double_genericity_check, enumerate_targets,
    guarantee_violations, lower_density_verdicts, product_targets, span_inclusion_check, upper_density_verdicts,
    HitReport, ProductTarget, ScheduleKind, SpanSample, Verdict, Witness,
};

pub const REPORT_SCHEMA: &str = "harmonic-trees/report/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Build,
    WitnessX,
    WitnessUfm,
    SpanCheck,
    DenseFamily,
    DoubleGenericity,
    Certify { witness: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::WitnessX => "witness-x",
            Command::WitnessUfm => "witness-ufm",
            Command::SpanCheck => "span-check",
            Command::DenseFamily => "dense-family",
            Command::DoubleGenericity => "double-genericity",
            Command::Certify { .. } => "certify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Everything a run produces, before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
    /// Broken exact guarantees; the run still emits its reports.
    pub invariant_failures: Vec<String>,
}

impl RunOutput {
    pub fn report(&self) -> &str {
        &self.artifacts[0].contents
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.artifacts
            .iter()
            .map(|a| {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents)?;
                Ok(path)
            })
            .collect()
    }
}

struct Builder {
    command: &'static str,
    config: RunConfig,
    artifacts: Vec<Artifact>,
    summary: Vec<String>,
    failures: Vec<String>,
}

impl Builder {
    fn new(command: &Command, config: &RunConfig) -> Self {
        Builder {
            command: command.name(),
            config: config.clone(),
            artifacts: Vec::new(),
            summary: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn file(&mut self, suffix: &str, contents: String) -> String {
        let name = format!("{}-{suffix}", self.command);
        self.artifacts.push(Artifact {
            name: name.clone(),
            contents,
        });
        name
    }

    fn finish(self, mode: ArithmeticMode, result: Json) -> RunOutput {
        let report = json!({
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "config_hash": self.config.hash(),
            "config": self.config.report_value(),
            "mode": mode,
            "empirical": true,
            "scope": "finite-horizon statistics over finitely many targets; no class-membership claim",
            "invariant_failures": self.failures,
            "result": result,
        });
        let mut artifacts = vec![Artifact {
            name: format!("{}.json", self.command),
            contents: pretty(&report),
        }];
        artifacts.extend(self.artifacts);
        RunOutput {
            artifacts,
            summary: self.summary,
            invariant_failures: self.failures,
        }
    }
}

fn pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn enc<S: Scalar>(xs: &[S]) -> Vec<String> {
    xs.iter().map(Scalar::encode).collect()
}

/// Validates the config and runs one subcommand.
pub fn run(config: &RunConfig, command: &Command) -> Result<RunOutput> {
    let tree = config.validate()?;
    if let Command::Certify { witness } = command {
        let text = std::fs::read_to_string(witness)?;
        let doc: WitnessDocument = serde_json::from_str(&text)?;
        return match doc.mode {
            ArithmeticMode::Exact => certify::<Rational>(config, command, &doc),
            ArithmeticMode::Float => certify::<Float>(config, command, &doc),
        };
    }
    match config.mode {
        ArithmeticMode::Exact => dispatch::<Rational>(config, command, &tree),
        ArithmeticMode::Float => dispatch::<Float>(config, command, &tree),
    }
}

fn dispatch<S: Scalar>(config: &RunConfig, command: &Command, tree: &Tree) -> Result<RunOutput> {
    match command {
        Command::Build => Ok(build(config, command, tree)),
        Command::WitnessX | Command::WitnessUfm => witness::<S>(config, command, tree),
        Command::SpanCheck => span_check::<S>(config, command, tree),
        Command::DenseFamily => family::<S>(config, command, tree),
        Command::DoubleGenericity => genericity::<S>(config, command, tree),
        Command::Certify { .. } => unreachable!("handled before dispatch"),
    }
}

fn build(config: &RunConfig, command: &Command, tree: &Tree) -> RunOutput {
    let mut b = Builder::new(command, config);
    let levels: Vec<Json> = (0..=tree.depth())
        .map(|n| {
            json!({
                "level": n,
                "size": tree.level_size(n),
                "classes": if n < tree.depth() { tree.class_count(n) } else { 0 },
            })
        })
        .collect();
    b.summary.push(format!(
        "tree of depth {} with {} vertices",
        tree.depth(),
        tree.vertices_through(tree.depth())
    ));
    let doc = serde_json::to_value(tree.to_document()).expect("tree serializes");
    b.finish(
        config.mode,
        json!({
            "depth": tree.depth(),
            "layered": tree.is_layered(),
            "vertices": tree.vertices_through(tree.depth()),
            "levels": levels,
            "tree": doc,
        }),
    )
}

fn configured_targets<S: Scalar>(config: &RunConfig, tree: &Tree, width: usize) -> Result<Vec<ProductTarget<S>>> {
    let ts = enumerate_targets::<S>(tree, config.grid(), config.targets.count * width, &config.targets.epsilon)?;
    product_targets(&ts, width)
}

fn target_json<S: Scalar>(t: &ProductTarget<S>) -> Json {
    json!({
        "index": t.index,
        "epsilon": encode_rational(&t.epsilon),
        "level": t.level(),
        "components": t.components.iter().map(|c| json!({
            "level": c.level(),
            "values": c.values().iter().map(|v| enc(v.coords())).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn default_warmup(config: &RunConfig, kind: ScheduleKind, targets: usize, horizon: usize) -> usize {
    let w = config.warmup.unwrap_or(match kind {
        ScheduleKind::X => 5,
        ScheduleKind::Ufm => config.schedule.block_length * targets,
    });
    w.min(horizon - 1)
}

/// Hit sets, CSV profiles and verdicts for one witness.
fn hits_section<S: Scalar>(b: &mut Builder, tree: &Tree, w: &Witness<S>, horizon: usize) -> Result<Json> {
    let warmup = default_warmup(&b.config, w.schedule.kind, w.targets.len(), horizon);
    let report: HitReport<S> = certify_hits(tree, &w.function, &w.targets, horizon, warmup)?;
    let missed = guarantee_violations(w, &report);
    if !missed.is_empty() {
        b.failures.push(format!("logged hits missing at levels {missed:?}"));
    }
    let verdicts: Vec<Verdict> = match w.schedule.kind {
        ScheduleKind::X => upper_density_verdicts(&report, &parse_rational(&b.config.thresholds.x_upper)?),
        ScheduleKind::Ufm => lower_density_verdicts(&report, &parse_rational(&b.config.thresholds.ufm_lower)?),
    };
    for v in &verdicts {
        b.summary.push(format!(
            "target {}: {} {} (threshold {}) {}",
            v.target,
            v.statistic,
            v.value,
            v.threshold,
            if v.pass { "pass" } else { "FAIL" }
        ));
    }
    let mut targets = Vec::new();
    for t in &report.targets {
        let csv = b.file(&format!("target-{}.csv", t.target), t.profile.to_csv());
        targets.push(json!({
            "target": t.target,
            "epsilon": encode_rational(&t.epsilon),
            "hits": t.hits,
            "component_hits": t.component_hits,
            "distances": t.distances.iter().map(|d| enc(d)).collect::<Vec<_>>(),
            "profile": csv,
            "upper_density": encode_rational(&t.upper_density),
            "lower_density": encode_rational(&t.lower_density),
        }));
    }
    Ok(json!({
        "horizon": horizon,
        "warmup": warmup,
        "targets": targets,
        "guarantee_violations": missed,
        "verdicts": verdicts,
    }))
}

fn witness_json<S: Scalar>(w: &Witness<S>) -> Json {
    json!({
        "width": w.width(),
        "schedule": w.schedule,
        "targets": w.targets.iter().map(target_json).collect::<Vec<_>>(),
        "nodes": w.function.node_count(),
        "log": encode_log(&w.log),
    })
}

fn checked<S: Scalar>(b: &mut Builder, tree: &Tree, w: &Witness<S>) {
    if let Err(e) = w.verify(tree) {
        b.failures.push(e.to_string());
    }
}

fn witness<S: Scalar>(config: &RunConfig, command: &Command, tree: &Tree) -> Result<RunOutput> {
    let targets = configured_targets::<S>(config, tree, config.width)?;
    let w = match command {
        Command::WitnessX => build_x_witness(tree, targets, &config.x_params()?)?,
        _ => build_ufm_witness(tree, targets, config.schedule.block_length)?,
    };
    let mut b = Builder::new(command, config);
    checked(&mut b, tree, &w);
    let hits = hits_section(&mut b, tree, &w, config.horizon())?;
    let doc = WitnessDocument::encode(tree, &w);
    let file = b.file("witness.json", pretty(&serde_json::to_value(&doc)?));
    Ok(b.finish(
        S::MODE,
        json!({ "witness": witness_json(&w), "witness_file": file, "certification": hits }),
    ))
}

fn certify<S: Scalar>(config: &RunConfig, command: &Command, doc: &WitnessDocument) -> Result<RunOutput> {
    let (tree, w) = doc.decode::<S>()?;
    let horizon = config.horizon.unwrap_or(tree.depth());
    let mut b = Builder::new(command, config);
    let hits = hits_section(&mut b, &tree, &w, horizon)?;
    Ok(b.finish(S::MODE, json!({ "witness": witness_json(&w), "certification": hits })))
}

fn coefficient_pool<S: Scalar>() -> Vec<S> {
    [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)]
        .iter()
        .map(|&(n, d)| S::from_ratio(n, d))
        .collect()
}

fn span_check<S: Scalar>(config: &RunConfig, command: &Command, tree: &Tree) -> Result<RunOutput> {
    let targets = configured_targets::<S>(config, tree, config.width)?;
    let w = build_x_witness(tree, targets, &config.x_params()?)?;
    let mut b = Builder::new(command, config);
    checked(&mut b, tree, &w);
    let horizon = config.horizon();
    let eps = parse_rational(&config.span.epsilon)?;
    let components: Vec<_> = (0..w.width()).map(|k| w.component(k)).collect();
    let pool = coefficient_pool::<S>();
    let mut with_zero = pool.clone();
    with_zero.push(S::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let max_terms = config.span.max_terms.min(w.width());
    let mut rows = Vec::new();
    let mut violations = 0;
    for i in 0..config.span.combinations {
        let s = rng.gen_range(1..=max_terms);
        let mut coeffs: Vec<S> = (0..s - 1)
            .map(|_| with_zero.choose(&mut rng).expect("non-empty").clone())
            .collect();
        coeffs.push(pool.choose(&mut rng).expect("non-empty").clone());
        let target = &w.targets[rng.gen_range(0..w.targets.len())];
        let psi = &target.components[s - 1];
        let fs: Vec<_> = components[..s].iter().collect();
        let rep = span_inclusion_check(tree, &fs, &coeffs, psi, &eps, horizon)?;
        violations += rep.inclusion_violations.len() + rep.triangle_violations.len();
        if !rep.passes() {
            b.failures.push(format!("combination {i}: inclusion fails at {:?}", rep.inclusion_violations));
        }
        rows.push(json!({
            "coefficients": enc(&coeffs),
            "psi": { "target": target.index, "component": s - 1 },
            "delta": rep.delta.encode(),
            "vhat_hits": rep.vhat_hits,
            "combination_hits": rep.combo_hits,
            "inclusion_violations": rep.inclusion_violations,
            "triangle_violations": rep.triangle_violations,
        }));
    }
    b.summary.push(format!(
        "{} combinations, {violations} inclusion or triangle violations",
        rows.len()
    ));
    Ok(b.finish(
        S::MODE,
        json!({
            "witness": witness_json(&w),
            "epsilon": encode_rational(&eps),
            "horizon": horizon,
            "combinations": rows,
            "violations": violations,
        }),
    ))
}

fn family<S: Scalar>(config: &RunConfig, command: &Command, tree: &Tree) -> Result<RunOutput> {
    let fam = dense_family::<S>(tree, &config.family_params()?)?;
    let mut b = Builder::new(command, config);
    checked(&mut b, tree, &fam.witness);
    let mut csv = String::from("n,j0,truncation,rho_sum,rho_tail,rho_bound,limit,certified\n");
    let mut members = Vec::new();
    for m in &fam.members {
        let bound = m.rho.upper_bound();
        if !m.certified {
            b.failures.push(format!("member {}: rho bound {} not below 1/{}", m.n, bound.encode(), m.n));
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},1/{},{}\n",
            m.n,
            m.j0,
            m.truncation,
            m.rho.sum.encode(),
            m.rho.tail.encode(),
            bound.encode(),
            m.n,
            m.certified
        ));
        members.push(json!({
            "n": m.n,
            "j0": m.j0,
            "truncation": m.truncation,
            "rho_sum": m.rho.sum.encode(),
            "rho_tail": m.rho.tail.encode(),
            "rho_terms": m.rho.terms,
            "rho_bound": bound.encode(),
            "limit": format!("1/{}", m.n),
            "certified": m.certified,
        }));
    }
    let certified = fam.members.iter().filter(|m| m.certified).count();
    b.summary.push(format!("{certified} of {} members certified", fam.members.len()));
    let file = b.file("members.csv", csv);
    Ok(b.finish(
        S::MODE,
        json!({ "witness": witness_json(&fam.witness), "members": members, "members_file": file }),
    ))
}

fn sample_json<S: Scalar>(b: &mut Builder, label: &str, k: usize, s: &SpanSample<S>, horizon: usize, warmup: usize) -> Result<Json> {
    let p = profile(&s.hits, horizon, warmup)?;
    let file = b.file(&format!("{label}-{k}.csv"), p.to_csv());
    Ok(json!({
        "coefficients": enc(&s.coeffs),
        "hits": s.hits,
        "lower_density": encode_rational(&s.lower_density),
        "upper_density": encode_rational(&s.upper_density),
        "profile": file,
    }))
}

fn genericity<S: Scalar>(config: &RunConfig, command: &Command, tree: &Tree) -> Result<RunOutput> {
    let params = config.genericity_params()?;
    let rep = double_genericity_check::<S>(tree, &params)?;
    let mut b = Builder::new(command, config);
    checked(&mut b, tree, &rep.f1);
    checked(&mut b, tree, &rep.f2);
    let h = rep.horizon;
    let ufm_warmup = params.ufm_warmup.unwrap_or(params.block_length * 2).min(h - 1);
    let x_warmup = params.x_warmup.min(h - 1);
    let mut f1 = Vec::new();
    for (k, s) in rep.f1_combos.iter().enumerate() {
        f1.push(sample_json(&mut b, "f1", k + 1, s, h, ufm_warmup)?);
    }
    let mut singles = Vec::new();
    for (k, s) in rep.f2_singles.iter().enumerate() {
        singles.push(sample_json(&mut b, "f2-single", k + 1, s, h, x_warmup)?);
    }
    let mut f2 = Vec::new();
    for (k, s) in rep.f2_combos.iter().enumerate() {
        f2.push(sample_json(&mut b, "f2", k + 1, s, h, x_warmup)?);
    }
    if !rep.intersection_empty {
        b.failures.push("an F1 sample coincides with an F2 sample".into());
    }
    b.summary.push(format!(
        "F1 above floor: {}, F2 dips below: {}, intersection empty: {} ({} pairs)",
        rep.f1_above_floor, rep.f2_dips_below, rep.intersection_empty, rep.pairs_compared
    ));
    Ok(b.finish(
        S::MODE,
        json!({
            "horizon": h,
            "reference": { "center": "0", "epsilon": encode_rational(&rep.reference_epsilon), "non_dense": rep.reference_non_dense },
            "floor": encode_rational(&params.floor),
            "dip": encode_rational(&params.dip),
            "f1": witness_json(&rep.f1),
            "f2": witness_json(&rep.f2),
            "f1_combinations": f1,
            "f2_singles": singles,
            "f2_combinations": f2,
            "f1_above_floor": rep.f1_above_floor,
            "f2_dips_below": rep.f2_dips_below,
            "intersection_empty": rep.intersection_empty,
            "pairs_compared": rep.pairs_compared,
        }),
    ))
}

/// 0 success, 1 validation, 2 infeasible schedule or depth, 3 invariant.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleSchedule(_) | Error::InsufficientDepth(_) => 2,
        Error::Invariant(_) => 3,
        _ => 1,
    }
}

/// Machine-readable form of an error.
pub fn error_json(e: &Error) -> Json {
    let kind = match e {
        Error::InvalidConfig(_) => "invalid_config",
        Error::InfeasibleSchedule(_) => "infeasible_schedule",
        Error::InsufficientDepth(_) => "insufficient_depth",
        Error::Invariant(_) => "invariant",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        _ => "invalid_argument",
    };
    let messages = match e {
        Error::InvalidConfig(list) => list.clone(),
        other => vec![other.to_string()],
    };
    json!({ "error": kind, "exit_code": exit_code(e), "messages": messages })
}
