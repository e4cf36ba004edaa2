//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use harmonic_trees::boundary::{p_metric, refine, tuple_p_metric, tuple_p_metric_by_components};
use harmonic_trees::cli::{run, Command, RunConfig};
use harmonic_trees::harmonic::{
    aggregate_upward, check_harmonic, enumerate_dense_harmonics, extend_constant, linear_combination, rho_metric,
    truncate_and_extend, MAX_RHO_TERMS,
};
use harmonic_trees::tree::{build_tree, TreeSpec};
use harmonic_trees::universality::{
    build_ufm_witness, build_x_witness, certify_hits, dense_family, double_genericity_check, enumerate_targets,
    product_targets, refine_mismatch, span_inclusion_check, EpsilonLadder, FamilyParams, GenericityParams, XParams,
};
use harmonic_trees::value::GridParams;
use harmonic_trees::{Rational, Scalar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(o: Outcome, start: Instant, limit: Duration) -> Outcome {
    let took = start.elapsed();
    if took < limit {
        o
    } else {
        outcome(false, format!("{}; took {took:.2?}, limit {limit:?}", o.detail))
    }
}

fn eighth() -> EpsilonLadder {
    EpsilonLadder::Fixed { epsilon: "1/8".into() }
}

fn pool() -> Vec<Rational> {
    [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)]
        .iter()
        .map(|&(n, d)| r(n, d))
        .collect()
}

fn measure_consistency() -> Outcome {
    let start = Instant::now();
    let mut g = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut bad) = (0u64, 0u64);
    let mut building = Duration::ZERO;
    for _ in 0..50 {
        let depth = g.gen_range(1..=12);
        let b = Instant::now();
        let t = random_tree(&mut g, depth, 3);
        building += b.elapsed();
        let measures = t.measures_through(depth).unwrap();
        for n in 0..depth {
            let child = &measures[n + 1];
            for (x, m) in vertices(&t, n).zip(&measures[n]) {
                let sum: Rational = t
                    .children(x)
                    .unwrap()
                    .iter()
                    .map(|y| child[y.offset as usize].clone())
                    .fold(Rational::zero(), |a, b| a + b);
                checked += 1;
                bad += u64::from(sum != *m);
            }
            let total = child.iter().cloned().fold(Rational::zero(), |a, b| a + b);
            bad += u64::from(total != Rational::one());
        }
    }
    within(
        outcome(bad == 0, format!("{checked} vertices checked, {bad} mismatches, {building:.2?} building trees")),
        start,
        Duration::from_secs(5),
    )
}

fn metric_suite() -> Outcome {
    let start = Instant::now();
    let mut g = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for i in 0..200 {
        let depth = g.gen_range(2..=5);
        let t = random_tree(&mut g, depth, 3);
        let depth = t.depth();
        let dim = g.gen_range(1..=2);
        let pick = |g: &mut ChaCha8Rng| {
            let lvl = g.gen_range(0..=depth);
            random_level_function(g, &t, lvl, dim)
        };
        let (a, b, c) = (pick(&mut g), pick(&mut g), pick(&mut g));
        let p = |x: &_, y: &_| p_metric(&t, x, y).unwrap();
        let ab = p(&a, &b);
        let top = a.level().max(b.level());
        let same = refine(&t, &a, top).unwrap() == refine(&t, &b, top).unwrap();
        let fine = g.gen_range(top..=depth);
        let checks = [
            ("identity", p(&a, &a).is_zero() && (ab.is_zero() == same)),
            ("symmetry", ab == p(&b, &a)),
            ("triangle", p(&a, &c) <= ab.clone() + p(&b, &c)),
            (
                "translation",
                p(&a.add(&t, &c).unwrap(), &b.add(&t, &c).unwrap()) == ab,
            ),
            (
                "refinement",
                p(&refine(&t, &a, fine).unwrap(), &refine(&t, &b, fine).unwrap()) == ab,
            ),
        ];
        failures.extend(checks.iter().filter(|c| !c.1).map(|c| format!("{} (triple {i})", c.0)));
    }
    within(
        outcome(failures.is_empty(), format!("200 triples, failures: {failures:?}")),
        start,
        Duration::from_secs(10),
    )
}

fn tuple_decomposition() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    for _ in 0..100 {
        let depth = g.gen_range(1..=4);
        let t = random_tree(&mut g, depth, 3);
        let width = g.gen_range(1..=4);
        let dim = g.gen_range(1..=2);
        let (la, lb) = (g.gen_range(0..=t.depth()), g.gen_range(0..=t.depth()));
        let a = random_tuple(&mut g, &t, la, width, dim);
        let b = random_tuple(&mut g, &t, lb, width, dim);
        bad += usize::from(tuple_p_metric(&t, &a, &b).unwrap() != tuple_p_metric_by_components(&t, &a, &b).unwrap());
    }
    outcome(bad == 0, format!("100 tuple pairs, {bad} disagreements"))
}

fn harmonicity() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(4);
    let (mut functions, mut nodes, mut bad) = (0, 0, 0);
    let mut tally = |ok: bool, n: usize| {
        functions += 1;
        nodes += n;
        bad += usize::from(!ok);
    };
    for _ in 0..20 {
        let depth = g.gen_range(3..=6);
        let t = random_tree(&mut g, depth, 3);
        let d = t.depth();
        let f = aggregate_upward(&t, &random_level_function(&mut g, &t, d - 1, 2)).unwrap();
        let h = aggregate_upward(&t, &random_level_function(&mut g, &t, d - 2, 2)).unwrap();
        let (f, h) = (extend_constant(&t, &f, d).unwrap(), extend_constant(&t, &h, d).unwrap());
        let g1 = truncate_and_extend(&t, &f, &h, g.gen_range(0..=d)).unwrap();
        let combo = linear_combination(&t, &[random_rational(&mut g), random_rational(&mut g)], &[&f, &g1]).unwrap();
        for x in [&f, &h, &g1, &combo] {
            let rep = check_harmonic::<Rational, _>(&t, x);
            tally(rep.passes(), rep.checked_nodes);
        }
    }
    let mut witnesses = Vec::new();
    let t60 = build_tree(&TreeSpec::uniform(2, 60)).unwrap();
    let ts = enumerate_targets::<Rational>(&t60, GridParams::default(), 3, &eighth()).unwrap();
    let ps = product_targets(&ts, 1).unwrap();
    witnesses.push((t60.clone(), build_x_witness(&t60, ps.clone(), &XParams::default()).unwrap()));
    witnesses.push((t60.clone(), build_ufm_witness(&t60, ps, 10).unwrap()));
    let mut lg = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..4 {
        let t = random_layered_tree(&mut lg, 40, 3);
        let ts = enumerate_targets::<Rational>(&t, GridParams::default(), 4, &EpsilonLadder::Halving).unwrap();
        witnesses.push((t.clone(), build_x_witness(&t, product_targets(&ts, 2).unwrap(), &XParams::default()).unwrap()));
    }
    for (t, w) in &witnesses {
        let rep = check_harmonic::<Rational, _>(t, &w.function);
        tally(rep.passes(), rep.checked_nodes);
    }
    let t30 = build_tree(&TreeSpec::uniform(2, 30)).unwrap();
    let fam = dense_family::<Rational>(&t30, &FamilyParams::default()).unwrap();
    for m in &fam.members {
        let rep = check_harmonic::<Rational, _>(&t30, &m.f);
        tally(rep.passes(), rep.checked_nodes);
    }
    let t40 = build_tree(&TreeSpec::uniform(2, 40)).unwrap();
    let gen = double_genericity_check::<Rational>(&t40, &GenericityParams::default()).unwrap();
    for w in [&gen.f1, &gen.f2] {
        let rep = check_harmonic::<Rational, _>(&t40, &w.function);
        tally(rep.passes(), rep.checked_nodes);
    }
    outcome(
        bad == 0,
        format!("{functions} functions, {nodes} nodes, {bad} with nonzero residuals"),
    )
}

fn mismatch_halving() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    let binary = build_tree(&TreeSpec::uniform(2, 10)).unwrap();
    for i in 0..20 {
        let level = g.gen_range(0..=2);
        let target = random_level_function(&mut g, &binary, level, 1);
        let start = random_level_function(&mut g, &binary, 2, 1);
        let res = refine_mismatch(&binary, &start, &target, 8).unwrap();
        let m0 = res.log[0].mismatch.clone();
        for (k, s) in res.log.iter().enumerate() {
            if s.mismatch > Rational::half_pow(k) * m0.clone() {
                bad.push(format!("binary run {i} step {k}"));
            }
        }
    }
    for i in 0..20 {
        let t = random_layered_tree(&mut g, 8, 3);
        let target = random_level_function(&mut g, &t, 1, 1);
        let start = random_level_function(&mut g, &t, 2, 1);
        let res = refine_mismatch(&t, &start, &target, 6).unwrap();
        let m0 = res.log[0].mismatch.clone();
        let mut prod = Rational::one();
        for (k, s) in res.log.iter().enumerate() {
            prod = prod * s.absorbing_q_max.clone();
            if s.mismatch > prod.clone() * m0.clone() || prod > Rational::half_pow(k) {
                bad.push(format!("random run {i} step {k}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("40 refinements, violations: {bad:?}"))
}

fn x_densities() -> Outcome {
    let start = Instant::now();
    let t = build_tree(&TreeSpec::uniform(2, 60)).unwrap();
    let ts = enumerate_targets::<Rational>(&t, GridParams::default(), 3, &eighth()).unwrap();
    let w = build_x_witness(&t, product_targets(&ts, 1).unwrap(), &XParams::default()).unwrap();
    let rep = certify_hits(&t, &w.function, &w.targets, 60, 5).unwrap();
    let floor = r(3, 4);
    let uppers: Vec<_> = rep.targets.iter().map(|x| x.upper_density.clone()).collect();
    let pass = uppers.iter().all(|u| *u >= floor);
    let shown: Vec<String> = uppers.iter().map(|u| format!("{u} ({:.3})", u.to_f64())).collect();
    within(
        outcome(pass, format!("upper densities {shown:?}, need >= 3/4 each")),
        start,
        Duration::from_secs(60),
    )
}

fn ufm_densities() -> Outcome {
    let t = build_tree(&TreeSpec::uniform(2, 60)).unwrap();
    let ts = enumerate_targets::<Rational>(&t, GridParams::default(), 3, &eighth()).unwrap();
    let w = build_ufm_witness(&t, product_targets(&ts, 1).unwrap(), 10).unwrap();
    let rep = certify_hits(&t, &w.function, &w.targets, 60, 30).unwrap();
    let lowers: Vec<_> = rep.targets.iter().map(|x| x.lower_density.clone()).collect();
    let pass = lowers.iter().all(|l| *l >= r(1, 20));
    let shown: Vec<String> = lowers.iter().map(|l| format!("{l} ({:.3})", l.to_f64())).collect();
    outcome(pass, format!("lower densities after warmup 30 {shown:?}, need >= 1/20 each"))
}

fn span_inclusion() -> Outcome {
    let t = build_tree(&TreeSpec::uniform(2, 40)).unwrap();
    let ts = enumerate_targets::<Rational>(&t, GridParams::default(), 6, &eighth()).unwrap();
    let w = build_x_witness(&t, product_targets(&ts, 3).unwrap(), &XParams::default()).unwrap();
    let comps: Vec<_> = (0..3).map(|k| w.component(k)).collect();
    let mut g = ChaCha8Rng::seed_from_u64(8);
    let coeffs = pool();
    let (mut violations, mut vhat) = (0, 0);
    for _ in 0..20 {
        let s = g.gen_range(1..=3);
        let a: Vec<Rational> = (0..s).map(|_| coeffs.choose(&mut g).unwrap().clone()).collect();
        let target = w.targets.choose(&mut g).unwrap();
        let fs: Vec<_> = comps[..s].iter().collect();
        let rep = span_inclusion_check(&t, &fs, &a, &target.components[s - 1], &r(1, 4), 40).unwrap();
        violations += rep.inclusion_violations.len() + rep.triangle_violations.len();
        vhat += rep.vhat_hits.len();
    }
    outcome(
        violations == 0,
        format!("20 combinations, {vhat} V-hat hit levels, {violations} violations"),
    )
}

fn dense_family_gaps() -> Outcome {
    let t = build_tree(&TreeSpec::uniform(2, 30)).unwrap();
    let params = FamilyParams::default();
    let fam = dense_family::<Rational>(&t, &params).unwrap();
    let mut bad = Vec::new();
    let mut worst = 0f64;
    for m in &fam.members {
        let p = enumerate_dense_harmonics::<Rational>(&t, m.n, params.grid, 30).unwrap();
        let rho = rho_metric(&t, &p, &m.f, MAX_RHO_TERMS).unwrap();
        let bound = rho.upper_bound();
        let limit = r(1, m.n as i64);
        worst = worst.max((bound.clone() / limit.clone()).to_f64());
        if bound >= limit || !m.certified {
            bad.push(m.n);
        }
    }
    outcome(
        bad.is_empty() && fam.members.len() == 20,
        format!(
            "{} members, largest bound/limit {worst:.3}, failing n: {bad:?}",
            fam.members.len()
        ),
    )
}

fn disjointness_proxy() -> Outcome {
    let t = build_tree(&TreeSpec::uniform(2, 40)).unwrap();
    let rep = double_genericity_check::<Rational>(&t, &GenericityParams::default()).unwrap();
    let f1: Vec<f64> = rep.f1_combos.iter().map(|s| s.lower_density.to_f64()).collect();
    let f2: Vec<f64> = rep.f2_singles.iter().map(|s| s.lower_density.to_f64()).collect();
    let pass = rep.f1_above_floor
        && rep.f2_dips_below
        && f1.iter().all(|x| *x >= 0.05)
        && f2.iter().all(|x| *x <= 0.3)
        && rep.reference_non_dense
        && rep.intersection_empty;
    outcome(
        pass,
        format!(
            "F1 lower densities {f1:.3?}, F2 prefix minima {f2:.3?}, flags ({}, {}), intersection empty {}",
            rep.f1_above_floor, rep.f2_dips_below, rep.intersection_empty
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default();
    config.seed = 11;
    config.width = 2;
    let mut commands = vec![
        Command::Build,
        Command::WitnessX,
        Command::WitnessUfm,
        Command::SpanCheck,
        Command::DenseFamily,
        Command::DoubleGenericity,
    ];
    let w = run(&config, &Command::WitnessX).unwrap();
    w.write(dir.path()).unwrap();
    commands.push(Command::Certify {
        witness: dir.path().join("witness-x-witness.json"),
    });
    let mut differing = Vec::new();
    let mut files = 0;
    for c in &commands {
        let (a, b) = (run(&config, c).unwrap(), run(&config, c).unwrap());
        files += a.artifacts.len();
        if a.artifacts != b.artifacts {
            differing.push(c.name());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} subcommands, {files} files, differing: {differing:?}", commands.len()),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let checks: [(&str, &str, Check); 11] = [
        ("AC1", "measure consistency", measure_consistency),
        ("AC2", "metric suite", metric_suite),
        ("AC3", "tuple metric decomposition", tuple_decomposition),
        ("AC4", "harmonicity of constructors", harmonicity),
        ("AC5", "mismatch halving", mismatch_halving),
        ("AC6", "X-witness upper densities", x_densities),
        ("AC7", "U_FM-witness lower densities", ufm_densities),
        ("AC8", "span inclusion", span_inclusion),
        ("AC9", "dense family rho gaps", dense_family_gaps),
        ("AC10", "disjointness proxy", disjointness_proxy),
        ("AC11", "determinism", determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!o.pass);
        println!(
            "{id} {} {name}: {} [{:.2?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
