//! Browser bindings for the `www/` page. Each export returns a JSON string;
//! the `*_json` functions behind them are plain Rust and run natively too.

use harmonic_trees::boundary::LevelFunction;
use harmonic_trees::harmonic::{enumerate_dense_harmonics, rho_metric, MAX_RHO_TERMS};
use harmonic_trees::tree::{build_tree, Branching, EdgeRule, TreeSpec};
use harmonic_trees::universality::{
    build_ufm_witness, build_x_witness, certify_hits, dense_family, enumerate_targets, product_targets,
    refine_mismatch, EpsilonLadder, FamilyParams, HitReport, XParams,
};
use harmonic_trees::value::{GridParams, Value};
use harmonic_trees::{Rational, Scalar};
use serde_json::{json, Value as Json};
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn err(e: harmonic_trees::Error) -> String {
    e.to_string()
}

fn curves(report: &HitReport<Rational>) -> Vec<Json> {
    report
        .targets
        .iter()
        .map(|t| {
            json!({
                "target": t.target,
                "ratios": t.profile.ratios().iter().map(|r| r.to_f64()).collect::<Vec<_>>(),
                "upper": t.upper_density.to_f64(),
                "lower": t.lower_density.to_f64(),
            })
        })
        .collect()
}

/// Prefix hit ratios of an X witness and a U_FM witness toward the same
/// targets on a uniform binary tree.
pub fn density_profiles_json(depth: usize, targets: usize, growth: u32, block_length: usize) -> Out {
    let tree = build_tree(&TreeSpec::uniform(2, depth)).map_err(err)?;
    let eps = EpsilonLadder::Fixed { epsilon: "1/8".into() };
    let ts = enumerate_targets::<Rational>(&tree, GridParams::default(), targets, &eps).map_err(err)?;
    let ps = product_targets(&ts, 1).map_err(err)?;
    let x = XParams {
        growth: Rational::from_i64(growth as i64),
        first_block_end: None,
    };
    let wx = build_x_witness(&tree, ps.clone(), &x).map_err(err)?;
    let wu = build_ufm_witness(&tree, ps, block_length).map_err(err)?;
    let rx = certify_hits(&tree, &wx.function, &wx.targets, depth, 5.min(depth - 1)).map_err(err)?;
    let warm = (block_length * targets).min(depth - 1);
    let ru = certify_hits(&tree, &wu.function, &wu.targets, depth, warm).map_err(err)?;
    Ok(json!({
        "depth": depth,
        "x": { "blocks": wx.schedule.blocks, "targets": curves(&rx) },
        "ufm": { "blocks": wu.schedule.blocks, "targets": curves(&ru) },
    })
    .to_string())
}

fn skewed_tree(depth: usize, heavy: i64) -> harmonic_trees::Result<harmonic_trees::tree::Tree> {
    let row = vec![format!("{heavy}/{}", heavy + 1), format!("1/{}", heavy + 1)];
    build_tree(&TreeSpec {
        depth,
        branching: Branching::Uniform { arity: 2 },
        q: EdgeRule::PerLevel { rows: vec![row; depth] },
        w: EdgeRule::Uniform,
        seed: 0,
    })
}

/// Mismatch measure per refinement step, next to the `2^{-k}` envelope
/// and the product of absorbing probabilities. `heavy` skews `q` to
/// `(heavy, 1) / (heavy + 1)`; 1 gives the uniform tree.
pub fn mismatch_curve_json(steps: usize, heavy: u32) -> Out {
    let depth = steps + 1;
    let tree = skewed_tree(depth, heavy.max(1) as i64).map_err(err)?;
    let target = LevelFunction::new(
        &tree,
        1,
        vec![Value::scalar(Rational::from_i64(1)), Value::scalar(Rational::from_i64(-1))],
    )
    .map_err(err)?;
    let start = LevelFunction::constant(&tree, 1, Value::scalar(Rational::from_i64(0))).map_err(err)?;
    let res = refine_mismatch(&tree, &start, &target, steps).map_err(err)?;
    let mut prod = Rational::from_i64(1);
    let mut rows = Vec::new();
    for (k, s) in res.log.iter().enumerate() {
        prod = prod * s.absorbing_q_max.clone();
        rows.push(json!({
            "step": k,
            "mismatch": s.mismatch.to_f64(),
            "exact": s.mismatch.encode(),
            "halving": Rational::half_pow(k).to_f64() * res.log[0].mismatch.to_f64(),
            "absorbing": prod.to_f64() * res.log[0].mismatch.to_f64(),
        }));
    }
    Ok(json!({ "steps": rows }).to_string())
}

/// `ρ(p_n, f_n)` against `1/n` for the first `members` dense-family members.
pub fn family_gaps_json(members: usize, depth: usize) -> Out {
    let tree = build_tree(&TreeSpec::uniform(2, depth)).map_err(err)?;
    let params = FamilyParams {
        members,
        ..FamilyParams::default()
    };
    let fam = dense_family::<Rational>(&tree, &params).map_err(err)?;
    let mut rows = Vec::new();
    for m in &fam.members {
        let p = enumerate_dense_harmonics::<Rational>(&tree, m.n, params.grid, depth).map_err(err)?;
        let rho = rho_metric(&tree, &p, &m.f, MAX_RHO_TERMS).map_err(err)?;
        rows.push(json!({
            "n": m.n,
            "truncation": m.truncation,
            "rho": rho.upper_bound().to_f64(),
            "limit": 1.0 / m.n as f64,
            "certified": m.certified,
        }));
    }
    Ok(json!({ "members": rows }).to_string())
}

#[wasm_bindgen]
pub fn density_profiles(depth: usize, targets: usize, growth: u32, block_length: usize) -> Result<String, JsValue> {
    density_profiles_json(depth, targets, growth, block_length).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mismatch_curve(steps: usize, heavy: u32) -> Result<String, JsValue> {
    mismatch_curve_json(steps, heavy).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn family_gaps(members: usize, depth: usize) -> Result<String, JsValue> {
    family_gaps_json(members, depth).map_err(|e| JsValue::from_str(&e))
}
