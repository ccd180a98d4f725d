//! Implementations of the subcommands.

mod report;

pub use report::report;

use crate::output::{svg_histogram, svg_polyline, Emitter};
use crate::Common;
use iet_core::affine::BuildOptions;
use iet_core::analysis::{self, BcParams, HsParams};
use iet_core::birkhoff::{self, Observable};
use iet_core::cocycle::accumulate_chain;
use iet_core::specfile::{LoadedMap, MapSpec};
use iet_core::spectrum::{self, Subspace};
use iet_core::{Error, InductionChain, IntervalMap, RealHp, Scalar};
use num_rational::BigRational;
use serde_json::json;
use std::fmt;
use std::path::Path;

pub enum CliError {
    Config(String),
    Io(std::io::Error),
    Domain(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Io(e) => write!(f, "io: {e}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BadSpec(_) | Error::BadScalar(_) => CliError::Config(e.to_string()),
            other => CliError::Domain(other),
        }
    }
}

pub type CliResult = Result<(), CliError>;

fn emitter(common: &Common, hash: String) -> Result<Emitter, CliError> {
    Ok(Emitter::new(&common.out, hash, &common.format)?)
}

fn load_spec(common: &Common) -> Result<LoadedMap, CliError> {
    let path = common
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Config("--spec is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(MapSpec::parse(&text)?.load(common.precision)?)
}

/// Scalars accepted on the command line: `p/q`, integers, or decimals.
fn parse_scalar(s: &str, prec: u32) -> Result<Scalar, CliError> {
    let t = s.trim();
    if let Ok(r) = iet_core::parse_rational(t) {
        return Ok(Scalar::Rat(r));
    }
    RealHp::parse(t, prec)
        .map(Scalar::Real)
        .ok_or_else(|| CliError::Config(format!("cannot parse scalar {t:?}")))
}

fn parse_vector(s: &str, d: usize, prec: u32) -> Result<Vec<Scalar>, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != d {
        return Err(CliError::Config(format!(
            "expected {d} comma-separated entries, got {}",
            parts.len()
        )));
    }
    parts.iter().map(|p| parse_scalar(p, prec)).collect()
}

fn scalar_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::display_string).collect()
}

// ---------------------------------------------------------------------------

pub fn induct(common: &Common, hash: String, matrix: bool) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    match loaded {
        LoadedMap::Standard(t) => run_induct(&mut em, common, t, matrix),
        LoadedMap::Affine(t) => run_induct(&mut em, common, t, matrix),
    }
}

fn run_induct<M: IntervalMap>(
    em: &mut Emitter,
    common: &Common,
    map: M,
    matrix: bool,
) -> CliResult {
    let mut chain = InductionChain::new(map);
    let res = chain.ensure_depth(common.steps);
    let path = chain.path();
    let blocks = path.zorich_block_lengths();
    let mut block_ends = Vec::new();
    let mut acc = 0usize;
    for b in &blocks {
        acc += b;
        block_ends.push(acc);
    }
    let mut records = Vec::new();
    for i in 0..chain.depth() {
        let mv = chain.move_at(i);
        let state = chain.state(i + 1);
        let z = block_ends
            .iter()
            .position(|e| *e == i + 1)
            .map(|bi| blocks[bi]);
        let alphabet = state.perm().alphabet();
        records.push(json!({
            "step": i + 1,
            "type": mv.rv_type.index(),
            "winner": alphabet.label(mv.winner),
            "loser": alphabet.label(mv.loser),
            "z": z,
            "lambda": scalar_strings(state.lengths()),
            "domainLength": state.total_len().display_string(),
        }));
    }
    if let Err(e) = &res {
        records.push(json!({ "error": e.to_string() }));
    }
    em.jsonl("induct.jsonl", records)?;
    if matrix && chain.depth() > 0 {
        let z = accumulate_chain(&chain, 0, chain.depth());
        let alphabet = chain.initial().perm().alphabet();
        let labels: Vec<String> = alphabet.symbols().map(|s| alphabet.label(s).into()).collect();
        let rows = (0..z.dim()).map(|i| {
            let mut cells = vec![labels[i].clone()];
            cells.extend((0..z.dim()).map(|j| z.get(i, j).to_string()));
            cells.join(",")
        });
        em.csv("matrix.csv", &format!(",{}", labels.join(",")), rows)?;
    }
    println!(
        "induct: {} steps, {} Zorich blocks -> {}",
        chain.depth(),
        blocks.len(),
        common.out.display()
    );
    res?;
    Ok(())
}

pub fn rauzy_class(common: &Common, hash: String) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let class = iet_core::rauzy_class(loaded.perm());
    let perms: Vec<_> = class
        .perms
        .iter()
        .map(|p| {
            let (top, bottom) = p.row_labels();
            json!({ "top": top, "bottom": bottom })
        })
        .collect();
    let edges: Vec<_> = class
        .edges
        .iter()
        .map(|(a, t, b)| json!([a, t.index(), b]))
        .collect();
    em.json(
        "rauzy_class.json",
        json!({ "size": class.perms.len(), "perms": perms, "edges": edges }),
    )?;
    println!("rauzy-class: {} permutations", class.perms.len());
    Ok(())
}

pub fn lyapunov(common: &Common, hash: String) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let est = match &loaded {
        LoadedMap::Standard(t) => spectrum::lyapunov_spectrum(t, common.steps, guard(common))?,
        LoadedMap::Affine(t) => spectrum::lyapunov_spectrum(t, common.steps, guard(common))?,
    };
    let d = est.exponents.len();
    let header = format!(
        "step,{}",
        (1..=d).map(|i| format!("theta{i}")).collect::<Vec<_>>().join(",")
    );
    let rows = est.history.iter().map(|(step, ths)| {
        let mut cells = vec![step.to_string()];
        cells.extend(ths.iter().map(|t| format!("{t}")));
        cells.join(",")
    });
    em.csv("lyapunov.csv", &header, rows)?;
    let pairing: Vec<f64> = (0..d / 2)
        .map(|i| est.exponents[i] + est.exponents[d - 1 - i])
        .collect();
    em.json(
        "lyapunov.json",
        json!({
            "exponents": est.exponents,
            "steps": est.steps,
            "zeroThreshold": est.zero_threshold,
            "nearZeroCount": est.near_zero_count(),
            "convergenceGap": est.convergence_gap,
            "pairingDefect": pairing,
        }),
    )?;
    println!("lyapunov: theta = {:?}", est.exponents);
    Ok(())
}

fn guard(common: &Common) -> u32 {
    iet_core::DEFAULT_GUARD_BITS.min(common.precision.saturating_sub(16))
}

fn subspace_json(s: &Subspace) -> serde_json::Value {
    json!({
        "dim": s.dim,
        "window": s.window,
        "splitGap": s.split_gap,
        "fluctuation": s.fluctuation,
        "crossCheckAngle": s.cross_check_angle,
        "orthonormalityDefect": s.orthonormality_defect(),
        "basis": s.basis.iter().map(|col| col.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn filtration(common: &Common, hash: String) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let t = loaded.as_iet()?.clone();
    let mut chain = InductionChain::with_guard(t, guard(common));
    chain.ensure_depth(common.depth)?;
    let (kernel, g) = spectrum::kernel_and_genus(chain.initial().perm());
    let e_s = spectrum::stable_space(&chain, common.depth)?;
    let e_cs = spectrum::central_stable_space(&chain, common.depth)?;
    let nesting = spectrum::containment_angle(&e_s, &e_cs);
    em.json(
        "filtration.json",
        json!({
            "genus": g,
            "kernelDim": kernel.len(),
            "stable": subspace_json(&e_s),
            "centralStable": subspace_json(&e_cs),
            "nestingAngle": nesting,
        }),
    )?;
    println!(
        "filtration: g={g}, dim E_s={}, dim E_cs={}, nesting angle {nesting:.2e}",
        e_s.dim, e_cs.dim
    );
    Ok(())
}

pub fn build_aiet(common: &Common, hash: String, omega: &str, prefix: usize) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let t0 = loaded.as_iet()?.clone();
    let omega = parse_vector(omega, t0.perm().len(), common.precision)?;
    let opts = BuildOptions {
        depth: common.depth,
        requested_prefix: prefix,
        precision: common.precision,
        ..Default::default()
    };
    let out = iet_core::affine::build_aiet(&t0, &omega, &opts)?;
    let spec = MapSpec::from_aiet(&out.aiet);
    em.json("aiet.json", serde_json::to_value(&spec).unwrap())?;
    em.json(
        "build_report.json",
        json!({
            "matchedPrefix": out.matched_prefix,
            "depthUsed": out.depth_used,
            "etaGap": out.eta_gap.to_f64(),
            "closingDefect": out.closing_defect.to_f64(),
            "gapLadder": out.gaps,
            "compatibilityDefect": iet_core::affine::check_compatibility(&t0, &omega).to_f64(),
        }),
    )?;
    println!(
        "build-aiet: matched {} moves, eta gap {:.3e}",
        out.matched_prefix,
        out.eta_gap.to_f64()
    );
    Ok(())
}

pub fn birkhoff(common: &Common, hash: String, omega: &str, x: &str, n: usize) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    match loaded {
        LoadedMap::Standard(t) => run_birkhoff(&mut em, common, t, omega, x, n),
        LoadedMap::Affine(t) => run_birkhoff(&mut em, common, t, omega, x, n),
    }
}

fn run_birkhoff<M: IntervalMap>(
    em: &mut Emitter,
    common: &Common,
    map: M,
    omega: &str,
    x: &str,
    n: usize,
) -> CliResult {
    let d = map.perm().len();
    let obs = Observable::new(parse_vector(omega, d, common.precision)?);
    let x = parse_scalar(x, common.precision)?;
    let mut rows = Vec::new();
    let mut partial = 0.0f64;
    for k in (1..=n as i64).rev() {
        let s = birkhoff::birkhoff_sum_naive(&map, &obs, &x, -k)?;
        rows.push((-k, s));
    }
    rows.push((0, Scalar::zero()));
    for k in 1..=n as i64 {
        let s = birkhoff::birkhoff_sum_naive(&map, &obs, &x, k)?;
        rows.push((k, s));
    }
    let csv_rows: Vec<String> = rows
        .iter()
        .map(|(k, s)| {
            let sf = s.to_f64();
            let e = sf.exp();
            partial += e;
            format!("{k},{sf},{e},{partial}")
        })
        .collect();
    em.csv("birkhoff.csv", "n,S_n,exp(S_n),partial_sum", csv_rows)?;
    // Tower/naive agreement over the trace range.
    let mut chain = InductionChain::with_guard(map.clone(), guard(common));
    extend_until_heights_cover(&mut chain, n as u64)?;
    let mut max_dev = 0.0f64;
    for (k, s) in &rows {
        let tower =
            birkhoff::birkhoff_sum_tower(&chain, &obs, &x, &num_bigint::BigInt::from(*k))?;
        let dev = tower.sub(s).to_f64().abs();
        max_dev = max_dev.max(dev);
    }
    em.json(
        "birkhoff.json",
        json!({
            "points": rows.len(),
            "towerNaiveMaxDeviation": max_dev,
        }),
    )?;
    println!("birkhoff: {} points, tower/naive deviation {max_dev:.3e}", rows.len());
    Ok(())
}

/// Extends a chain until the smallest tower height exceeds `n` (or a
/// connection truncates it).
fn extend_until_heights_cover<M: IntervalMap>(
    chain: &mut InductionChain<M>,
    n: u64,
) -> Result<(), CliError> {
    use num_traits::ToPrimitive;
    loop {
        let min_q = chain
            .heights(chain.depth())
            .iter()
            .min()
            .unwrap()
            .to_u64();
        match min_q {
            Some(q) if q <= n => {}
            _ => return Ok(()),
        }
        let cur = chain.depth();
        match chain.ensure_depth(cur + 8) {
            Ok(()) => {}
            Err(Error::Connection { .. }) => return Ok(()),
            Err(e) => return Err(e.into()),
        }
    }
}

pub fn bounded_times(
    common: &Common,
    hash: String,
    omega: &str,
    x: &str,
    k_max: usize,
) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    match loaded {
        LoadedMap::Standard(t) => run_bounded_times(&mut em, common, t, omega, x, k_max),
        LoadedMap::Affine(t) => run_bounded_times(&mut em, common, t, omega, x, k_max),
    }
}

fn run_bounded_times<M: IntervalMap>(
    em: &mut Emitter,
    common: &Common,
    map: M,
    omega: &str,
    x: &str,
    k_max: usize,
) -> CliResult {
    let d = map.perm().len();
    let obs = Observable::new(parse_vector(omega, d, common.precision)?);
    let x = parse_scalar(x, common.precision)?;
    let mut chain = InductionChain::with_guard(map, guard(common));
    chain.ensure_zorich_depth(common.steps)?;
    let window = estimation_window(&chain);
    let ecs = spectrum::central_stable_space(&chain, window)?;
    let ws = analysis::check_bc(&mut chain, &ecs, common.steps, &BcParams::default())?;
    let witness = ws
        .first()
        .ok_or_else(|| CliError::Domain(Error::NotBcTime(0)))?;
    let mut out = Vec::new();
    for k in 0..witness.times.len().min(k_max) {
        let data = witness.time_data(k);
        let w = birkhoff::bounded_times(&chain, &obs, &x, k, &data)?;
        out.push(witness_json(&w));
    }
    em.json(
        "bounded_times.json",
        json!({ "witnesses": out, "kBound": witness.k_bound, "vBound": witness.v_bound }),
    )?;
    println!("bounded-times: {} certificates", witness.times.len().min(k_max));
    Ok(())
}

fn estimation_window<M: IntervalMap>(chain: &InductionChain<M>) -> usize {
    let bounds = chain.path().zorich_boundaries();
    let idx = bounds.len().saturating_sub(2).max(1).min(bounds.len() - 1);
    bounds[(idx * 3) / 4].max(1)
}

pub fn witness_json(w: &iet_core::birkhoff::BoundedTimesWitness) -> serde_json::Value {
    json!({
        "k": w.level_index,
        "x": w.x.display_string(),
        "mForward": w.m_forward.to_string(),
        "mBackward": w.m_backward.to_string(),
        "alpha": w.alpha.0,
        "floor": w.floor.to_string(),
        "beta": w.beta.0,
        "betaMinus": w.beta_minus.0,
        "betaPlus": w.beta_plus.0,
        "jForward": w.j_forward.to_string(),
        "jBackward": w.j_backward.to_string(),
        "sumForward": w.sum_forward.to_f64(),
        "sumBackward": w.sum_backward.to_f64(),
        "bound": w.bound,
        "specialTermsForward": w.special_terms_forward,
        "specialTermsBackward": w.special_terms_backward,
        "membershipVerified": w.membership_verified,
        "boundHolds": w.bound_holds(),
    })
}

pub fn wandering(common: &Common, hash: String, x: &str, n: usize) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let t = loaded.as_aiet()?.clone();
    let obs = Observable::new(
        t.log_slopes()
            .iter()
            .map(|w| Scalar::Real(w.clone()))
            .collect(),
    );
    let x = parse_scalar(x, common.precision)?;
    let series = birkhoff::wandering_series(&t, &obs, &x, n, common.precision)?;
    let fwd = series
        .forward
        .iter()
        .map(|(k, t, p)| format!("{k},{t},{p}"));
    let bwd = series
        .backward
        .iter()
        .map(|(k, t, p)| format!("{k},{t},{p}"));
    em.csv("wandering_forward.csv", "n,summand,partial_sum", fwd)?;
    em.csv("wandering_backward.csv", "n,summand,partial_sum", bwd)?;
    em.json(
        "wandering.json",
        json!({
            "terms": n,
            "forwardPartial": series.forward.last().map(|r| r.2),
            "backwardPartial": series.backward.last().map(|r| r.2),
            "wanderingCandidate": series.wandering_candidate,
        }),
    )?;
    println!(
        "wandering: candidate = {}",
        series.wandering_candidate
    );
    Ok(())
}

pub fn check_bc(
    common: &Common,
    hash: String,
    window: Option<usize>,
    entry_cap: u64,
    norm_cap: f64,
) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    match loaded {
        LoadedMap::Standard(t) => run_check_bc(&mut em, common, t, window, entry_cap, norm_cap),
        LoadedMap::Affine(t) => run_check_bc(&mut em, common, t, window, entry_cap, norm_cap),
    }
}

fn run_check_bc<M: IntervalMap>(
    em: &mut Emitter,
    common: &Common,
    map: M,
    window: Option<usize>,
    entry_cap: u64,
    norm_cap: f64,
) -> CliResult {
    let mut chain = InductionChain::with_guard(map, guard(common));
    chain.ensure_zorich_depth(common.steps)?;
    let win = estimation_window(&chain);
    let ecs = spectrum::central_stable_space(&chain, win)?;
    let params = BcParams {
        window_blocks: window,
        entry_cap,
        norm_cap,
        min_times: 3,
    };
    let ws = analysis::check_bc(&mut chain, &ecs, common.steps, &params)?;
    let mut verified = true;
    for w in &ws {
        analysis::verify_bc_witness(&chain, &ecs, w)
            .map_err(CliError::Domain)
            .map(|_| ())?;
    }
    if ws.is_empty() {
        verified = false;
    }
    em.json("bc.json", bc_json(&ws, verified))?;
    match ws.first() {
        Some(w) => println!(
            "check-bc: {} times, window {} blocks, K={}, V={:.3}",
            w.times.len(),
            w.window_blocks,
            w.k_bound,
            w.v_bound
        ),
        None => println!("check-bc: none found within {} Zorich steps", common.steps),
    }
    Ok(())
}

pub fn bc_json(ws: &[analysis::BcWitness], verified: bool) -> serde_json::Value {
    json!({
        "found": !ws.is_empty(),
        "verified": verified,
        "witnesses": ws.iter().map(|w| json!({
            "windowBlocks": w.window_blocks,
            "kBound": w.k_bound,
            "vBound": w.v_bound,
            "ecsDim": w.ecs_dim,
            "times": w.times.iter().map(|t| json!({
                "zorich": t.zorich_index,
                "rv": t.rv_index,
                "rvWindowEnd": t.rv_window_end,
                "blockMaxEntry": t.block_max_entry,
                "restrictedNorm": t.restricted_norm,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn check_hs(common: &Common, hash: String, balance: i64) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let t = loaded.as_iet()?.clone();
    let mut chain = InductionChain::with_guard(t, guard(common));
    let params = HsParams {
        balance_bound: BigRational::from(num_bigint::BigInt::from(balance)),
        ..Default::default()
    };
    let ws = analysis::check_hs(&mut chain, common.steps, &params)?;
    for w in &ws {
        analysis::verify_hs_witness(&chain, &params, w).map_err(CliError::Domain)?;
    }
    em.json("hs.json", hs_json(&ws))?;
    println!(
        "check-hs: {} witnesses within {} Zorich steps",
        ws.len(),
        common.steps
    );
    Ok(())
}

pub fn hs_json(ws: &[analysis::HsWitness]) -> serde_json::Value {
    json!({
        "found": !ws.is_empty(),
        "witnesses": ws.iter().map(|w| json!({
            "zorich": w.zorich_index,
            "rv": w.rv_index,
            "balance": w.balance,
            "horizon": w.horizon.to_string(),
            "horizonKind": w.horizon_kind,
        })).collect::<Vec<_>>(),
    })
}

pub fn conjugacy(common: &Common, hash: String, target: &Path, level: usize) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let t = loaded.as_aiet()?.clone();
    let text = std::fs::read_to_string(target)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", target.display())))?;
    let t0 = MapSpec::parse(&text)?.load(common.precision)?.as_iet()?.clone();
    let chain_t = InductionChain::with_guard(t, guard(common)).extended_to(level)?;
    let chain_t0 = InductionChain::new(t0).extended_to(level)?;
    let sample = analysis::semi_conjugacy(&chain_t, &chain_t0, level, 2_000_000)?;
    write_conjugacy(&mut em, &sample, "conjugacy")?;
    println!(
        "conjugacy: {} cells, mesh {:.3e}, defect {:.3e}",
        sample.breakpoints.len(),
        sample.mesh,
        sample.defect
    );
    Ok(())
}

pub fn write_conjugacy(
    em: &mut Emitter,
    sample: &analysis::ConjugacySample,
    stem: &str,
) -> CliResult {
    let rows = sample.breakpoints.iter().map(|bp| {
        format!("{},{},{}", bp.x.to_f64(), bp.h.to_f64(), bp.slope)
    });
    em.csv(&format!("{stem}.csv"), "x,h,slope", rows)?;
    let pts: Vec<(f64, f64)> = sample
        .breakpoints
        .iter()
        .map(|bp| (bp.x.to_f64(), bp.h.to_f64()))
        .collect();
    em.svg(
        &format!("{stem}.svg"),
        &svg_polyline(&pts, &format!("conjugacy sample, level {}", sample.level)),
    )?;
    let slopes: Vec<f64> = sample.breakpoints.iter().map(|bp| bp.slope).collect();
    em.svg(
        &format!("{stem}_slopes.svg"),
        &svg_histogram(&slopes, 40, "local slopes"),
    )?;
    em.json(
        &format!("{stem}.json"),
        json!({
            "level": sample.level,
            "cells": sample.breakpoints.len(),
            "mesh": sample.mesh,
            "defect": sample.defect,
            "monotone": sample.monotone(),
            "totalImage": sample.total_image().to_f64(),
        }),
    )?;
    Ok(())
}
