//! Full evidence bundle for one instance: certificate scans, an affine
//! exchange built over the instance's rotation prefix, bounded-return
//! certificates, wandering-series growth along the certified times, and
//! conjugacy plus measure diagnostics across a ladder of levels.

use super::{
    bc_json, emitter, guard, hs_json, load_spec, parse_vector, witness_json, write_conjugacy,
    CliError, CliResult,
};
use crate::Common;
use iet_core::affine::BuildOptions;
use iet_core::analysis::{self, BcParams, HsParams};
use iet_core::birkhoff::{self, Observable};
use iet_core::fixtures::{next_unit, rng_for_instance};
use iet_core::periodic::{instance_from_loop, periodic_central_stable, PeriodicInstance};
use iet_core::specfile::MapSpec;
use iet_core::spectrum;
use iet_core::{Iet, InductionChain, IntervalMap, RealHp, Scalar};
use serde_json::json;

/// Smallest period of the move sequence that returns to the starting
/// permutation, if the available prefix repeats it at least twice.
fn detect_period(chain: &InductionChain<Iet>) -> Option<usize> {
    let depth = chain.depth();
    'outer: for p in 1..=depth / 2 {
        if chain.state(p).perm() != chain.state(0).perm() {
            continue;
        }
        let limit = depth - p;
        for i in 0..limit {
            let a = chain.move_at(i);
            let b = chain.move_at(i + p);
            if a.rv_type != b.rv_type || a.winner != b.winner {
                continue 'outer;
            }
        }
        return Some(p);
    }
    None
}

pub fn report(
    common: &Common,
    hash: String,
    omega: Option<&str>,
    loop_cap: usize,
    points: usize,
) -> CliResult {
    let mut em = emitter(common, hash)?;
    let loaded = load_spec(common)?;
    let t0 = loaded.as_iet()?.clone();
    let d = t0.perm().len();
    let prec = common.precision.max(192);

    let mut chain = InductionChain::new(t0.clone());
    chain.ensure_zorich_depth(common.steps)?;

    // Exact data for periodic-type instances; estimated otherwise.
    let period = detect_period(&chain);
    let instance: Option<PeriodicInstance> = period.and_then(|p| {
        instance_from_loop(chain.path_prefix(p)).ok().filter(|inst| {
            // The instance is only used when the spec's lengths actually
            // follow its Perron direction.
            inst.lambda
                .iter()
                .zip(t0.lengths())
                .all(|(a, b)| a.sub(b).abs().to_f64() < 1e-12)
        })
    });
    let _ = loop_cap;

    let omega: Vec<Scalar> = match (omega, &instance) {
        (Some(s), _) => parse_vector(s, d, prec)?,
        (None, Some(inst)) => inst
            .omega_rational()
            .iter()
            .map(|r| Scalar::Rat(r.clone()))
            .collect(),
        (None, None) => {
            return Err(CliError::Config(
                "--omega is required for non-periodic instances".into(),
            ))
        }
    };
    let compat = iet_core::affine::check_compatibility(&t0, &omega);

    // Central-stable data: exact for periodic instances, else estimated.
    let bounds = chain.path().zorich_boundaries();
    let (ecs, ecs_kind) = match &instance {
        Some(inst) => {
            let basis = periodic_central_stable(inst);
            (
                spectrum::subspace_from_scalars(&basis, prec),
                "exact-periodic".to_string(),
            )
        }
        None => {
            let window = bounds[(bounds.len() - 1) * 3 / 4].max(1);
            (
                spectrum::central_stable_space(&chain, window)?,
                "singular-value-estimate".to_string(),
            )
        }
    };

    // Certificate scans.
    let p_blocks = period.map(|p| {
        bounds.iter().position(|b| *b == p).unwrap_or(1).max(1)
    });
    let bc_params = BcParams {
        window_blocks: p_blocks,
        ..Default::default()
    };
    let bc = analysis::check_bc(&mut chain, &ecs, common.steps, &bc_params)?;
    for w in &bc {
        analysis::verify_bc_witness(&chain, &ecs, w).map_err(CliError::Domain)?;
    }
    em.json("bc.json", bc_json(&bc, !bc.is_empty()))?;

    let hs_params = HsParams::default();
    let hs = analysis::check_hs(&mut chain, common.steps, &hs_params)?;
    for w in &hs {
        analysis::verify_hs_witness(&chain, &hs_params, w).map_err(CliError::Domain)?;
    }
    em.json("hs.json", hs_json(&hs))?;

    // Affine exchange over the same rotation prefix.
    let build = iet_core::affine::build_aiet(
        &t0,
        &omega,
        &BuildOptions {
            depth: common.depth,
            requested_prefix: common.depth.min(30),
            precision: prec,
            ..Default::default()
        },
    )?;
    em.json(
        "aiet.json",
        serde_json::to_value(MapSpec::from_aiet(&build.aiet)).unwrap(),
    )?;
    em.json(
        "build_report.json",
        json!({
            "matchedPrefix": build.matched_prefix,
            "depthUsed": build.depth_used,
            "etaGap": build.eta_gap.to_f64(),
            "closingDefect": build.closing_defect.to_f64(),
            "gapLadder": build.gaps,
            "compatibilityDefect": compat.to_f64(),
        }),
    )?;

    // Bounded-return certificates at seeded points, on the affine map.
    let obs_t = Observable::new(
        build
            .aiet
            .log_slopes()
            .iter()
            .map(|w| Scalar::Real(w.clone()))
            .collect(),
    );
    let mut aiet_chain = InductionChain::with_guard(build.aiet.clone(), guard(common));
    let mut witnesses = Vec::new();
    let mut all_bounds_hold = true;
    let mut growth_ok = true;
    if let Some(w) = bc.first() {
        let usable = w.times.len().min(4);
        if usable > 0 {
            let deepest = w.times[usable - 1].rv_window_end;
            aiet_chain.ensure_depth(deepest)?;
            let mut rng = rng_for_instance(common.seed, 0);
            for i in 0..points {
                let x = Scalar::Real(RealHp::from_f64(next_unit(&mut rng), prec));
                for k in 0..usable {
                    let data = w.time_data(k);
                    let bt = birkhoff::bounded_times(&aiet_chain, &obs_t, &x, k, &data)?;
                    all_bounds_hold &= bt.bound_holds() && bt.membership_verified;
                    // Linear growth of the series along the certified
                    // times: every certified term is at least e^{-bound}.
                    growth_ok &= bt.sum_forward.to_f64() >= -bt.bound - 1e-9;
                    if i < 3 {
                        witnesses.push(witness_json(&bt));
                    }
                }
            }
        }
    }
    em.json(
        "bounded_times.json",
        json!({
            "points": points,
            "sampled": witnesses,
            "allBoundsHold": all_bounds_hold,
            "linearGrowth": growth_ok,
        }),
    )?;

    // Direct series scan at one point for the record.
    let series = birkhoff::wandering_series(
        &build.aiet,
        &obs_t,
        &Scalar::Real(RealHp::from_f64(0.37, prec)),
        300,
        prec,
    )?;
    em.json(
        "wandering.json",
        json!({
            "terms": 300,
            "forwardPartial": series.forward.last().map(|r| r.2),
            "backwardPartial": series.backward.last().map(|r| r.2),
            "wanderingCandidate": series.wandering_candidate,
        }),
    )?;

    // Conjugacy ladder: one sample per period (or every 4 steps), capped
    // by the cell budget.
    let stride = period.unwrap_or(4).max(1);
    let mut t0_chain = InductionChain::new(t0.clone());
    let mut levels = Vec::new();
    let mut level = stride;
    let mut last_sample = None;
    let mut small_mass = Vec::new();
    while levels.len() < 8 {
        if aiet_chain.ensure_depth(level).is_err() || t0_chain.ensure_depth(level).is_err() {
            break;
        }
        match analysis::semi_conjugacy(&aiet_chain, &t0_chain, level, 300_000) {
            Ok(sample) => {
                let profile = analysis::derivative_profile(&sample, &[0.1]);
                small_mass.push((level, profile[0].mass_small_slope));
                levels.push(json!({
                    "level": level,
                    "cells": sample.breakpoints.len(),
                    "mesh": sample.mesh,
                    "defect": sample.defect,
                    "monotone": sample.monotone(),
                    "massSlopeBelowTenth": profile[0].mass_small_slope,
                }));
                last_sample = Some(sample);
            }
            Err(iet_core::Error::OrbitSearchOverflow(_)) => break,
            Err(e) => return Err(e.into()),
        }
        level += stride;
    }
    if let Some(sample) = &last_sample {
        write_conjugacy(&mut em, sample, "conjugacy")?;
        let profile = analysis::derivative_profile(
            sample,
            &[0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
        );
        em.csv(
            "profile.csv",
            "eps,mass_small_slope,mass_large_slope",
            profile
                .iter()
                .map(|r| format!("{},{},{}", r.eps, r.mass_small_slope, r.mass_large_slope)),
        )?;
        // Measure estimate and an orbit-frequency cross-check.
        let masses = analysis::invariant_measure_estimate(sample);
        let dev = analysis::measure_orbit_check(
            sample,
            &build.aiet,
            &Scalar::Real(RealHp::from_f64(0.123_456, prec)),
            100_000,
        )?;
        em.json(
            "measure.json",
            json!({
                "cells": masses.len(),
                "totalMass": masses.iter().fold(0.0, |a, (_, _, m)| a + m.to_f64()),
                "orbitFrequencyDeviation": dev,
                "level": sample.level,
            }),
        )?;
    }
    let increasing = small_mass
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 - 1e-12);

    em.json(
        "summary.json",
        json!({
            "period": period,
            "periodicInstance": instance.is_some(),
            "ecsKind": ecs_kind,
            "omega": omega.iter().map(|w| w.display_string()).collect::<Vec<_>>(),
            "compatibilityDefect": compat.to_f64(),
            "bcFound": !bc.is_empty(),
            "hsFound": !hs.is_empty(),
            "buildMatchedPrefix": build.matched_prefix,
            "etaGap": build.eta_gap.to_f64(),
            "boundedTimesHold": all_bounds_hold,
            "linearGrowth": growth_ok,
            "conjugacyLevels": levels,
            "smallSlopeMassIncreasing": increasing,
        }),
    )?;
    println!(
        "report: period={period:?}, bc={}, hs={}, eta_gap={:.2e}, bounds={}, mass_trend={}",
        !bc.is_empty(),
        !hs.is_empty(),
        build.eta_gap.to_f64(),
        all_bounds_hold,
        increasing
    );
    Ok(())
}
