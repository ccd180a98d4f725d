//! Condition checkers and conjugacy diagnostics.
//!
//! The bounded-central checker scans induction times for windows whose
//! cocycle block is positive with bounded entries while the cocycle up to
//! the time stays bounded on the central-stable estimate. The
//! high-singularities checker tests height balance and how long the
//! iterates restricted to the inducing interval stay continuous.
//!
//! Continuity is verified in tower coordinates. Failure at orbit index `j`
//! means a discontinuity point lies strictly inside the translated window
//! `(T^j(0), T^j(0) + |I^(n)|)`; since every discontinuity sits at the
//! right end of some partition cell, the test reduces to per-floor gaps
//! "distance from the cell's right end to the next discontinuity", and
//! those gaps obey an exact cutting-and-stacking recursion. A climb over a
//! full tower is then a single pruned descent instead of exponentially
//! many steps.

use crate::birkhoff::BcTimeData;
use crate::cocycle::{accumulate_chain, enumerate_cells, Cell};
use crate::error::{Error, Result};
use crate::iet::{Aiet, Iet, IntervalMap};
use crate::rauzy::InductionChain;
use crate::scalar::{RealHp, Scalar};
use crate::spectrum::Subspace;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

// ---------------------------------------------------------------------------
// Continuity horizon.

/// None encodes an infinite gap (no discontinuity to the right).
type Gap = Option<Scalar>;

fn gap_min(a: &Gap, b: &Gap) -> Gap {
    match (a, b) {
        (None, x) => x.clone(),
        (x, None) => x.clone(),
        (Some(u), Some(v)) => {
            if u.cmp(v) == Ordering::Less {
                Some(u.clone())
            } else {
                Some(v.clone())
            }
        }
    }
}

/// Per-level, per-symbol minimum of the floor gaps.
pub struct GapTables {
    full_min: Vec<Vec<Gap>>,
}

/// Builds the gap tables for a translation chain up to its current depth.
pub fn gap_tables(chain: &InductionChain<Iet>) -> GapTables {
    let d = chain.initial().perm().len();
    let perm = chain.initial().perm();
    // Level 0: the right end of every interval except the last is a
    // discontinuity at distance zero.
    let mut level0: Vec<Gap> = vec![None; d];
    for (pos, s) in perm.top_row().iter().enumerate() {
        level0[s.0 as usize] = if pos + 1 < d {
            Some(Scalar::zero())
        } else {
            None
        };
    }
    let mut full_min = vec![level0];
    for level in 0..chain.depth() {
        let mv = chain.move_at(level);
        let w = mv.winner.0 as usize;
        let l = mv.loser.0 as usize;
        let c = chain.state(level).lengths()[l].clone();
        let prev = &full_min[level];
        let mut next = prev.clone();
        // The trimmed winner floors move their right ends left by the cut
        // width, which adds the cut width to each gap.
        next[w] = prev[w].as_ref().map(|g| g.add(&c));
        // The loser tower stacks the old loser and winner towers; both
        // parts keep their right ends.
        next[l] = gap_min(&prev[l], &prev[w]);
        full_min.push(next);
    }
    GapTables { full_min }
}

/// Index of the first floor among the first `limit` floors of the level-`n`
/// tower of `sym` whose gap (plus `shift`) is strictly below `threshold`.
fn first_gap_below(
    chain: &InductionChain<Iet>,
    tables: &GapTables,
    level: usize,
    sym: crate::perm::Symbol,
    shift: &Scalar,
    limit: &BigUint,
    threshold: &Scalar,
) -> Option<BigUint> {
    if limit.is_zero() {
        return None;
    }
    let fm = &tables.full_min[level][sym.0 as usize];
    match fm {
        None => return None,
        Some(g) => {
            if g.add(shift).cmp(threshold) != Ordering::Less {
                return None;
            }
        }
    }
    if level == 0 {
        // Height-one tower; the full minimum already failed the threshold.
        return Some(BigUint::zero());
    }
    let mv = chain.move_at(level - 1);
    if sym != mv.winner && sym != mv.loser {
        return first_gap_below(chain, tables, level - 1, sym, shift, limit, threshold);
    }
    if sym == mv.winner {
        let c = chain.state(level - 1).lengths()[mv.loser.0 as usize].clone();
        let shift = shift.add(&c);
        return first_gap_below(chain, tables, level - 1, sym, &shift, limit, threshold);
    }
    // Loser tower: two stacked parts, neither shifted.
    let (first, second) = crate::cocycle::stacking(chain, level - 1, sym).unwrap();
    let h1 = chain.heights(level - 1)[first.0 as usize].clone();
    let r1 = limit.min(&h1).clone();
    if let Some(i) = first_gap_below(chain, tables, level - 1, first, shift, &r1, threshold) {
        return Some(i);
    }
    if *limit > h1 {
        let rest = limit - &h1;
        return first_gap_below(chain, tables, level - 1, second, shift, &rest, threshold)
            .map(|i| i + h1);
    }
    None
}

#[derive(Clone, Debug)]
pub struct HorizonOutcome {
    /// `T^i` restricted to the inducing interval is continuous for all
    /// `i <= verified`.
    pub verified: BigUint,
    /// First failing window index, when one was found below the target.
    pub first_failure: Option<BigUint>,
    /// The climb budget ran out before reaching the target.
    pub exhausted: bool,
}

/// Certifies continuity of the iterates on the level-`n` inducing interval
/// up to `target` by walking the orbit of 0 one tower climb at a time.
pub fn continuity_horizon(
    chain: &InductionChain<Iet>,
    tables: &GapTables,
    n: usize,
    target: &BigUint,
    climb_budget: usize,
) -> Result<HorizonOutcome> {
    let state = chain.state(n);
    let domain = state.total_len().clone();
    let mut steps = BigUint::zero();
    let mut y = Scalar::zero();
    for _ in 0..climb_budget {
        if steps >= *target {
            return Ok(HorizonOutcome {
                verified: target.clone(),
                first_failure: None,
                exhausted: false,
            });
        }
        let sym = state.symbol_at(&y)?;
        let delta = y.sub(state.interval_start(sym));
        // A window starting on this floor reaches `domain - length + delta`
        // past the floor's right end.
        let threshold = domain
            .sub(&state.lengths()[sym.0 as usize])
            .add(&delta);
        let q = chain.heights(n)[sym.0 as usize].clone();
        let remaining = target - &steps;
        let limit = q.clone().min(remaining);
        if let Some(i) =
            first_gap_below(chain, tables, n, sym, &Scalar::zero(), &limit, &threshold)
        {
            let fail = &steps + &i;
            return Ok(HorizonOutcome {
                verified: fail.clone(),
                first_failure: Some(fail),
                exhausted: false,
            });
        }
        steps += limit;
        y = state.evaluate(&y)?;
    }
    Ok(HorizonOutcome {
        verified: steps,
        first_failure: None,
        exhausted: true,
    })
}

// ---------------------------------------------------------------------------
// High-singularities condition.

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum HorizonKind {
    /// Quarter of the maximal height.
    QuarterMax,
    /// Quarter of the minimal height (fallback when the max horizon fails).
    QuarterMin,
}

#[derive(Clone, Debug)]
pub struct HsWitness {
    pub zorich_index: usize,
    pub rv_index: usize,
    /// max height / min height at the time, as a float for reporting.
    pub balance: f64,
    pub horizon: BigUint,
    pub horizon_kind: HorizonKind,
}

#[derive(Clone, Debug)]
pub struct HsParams {
    /// Balance constant; heights must satisfy max/min < C.
    pub balance_bound: BigRational,
    /// Climbs allowed per horizon certification.
    pub climb_budget: usize,
}

impl Default for HsParams {
    fn default() -> Self {
        HsParams {
            balance_bound: BigRational::from(BigInt::from(10)),
            climb_budget: 256,
        }
    }
}

/// Scans Zorich times up to `max_blocks` for balanced heights and long
/// continuity horizons. An empty result is a report, not an error.
pub fn check_hs(
    chain: &mut InductionChain<Iet>,
    max_blocks: usize,
    params: &HsParams,
) -> Result<Vec<HsWitness>> {
    let bounds = chain.ensure_zorich_depth(max_blocks)?;
    let tables = gap_tables(chain);
    let mut out = Vec::new();
    for (zi, &rv) in bounds.iter().enumerate() {
        let q = chain.heights(rv);
        let max_q = q.iter().max().unwrap().clone();
        let min_q = q.iter().min().unwrap().clone();
        // max/min < C exactly.
        let lhs = BigInt::from(max_q.clone()) * params.balance_bound.denom();
        let rhs = BigInt::from(min_q.clone()) * params.balance_bound.numer();
        if lhs >= rhs {
            continue;
        }
        let h_max = &max_q >> 2usize;
        let outcome = continuity_horizon(chain, &tables, rv, &h_max, params.climb_budget)?;
        let balance = big_ratio_f64(&max_q, &min_q);
        if outcome.first_failure.is_none() && !outcome.exhausted {
            out.push(HsWitness {
                zorich_index: zi,
                rv_index: rv,
                balance,
                horizon: h_max,
                horizon_kind: HorizonKind::QuarterMax,
            });
            continue;
        }
        let h_min = &min_q >> 2usize;
        if h_min.is_zero() {
            // Vacuous horizon: level 0 and very early times.
            out.push(HsWitness {
                zorich_index: zi,
                rv_index: rv,
                balance,
                horizon: h_min,
                horizon_kind: HorizonKind::QuarterMin,
            });
            continue;
        }
        let outcome = continuity_horizon(chain, &tables, rv, &h_min, params.climb_budget)?;
        if outcome.first_failure.is_none() && !outcome.exhausted {
            out.push(HsWitness {
                zorich_index: zi,
                rv_index: rv,
                balance,
                horizon: h_min,
                horizon_kind: HorizonKind::QuarterMin,
            });
        }
    }
    Ok(out)
}

fn big_ratio_f64(a: &BigUint, b: &BigUint) -> f64 {
    let ra = RealHp::from_bigint(&BigInt::from(a.clone()), 64);
    let rb = RealHp::from_bigint(&BigInt::from(b.clone()), 64);
    ra.div(&rb).to_f64()
}

/// Independent re-verification of an emitted witness.
pub fn verify_hs_witness(
    chain: &InductionChain<Iet>,
    params: &HsParams,
    w: &HsWitness,
) -> Result<()> {
    let q = chain.heights(w.rv_index);
    let max_q = q.iter().max().unwrap().clone();
    let min_q = q.iter().min().unwrap().clone();
    let lhs = BigInt::from(max_q.clone()) * params.balance_bound.denom();
    let rhs = BigInt::from(min_q.clone()) * params.balance_bound.numer();
    if lhs >= rhs {
        return Err(Error::BadSpec("balance violated on re-check".into()));
    }
    let expect = match w.horizon_kind {
        HorizonKind::QuarterMax => &max_q >> 2usize,
        HorizonKind::QuarterMin => &min_q >> 2usize,
    };
    if expect != w.horizon {
        return Err(Error::BadSpec("horizon does not match the heights".into()));
    }
    let tables = gap_tables(chain);
    let outcome = continuity_horizon(chain, &tables, w.rv_index, &w.horizon, params.climb_budget)?;
    if outcome.first_failure.is_some() || outcome.exhausted {
        return Err(Error::BadSpec("continuity failed on re-check".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bounded-central condition.

#[derive(Clone, Debug)]
pub struct BcTime {
    pub zorich_index: usize,
    pub rv_index: usize,
    pub rv_window_end: usize,
    pub block_max_entry: u64,
    pub restricted_norm: f64,
}

#[derive(Clone, Debug)]
pub struct BcWitness {
    /// Window length in Zorich blocks.
    pub window_blocks: usize,
    pub times: Vec<BcTime>,
    /// Entry bound over all accepted windows.
    pub k_bound: u64,
    /// Restricted-norm bound over all accepted times.
    pub v_bound: f64,
    /// Dimension of the central-stable estimate used for item (ii).
    pub ecs_dim: usize,
}

impl BcWitness {
    pub fn time_data(&self, i: usize) -> BcTimeData {
        let t = &self.times[i];
        BcTimeData {
            n_k: t.rv_index,
            n_plus: t.rv_window_end,
            k_bound: self.k_bound,
            v_bound: self.v_bound,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BcParams {
    /// Fixed window length in Zorich blocks; `None` searches 1..=8.
    pub window_blocks: Option<usize>,
    /// Cap on block entries.
    pub entry_cap: u64,
    /// Cap on the restricted norm.
    pub norm_cap: f64,
    /// Minimal number of accepted times for a witness.
    pub min_times: usize,
}

impl Default for BcParams {
    fn default() -> Self {
        BcParams {
            window_blocks: None,
            entry_cap: 1000,
            norm_cap: 100.0,
            min_times: 3,
        }
    }
}

/// Upper bound on the spectral norm of the cocycle window restricted to
/// the subspace: `sqrt(max absolute row sum)` of the Gram matrix of the
/// mapped basis.
pub fn restricted_norm_bound<M: IntervalMap>(
    chain: &InductionChain<M>,
    n: usize,
    basis: &Subspace,
) -> f64 {
    let z = accumulate_chain(chain, 0, n);
    let d = z.dim();
    let prec = (z.max_entry().bits() as u32 + 96).max(128);
    let mapped: Vec<Vec<RealHp>> = basis
        .basis
        .iter()
        .map(|col| {
            (0..d)
                .map(|i| {
                    let mut acc = RealHp::zero(prec);
                    for (j, cj) in col.iter().enumerate() {
                        acc = acc.add(&RealHp::from_bigint(z.get(i, j), prec).mul(cj));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let k = mapped.len();
    let mut worst = 0.0f64;
    for i in 0..k {
        let mut row = 0.0f64;
        for j in 0..k {
            let mut dot = RealHp::zero(prec);
            for r in 0..d {
                dot = dot.add(&mapped[i][r].mul(&mapped[j][r]));
            }
            row += dot.to_f64().abs();
        }
        worst = worst.max(row);
    }
    worst.sqrt()
}

/// Scans Zorich times up to `max_blocks` for bounded positive windows and
/// bounded restricted norms. Returns at most one witness; an empty result
/// is a report, not an error.
pub fn check_bc<M: IntervalMap>(
    chain: &mut InductionChain<M>,
    ecs: &Subspace,
    max_blocks: usize,
    params: &BcParams,
) -> Result<Vec<BcWitness>> {
    let bounds = chain.ensure_zorich_depth(max_blocks)?;
    let windows: Vec<usize> = match params.window_blocks {
        Some(n) => vec![n],
        None => (1..=8).collect(),
    };
    for window in windows {
        let mut times = Vec::new();
        let mut k_bound = 0u64;
        let mut v_bound = 0.0f64;
        for t in 0..bounds.len().saturating_sub(window) {
            let rv_a = bounds[t];
            let rv_b = bounds[t + window];
            let block = accumulate_chain(chain, rv_a, rv_b);
            if !block.is_positive() {
                continue;
            }
            let max_entry = match block.max_entry().to_u64() {
                Some(v) => v,
                None => continue,
            };
            if max_entry > params.entry_cap {
                continue;
            }
            let norm = restricted_norm_bound(chain, rv_a, ecs);
            if !norm.is_finite() || norm > params.norm_cap {
                continue;
            }
            k_bound = k_bound.max(max_entry);
            v_bound = v_bound.max(norm);
            times.push(BcTime {
                zorich_index: t,
                rv_index: rv_a,
                rv_window_end: rv_b,
                block_max_entry: max_entry,
                restricted_norm: norm,
            });
        }
        if times.len() >= params.min_times {
            return Ok(vec![BcWitness {
                window_blocks: window,
                times,
                k_bound,
                v_bound,
                ecs_dim: ecs.dim,
            }]);
        }
    }
    Ok(Vec::new())
}

/// Recomputes every certificate of a witness from scratch.
pub fn verify_bc_witness<M: IntervalMap>(
    chain: &InductionChain<M>,
    ecs: &Subspace,
    w: &BcWitness,
) -> Result<()> {
    for t in &w.times {
        let block = accumulate_chain(chain, t.rv_index, t.rv_window_end);
        if !block.is_positive() {
            return Err(Error::NotBcTime(t.rv_index));
        }
        let max_entry = block.max_entry().to_u64().unwrap_or(u64::MAX);
        if max_entry > w.k_bound {
            return Err(Error::BadSpec(format!(
                "entry bound violated at step {}",
                t.rv_index
            )));
        }
        let norm = restricted_norm_bound(chain, t.rv_index, ecs);
        if norm > w.v_bound * (1.0 + 1e-9) {
            return Err(Error::BadSpec(format!(
                "restricted norm violated at step {}",
                t.rv_index
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Semi-conjugacy and measure diagnostics.

#[derive(Clone, Debug)]
pub struct Breakpoint {
    pub x: Scalar,
    pub h: Scalar,
    pub slope: f64,
}

/// Piecewise-affine approximation of the conjugating map at one level:
/// cells of the domain map are matched floor-for-floor with cells of the
/// target map, in spatial order.
#[derive(Clone, Debug)]
pub struct ConjugacySample {
    pub level: usize,
    pub breakpoints: Vec<Breakpoint>,
    /// Widths of each matched pair, for slopes and masses.
    pub widths: Vec<(Scalar, Scalar)>,
    /// Coarseness of the target partition.
    pub mesh: f64,
    /// Largest commutation defect observed at the sample points.
    pub defect: f64,
    // Float snapshot of the breakpoints for the bulk diagnostics.
    xs: Vec<f64>,
    hs: Vec<f64>,
    wxs: Vec<f64>,
    whs: Vec<f64>,
}

impl ConjugacySample {
    /// Piecewise-affine evaluation.
    pub fn eval(&self, x: &Scalar) -> Scalar {
        let pts = &self.breakpoints;
        let mut lo = 0usize;
        let mut hi = pts.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if pts[mid].x.cmp(x) != Ordering::Greater {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let bp = &pts[lo];
        let (wx, wh) = &self.widths[lo];
        let t = x.sub(&bp.x).div(wx);
        bp.h.add(&t.mul(wh))
    }

    pub fn monotone(&self) -> bool {
        self.breakpoints
            .windows(2)
            .all(|w| w[0].h.cmp(&w[1].h) != Ordering::Greater)
    }

    fn cell_index_f64(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Float evaluation over the snapshot; accurate to the float error of
    /// the breakpoints, far below any reported mesh.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let i = self.cell_index_f64(x);
        let t = ((x - self.xs[i]) / self.wxs[i]).clamp(0.0, 1.0);
        self.hs[i] + t * self.whs[i]
    }

    /// Total variation: the sum of image-cell widths.
    pub fn total_image(&self) -> Scalar {
        self.widths
            .iter()
            .fold(Scalar::zero(), |a, (_, wh)| a.add(wh))
    }
}

/// Builds the level-`n` conjugacy sample between an affine exchange and the
/// exchange with the same rotation prefix.
pub fn semi_conjugacy(
    chain_t: &InductionChain<Aiet>,
    chain_t0: &InductionChain<Iet>,
    n: usize,
    cell_cap: u64,
) -> Result<ConjugacySample> {
    if chain_t.depth() < n || chain_t0.depth() < n {
        return Err(Error::PathMismatch(n));
    }
    for i in 0..n {
        let a = chain_t.move_at(i);
        let b = chain_t0.move_at(i);
        if a.rv_type != b.rv_type || a.winner != b.winner {
            return Err(Error::PathMismatch(i));
        }
    }
    let mut cells_t = enumerate_cells(chain_t, n, cell_cap)?;
    let mut cells_t0 = enumerate_cells(chain_t0, n, cell_cap)?;
    cells_t.sort_by(|a, b| a.lo.cmp(&b.lo));
    cells_t0.sort_by(|a, b| a.lo.cmp(&b.lo));
    if cells_t.len() != cells_t0.len() {
        return Err(Error::PathMismatch(n));
    }
    for (a, b) in cells_t.iter().zip(&cells_t0) {
        if a.symbol != b.symbol || a.floor != b.floor {
            return Err(Error::PathMismatch(n));
        }
    }
    let mut mesh = 0.0f64;
    let mut breakpoints = Vec::with_capacity(cells_t.len());
    let mut widths = Vec::with_capacity(cells_t.len());
    for (a, b) in cells_t.iter().zip(&cells_t0) {
        let wx = a.hi.sub(&a.lo);
        let wh = b.hi.sub(&b.lo);
        let slope = wh.to_f64() / wx.to_f64();
        mesh = mesh.max(wh.to_f64());
        breakpoints.push(Breakpoint {
            x: a.lo.clone(),
            h: b.lo.clone(),
            slope,
        });
        widths.push((wx, wh));
    }
    let xs: Vec<f64> = breakpoints.iter().map(|b| b.x.to_f64()).collect();
    let hs: Vec<f64> = breakpoints.iter().map(|b| b.h.to_f64()).collect();
    let wxs: Vec<f64> = widths.iter().map(|(a, _)| a.to_f64()).collect();
    let whs: Vec<f64> = widths.iter().map(|(_, b)| b.to_f64()).collect();
    let mut sample = ConjugacySample {
        level: n,
        breakpoints,
        widths,
        mesh,
        defect: 0.0,
        xs,
        hs,
        wxs,
        whs,
    };
    sample.defect = conjugacy_defect(&sample, chain_t.initial(), chain_t0.initial())?;
    Ok(sample)
}

/// Float evaluator of an exchange, for bulk diagnostics.
pub struct F64Exchange {
    starts: Vec<f64>,
    widths: Vec<f64>,
    image_starts: Vec<f64>,
    slopes: Vec<f64>,
    total: f64,
}

impl F64Exchange {
    pub fn new<M: IntervalMap>(map: &M) -> Self {
        let perm = map.perm();
        let d = perm.len();
        let mut starts = Vec::with_capacity(d);
        let mut widths = Vec::with_capacity(d);
        let mut image_starts = Vec::with_capacity(d);
        let mut slopes = Vec::with_capacity(d);
        for p in 0..d {
            let s = perm.top_row()[p];
            starts.push(map.interval_start(s).to_f64());
            widths.push(map.lengths()[s.0 as usize].to_f64());
            image_starts.push(map.image_start(s).to_f64());
            slopes.push(map.image_width(s).to_f64() / map.lengths()[s.0 as usize].to_f64());
        }
        F64Exchange {
            starts,
            widths,
            image_starts,
            slopes,
            total: map.total_len().to_f64(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        for p in (0..self.starts.len()).rev() {
            if x >= self.starts[p] {
                let y = self.image_starts[p] + (x - self.starts[p]) * self.slopes[p];
                // Guard the right edge against rounding.
                return y.min(self.total * (1.0 - 1e-15));
            }
        }
        self.image_starts[0]
    }

    pub fn width(&self, p: usize) -> f64 {
        self.widths[p]
    }
}

/// Sup of `|h(T x) - T0(h x)|` over cell midpoints and near-left points,
/// computed on float snapshots.
fn conjugacy_defect(sample: &ConjugacySample, t: &Aiet, t0: &Iet) -> Result<f64> {
    let tf = F64Exchange::new(t);
    let t0f = F64Exchange::new(t0);
    let mut worst = 0.0f64;
    for i in 0..sample.xs.len() {
        for frac in [0.25f64, 0.5] {
            let x = sample.xs[i] + frac * sample.wxs[i];
            let tx = tf.eval(x);
            let hx = sample.eval_f64(x);
            let h_tx = sample.eval_f64(tx);
            let t0_hx = t0f.eval(hx);
            worst = worst.max((h_tx - t0_hx).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ProfileRow {
    pub eps: f64,
    /// Lebesgue mass of the domain cells with slope below eps.
    pub mass_small_slope: f64,
    /// Image mass of the cells with slope above 1/eps.
    pub mass_large_slope: f64,
}

/// Distribution of local conjugacy slopes against thresholds.
pub fn derivative_profile(sample: &ConjugacySample, thresholds: &[f64]) -> Vec<ProfileRow> {
    thresholds
        .iter()
        .map(|&eps| {
            let mut small = 0.0;
            let mut large = 0.0;
            for ((wx, wh), bp) in sample.widths.iter().zip(&sample.breakpoints) {
                if bp.slope < eps {
                    small += wx.to_f64();
                }
                if bp.slope > 1.0 / eps {
                    large += wh.to_f64();
                }
            }
            ProfileRow {
                eps,
                mass_small_slope: small,
                mass_large_slope: large,
            }
        })
        .collect()
}

/// Mass assigned to each target-side cell by pulling Lebesgue measure back
/// through the conjugacy: the width of the matching domain cell.
pub fn invariant_measure_estimate(sample: &ConjugacySample) -> Vec<(Scalar, Scalar, Scalar)> {
    sample
        .breakpoints
        .iter()
        .zip(&sample.widths)
        .map(|(bp, (wx, wh))| (bp.h.clone(), bp.h.add(wh), wx.clone()))
        .collect()
}

/// Compares the measure estimate with empirical visit frequencies of a
/// long orbit of the domain map pushed through the conjugacy; returns the
/// largest deviation.
pub fn measure_orbit_check(
    sample: &ConjugacySample,
    t: &Aiet,
    x0: &Scalar,
    orbit_len: usize,
) -> Result<f64> {
    let tf = F64Exchange::new(t);
    let mut counts = vec![0usize; sample.xs.len()];
    let mut u = x0.to_f64();
    for _ in 0..orbit_len {
        counts[sample.cell_index_f64(u)] += 1;
        u = tf.eval(u);
    }
    let mut worst = 0.0f64;
    for (c, w) in counts.iter().zip(&sample.wxs) {
        let freq = *c as f64 / orbit_len as f64;
        worst = worst.max((freq - w).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::make_permutation;
    use crate::scalar::NumberField;
    use std::sync::Arc;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn golden_field() -> Arc<NumberField> {
        NumberField::new(vec![rat(-1, 1), rat(-1, 1), rat(1, 1)], rat(1, 1), rat(2, 1)).unwrap()
    }

    fn golden_iet() -> Iet {
        let f = golden_field();
        let phi = f.theta();
        let one = f.from_rational(rat(1, 1));
        let two = f.from_rational(rat(2, 1));
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        Iet::new(
            p,
            vec![Scalar::Alg(phi.sub(&one)), Scalar::Alg(two.sub(&phi))],
        )
        .unwrap()
    }

    #[test]
    fn level_zero_horizon_vacuous() {
        let chain = InductionChain::new(golden_iet()).extended_to(1).unwrap();
        let tables = gap_tables(&chain);
        // At level 0 the window is the whole interval: the first check
        // already fails.
        let out =
            continuity_horizon(&chain, &tables, 0, &BigUint::from(10u32), 64).unwrap();
        assert_eq!(out.first_failure, Some(BigUint::zero()));
    }

    #[test]
    fn golden_horizon_quarter_max() {
        let mut chain = InductionChain::new(golden_iet()).extended_to(30).unwrap();
        let tables = gap_tables(&chain);
        // Cross-check the tower-coordinate engine against a direct orbit
        // walk at a moderate level.
        let n = 10;
        let state = chain.state(n).clone();
        let domain = state.total_len().clone();
        let map = chain.initial().clone();
        let sing = map.singularities();
        let mut b = Scalar::zero();
        let mut direct_fail = None;
        for j in 0..2000u32 {
            let hit = sing.iter().any(|u| {
                u.cmp(&b) == Ordering::Greater && u.cmp(&b.add(&domain)) == Ordering::Less
            });
            if hit {
                direct_fail = Some(BigUint::from(j));
                break;
            }
            b = map.evaluate(&b).unwrap();
        }
        let target = BigUint::from(2000u32);
        let out = continuity_horizon(&chain, &tables, n, &target, 4096).unwrap();
        assert_eq!(out.first_failure, direct_fail);

        // The golden heights are balanced and the quarter-max horizon holds
        // at every scanned level.
        let ws = check_hs(&mut chain, 20, &HsParams::default()).unwrap();
        assert!(!ws.is_empty());
        for w in &ws {
            if w.zorich_index > 0 {
                assert_eq!(w.horizon_kind, HorizonKind::QuarterMax, "level {}", w.rv_index);
            }
            verify_hs_witness(&chain, &HsParams::default(), w).unwrap();
        }
        // Balance of consecutive Fibonacci numbers tends to phi < 2.
        assert!(ws.last().unwrap().balance < 2.0);
    }

    #[test]
    fn golden_bc_witness() {
        let mut chain = InductionChain::new(golden_iet()).extended_to(80).unwrap();
        let ecs = crate::spectrum::central_stable_space(&chain, 60).unwrap();
        let ws = check_bc(&mut chain, &ecs, 40, &BcParams::default()).unwrap();
        assert_eq!(ws.len(), 1);
        let w = &ws[0];
        // Fibonacci window blocks are positive with entries {2,1;1,1}.
        assert_eq!(w.window_blocks, 2);
        assert_eq!(w.k_bound, 2);
        assert!(w.v_bound < 3.0, "v bound {}", w.v_bound);
        verify_bc_witness(&chain, &ecs, w).unwrap();
    }
}
