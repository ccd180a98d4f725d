//! Birkhoff sums of piecewise-constant observables, their renormalization
//! through special Birkhoff sums, bounded-return-time certificates, and the
//! wandering-interval series test.
//!
//! Negative indices follow the cocycle-forced convention
//! `S_n f(x) = -sum_{j=1..-n} f(T^{-j} x)` for `n < 0`, so that
//! `S_{n+m} f = S_n f + S_m f . T^n` holds for all integers.

use crate::cocycle::{accumulate_chain, locate, propagate_tower_sums, tower_prefix_sum, Location};
use crate::error::{Error, Result};
use crate::iet::IntervalMap;
use crate::rauzy::InductionChain;
use crate::scalar::{RealHp, Scalar};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// A function constant on each exchanged interval.
#[derive(Clone, Debug)]
pub struct Observable {
    pub values: Vec<Scalar>,
}

impl Observable {
    pub fn new(values: Vec<Scalar>) -> Self {
        Observable { values }
    }

    pub fn from_rationals(values: &[num_rational::BigRational]) -> Self {
        Observable {
            values: values.iter().map(|v| Scalar::Rat(v.clone())).collect(),
        }
    }

    pub fn value_at<M: IntervalMap>(&self, map: &M, x: &Scalar) -> Result<Scalar> {
        let s = map.symbol_at(x)?;
        Ok(self.values[s.0 as usize].clone())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| {
                let f = v.to_f64();
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Direct orbit summation.
pub fn birkhoff_sum_naive<M: IntervalMap>(
    map: &M,
    obs: &Observable,
    x: &Scalar,
    n: i64,
) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    if n > 0 {
        let mut u = x.clone();
        for _ in 0..n {
            acc = acc.add(&obs.value_at(map, &u)?);
            u = map.evaluate(&u)?;
        }
    } else if n < 0 {
        let mut u = x.clone();
        for _ in 0..(-n) {
            u = map.evaluate_inverse(&u)?;
            acc = acc.sub(&obs.value_at(map, &u)?);
        }
    }
    Ok(acc)
}

/// Tower-based Birkhoff sum. The chain must be deep enough that its top
/// level exists; the summation decomposes the orbit segment into full tower
/// climbs at the deepest level that fits, so the cost is logarithmic in `n`
/// once the chain is deep enough for the heights to exceed `n`.
pub fn birkhoff_sum_tower<M: IntervalMap>(
    chain: &InductionChain<M>,
    obs: &Observable,
    x: &Scalar,
    n: &BigInt,
) -> Result<Scalar> {
    if n.is_zero() {
        return Ok(Scalar::zero());
    }
    if n.is_negative() {
        // S_n f(x) = -S_{-n} f(T^n x) with T^n x reached by inverse steps.
        let m = (-n).to_u64().ok_or_else(|| {
            Error::OrbitSearchOverflow(usize::MAX)
        })?;
        let map = chain.initial();
        let mut u = x.clone();
        for _ in 0..m {
            u = map.evaluate_inverse(&u)?;
        }
        let fwd = birkhoff_sum_tower(chain, obs, &u, &BigInt::from(m))?;
        return Ok(fwd.neg());
    }
    let sums = propagate_tower_sums(chain, &obs.values, chain.depth());
    let mut total = Scalar::zero();
    let mut u = x.clone();
    let mut rem: BigUint = n.to_biguint().unwrap();
    while !rem.is_zero() {
        let (level, loc) = deepest_fitting_climb(chain, &u, &rem)?;
        let q = &chain.heights(level)[loc.symbol.0 as usize];
        let cost = q - &loc.floor;
        // Sum over floors floor..q of the located tower.
        let full = sums[level][loc.symbol.0 as usize].clone();
        let head = tower_prefix_sum(chain, &sums, level, loc.symbol, &loc.floor);
        total = total.add(&full.sub(&head));
        rem -= cost;
        u = chain.state(level).evaluate(&loc.base_point)?;
    }
    Ok(total)
}

/// Deepest level whose remaining tower climb from `u` fits within `rem`.
fn deepest_fitting_climb<M: IntervalMap>(
    chain: &InductionChain<M>,
    u: &Scalar,
    rem: &BigUint,
) -> Result<(usize, Location)> {
    let mut best: Option<(usize, Location)> = None;
    for level in 0..=chain.depth() {
        // Early exit: once the smallest height exceeds rem, deeper levels
        // cannot fit either.
        let min_q = chain.heights(level).iter().min().unwrap().clone();
        if best.is_some() && min_q > *rem {
            break;
        }
        if u.cmp(chain.state(level).total_len()) != Ordering::Less {
            break;
        }
        let loc = locate(chain, level, u)?;
        let cost = &chain.heights(level)[loc.symbol.0 as usize] - &loc.floor;
        if cost <= *rem {
            best = Some((level, loc));
        }
    }
    best.ok_or_else(|| Error::OrbitSearchOverflow(chain.depth()))
}

/// Special Birkhoff sum of level `n`: the sum of the observable along each
/// tower, indexed by symbol. Computed by stacking propagation; equals the
/// incidence-matrix image of the observable vector.
pub fn special_birkhoff_sum<M: IntervalMap>(
    chain: &InductionChain<M>,
    obs: &Observable,
    n: usize,
) -> Vec<Scalar> {
    propagate_tower_sums(chain, &obs.values, n)
        .pop()
        .unwrap()
}

/// Constants extracted from a bounded-central certificate for one time.
#[derive(Clone, Debug)]
pub struct BcTimeData {
    /// Induction step of the time.
    pub n_k: usize,
    /// Induction step of the window end.
    pub n_plus: usize,
    /// Entry bound of the window block.
    pub k_bound: u64,
    /// Norm bound of the cocycle restricted to the central-stable estimate.
    pub v_bound: f64,
}

/// Certificate that the orbit of `x` returns near itself with a bounded
/// Birkhoff sum at both signs.
#[derive(Clone, Debug)]
pub struct BoundedTimesWitness {
    pub x: Scalar,
    pub level_index: usize,
    pub m_forward: BigInt,
    pub m_backward: BigInt,
    /// Tower data: symbol and floor of `x` at the certificate level.
    pub alpha: crate::perm::Symbol,
    pub floor: BigUint,
    /// Towers of the window level before and after the one containing `x`.
    pub beta: crate::perm::Symbol,
    pub beta_minus: crate::perm::Symbol,
    pub beta_plus: crate::perm::Symbol,
    pub j_forward: BigUint,
    pub j_backward: BigUint,
    /// Birkhoff sums at the two times.
    pub sum_forward: Scalar,
    pub sum_backward: Scalar,
    /// The bound `(2K+1) V |omega|` they must respect.
    pub bound: f64,
    /// Number of special sums in the forward decomposition (at most 2K).
    pub special_terms_forward: usize,
    pub special_terms_backward: usize,
    /// Both return points were re-located on the same floor as `x`.
    pub membership_verified: bool,
}

impl BoundedTimesWitness {
    pub fn bound_holds(&self) -> bool {
        let tol = 1e-9 * (1.0 + self.bound.abs());
        self.sum_forward.to_f64().abs() <= self.bound + tol
            && self.sum_backward.to_f64().abs() <= self.bound + tol
    }
}

// Orbit points at one induction level differ by at least one cell width,
// which is a bounded fraction of the level's domain, so a relative test is
// safe at any depth.
fn scalars_equal(a: &Scalar, b: &Scalar) -> bool {
    if a.is_exact() && b.is_exact() {
        return a.cmp(b) == Ordering::Equal;
    }
    let diff = a.sub(b).to_real(64).abs();
    let scale = a.to_real(64).abs().max(&b.to_real(64).abs());
    if scale.is_zero() {
        return diff.is_zero();
    }
    diff.cmp(&crate::scalar::real::guard_threshold(&scale, 40)) != Ordering::Greater
}

/// Visit sequence of the level-`n_k` induced orbit of a window-level base
/// point until it returns to the window interval, with cumulative floor
/// offsets and the visited points.
fn subtower_sequence<M: IntervalMap>(
    chain: &InductionChain<M>,
    n_k: usize,
    n_plus: usize,
    base: &Scalar,
    budget: usize,
) -> Result<Vec<(crate::perm::Symbol, BigUint, Scalar)>> {
    let inner = chain.state(n_k);
    let window_len = chain.state(n_plus).total_len().clone();
    let mut out = Vec::new();
    let mut u = base.clone();
    let mut offset = BigUint::zero();
    for _ in 0..budget {
        let sym = inner.symbol_at(&u)?;
        out.push((sym, offset.clone(), u.clone()));
        offset += &chain.heights(n_k)[sym.0 as usize];
        u = inner.evaluate(&u)?;
        if u.cmp(&window_len) == Ordering::Less {
            return Ok(out);
        }
    }
    Err(Error::OrbitSearchOverflow(budget))
}

/// Runs the bounded-times construction at one certificate time: locates the
/// point in the towers of the time and of the window end, finds the
/// neighbouring window towers on its orbit, and picks in each the floor of
/// a subtower based in the point's own interval. Both returns land on the
/// floor of `x`, and the Birkhoff sums decompose into at most `2K + 1`
/// special sums of the certificate level.
pub fn bounded_times<M: IntervalMap>(
    chain: &InductionChain<M>,
    obs: &Observable,
    x: &Scalar,
    level_index: usize,
    data: &BcTimeData,
) -> Result<BoundedTimesWitness> {
    let n_k = data.n_k;
    let n_plus = data.n_plus;
    assert!(n_k < n_plus && n_plus <= chain.depth());
    // Positivity of the window block is what guarantees the construction.
    let block = accumulate_chain(chain, n_k, n_plus);
    if !block.is_positive() {
        return Err(Error::NotBcTime(n_k));
    }
    let budget = 2 * (data.k_bound as usize) * chain.initial().perm().len() + 8;

    let loc_k = locate(chain, n_k, x)?;
    let loc_p = locate(chain, n_plus, x)?;
    let window_map = chain.state(n_plus);
    let alpha = loc_k.symbol;

    // Neighbouring window towers along the orbit of x.
    let b = &loc_p.base_point;
    let b_next = window_map.evaluate(b)?;
    let b_prev = window_map.evaluate_inverse(b)?;
    let beta_plus = window_map.symbol_at(&b_next)?;
    let beta_minus = window_map.symbol_at(&b_prev)?;

    // Forward: first subtower of alpha inside the next window tower.
    let seq_fwd = subtower_sequence(chain, n_k, n_plus, &b_next, budget)?;
    let (f_plus, z_plus) = seq_fwd
        .iter()
        .find(|(s, _, _)| *s == alpha)
        .map(|(_, off, pt)| (off.clone(), pt.clone()))
        .expect("positive block guarantees an alpha subtower");
    // Steps from x to the base of the next window tower, then up to the
    // chosen floor.
    let q_beta = &chain.heights(n_plus)[loc_p.symbol.0 as usize];
    let j_forward: BigUint = (q_beta - &loc_p.floor) + &f_plus;
    let m_forward = BigInt::from(j_forward.clone()) + BigInt::from(loc_k.floor.clone());

    // Backward: first subtower of alpha inside the previous window tower.
    let seq_bwd = subtower_sequence(chain, n_k, n_plus, &b_prev, budget)?;
    let (f_minus, z_minus) = seq_bwd
        .iter()
        .find(|(s, _, _)| *s == alpha)
        .map(|(_, off, pt)| (off.clone(), pt.clone()))
        .expect("positive block guarantees an alpha subtower");
    let q_bminus = &chain.heights(n_plus)[beta_minus.0 as usize];
    // x is j floors above its window base; the previous tower's top floor
    // is one step below that base.
    let j_backward: BigUint = (&loc_p.floor + BigUint::from(1u32)) + (q_bminus - BigUint::from(1u32) - &f_minus);
    let m_backward = BigInt::from(loc_k.floor.clone()) - BigInt::from(j_backward.clone());

    // Birkhoff sums by decomposition into special sums of level n_k.
    let sbs = special_birkhoff_sum(chain, obs, n_k);
    let inner = chain.state(n_k);
    let walk_sum = |from: &Scalar, to: &Scalar| -> Result<(Scalar, usize)> {
        let mut acc = Scalar::zero();
        let mut u = from.clone();
        for step in 0..budget {
            if scalars_equal(&u, to) {
                return Ok((acc, step));
            }
            let sym = inner.symbol_at(&u)?;
            acc = acc.add(&sbs[sym.0 as usize]);
            u = inner.evaluate(&u)?;
        }
        Err(Error::OrbitSearchOverflow(budget))
    };
    // Forward: x's own tower contributes one full special sum, then the
    // induced orbit from the exit point to the landing base.
    let y0 = &loc_k.base_point;
    let exit = inner.evaluate(y0)?;
    let (mid_fwd, terms_fwd) = walk_sum(&exit, &z_plus)?;
    let sum_forward = sbs[alpha.0 as usize].clone().add(&mid_fwd);
    // Backward: same decomposition from the landing point's exit to x's base.
    let exit_b = inner.evaluate(&z_minus)?;
    let (mid_bwd, terms_bwd) = walk_sum(&exit_b, y0)?;
    let sum_backward = sbs[alpha.0 as usize].clone().add(&mid_bwd).neg();

    // Verify the membership assertions by transporting the landing bases
    // through the floor map of x and re-locating.
    let base_start = chain.state(n_k).interval_start(alpha).clone();
    let w_plus = loc_k.transport(x, &base_start, &z_plus);
    let w_minus = loc_k.transport(x, &base_start, &z_minus);
    let mut membership = true;
    for w in [&w_plus, &w_minus] {
        let loc_w = locate(chain, n_k, w)?;
        membership &= loc_w.symbol == alpha && loc_w.floor == loc_k.floor;
    }
    membership &= w_plus.cmp(&loc_k.cell_lo) != Ordering::Less
        && w_plus.cmp(&loc_k.cell_hi) == Ordering::Less;

    let bound = (2.0 * data.k_bound as f64 + 1.0) * data.v_bound * obs.l2_norm();
    Ok(BoundedTimesWitness {
        x: x.clone(),
        level_index,
        m_forward,
        m_backward,
        alpha,
        floor: loc_k.floor.clone(),
        beta: loc_p.symbol,
        beta_minus,
        beta_plus,
        j_forward,
        j_backward,
        sum_forward,
        sum_backward,
        bound,
        special_terms_forward: terms_fwd + 1,
        special_terms_backward: terms_bwd + 1,
        membership_verified: membership,
    })
}

/// Partial sums of `e^{S_n f}` along both orbit directions.
#[derive(Clone, Debug)]
pub struct WanderingSeries {
    /// `(n, summand, partial_sum)` for n = 1..N.
    pub forward: Vec<(i64, f64, f64)>,
    /// `(n, summand, partial_sum)` for n = 0..-N.
    pub backward: Vec<(i64, f64, f64)>,
    /// Both branches show decaying summands over the tested range.
    pub wandering_candidate: bool,
}

/// Scans both series at `x` for `steps` terms each. Divergence of either
/// branch rules out a wandering interval through `x`; tiny decaying
/// summands on both branches only flag a candidate, never a proof.
pub fn wandering_series<M: IntervalMap>(
    map: &M,
    obs: &Observable,
    x: &Scalar,
    steps: usize,
    prec: u32,
) -> Result<WanderingSeries> {
    let mut forward = Vec::with_capacity(steps);
    let mut backward = Vec::with_capacity(steps + 1);
    let mut s = RealHp::zero(prec);
    let mut partial = RealHp::zero(prec);
    let mut u = x.clone();
    for n in 1..=steps {
        s = s.add(&obs.value_at(map, &u)?.to_real(prec));
        u = map.evaluate(&u)?;
        let term = s.exp();
        partial = partial.add(&term);
        forward.push((n as i64, term.to_f64(), partial.to_f64()));
    }
    let mut s = RealHp::zero(prec);
    let mut partial = RealHp::one(prec);
    backward.push((0, 1.0, 1.0));
    let mut u = x.clone();
    for n in 1..=steps {
        u = map.evaluate_inverse(&u)?;
        s = s.sub(&obs.value_at(map, &u)?.to_real(prec));
        let term = s.exp();
        partial = partial.add(&term);
        backward.push((-(n as i64), term.to_f64(), partial.to_f64()));
    }
    let decays = |branch: &[(i64, f64, f64)]| -> bool {
        if branch.len() < 50 {
            return false;
        }
        let tail = &branch[branch.len() - 50..];
        let all_tiny = tail.iter().all(|(_, t, _)| *t < 1e-30);
        let first = tail.first().unwrap().1.max(1e-300);
        let last = tail.last().unwrap().1;
        all_tiny && last < first * 1e-3
    };
    let wandering_candidate = decays(&forward) && decays(&backward);
    Ok(WanderingSeries {
        forward,
        backward,
        wandering_candidate,
    })
}
