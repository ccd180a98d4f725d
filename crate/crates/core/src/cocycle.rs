//! Cocycle accumulation, dynamical partitions, and tower bookkeeping.
//!
//! The incidence matrix `Z(m, n)` accumulated here follows the visit-count
//! convention: its `(a, b)` entry is the number of times the level-`m`
//! induced orbit of a point in the level-`n` interval of `a` visits the
//! level-`m` interval of `b` before returning. Consequently
//! `q(n) = Z(0, n) * 1`, log-slopes propagate by `w(n) = Z(m, n) w(m)`, and
//! composition reads `Z(m, n) = Z(k, n) Z(m, k)`. The length-side product
//! `loop_matrix` is its transpose accumulated in the opposite order.
//!
//! Floor indices and return times grow exponentially with the level, so
//! orbit navigation works in tower coordinates: a point is addressed by
//! (symbol, floor, base representative) and moved with the induced maps,
//! never by stepping the original map floor by floor.

use crate::error::{Error, Result};
use crate::iet::IntervalMap;
use crate::intmat::IntMatrix;
use crate::perm::{RvType, Symbol};
use crate::rauzy::{InductionChain, RauzyMove};
use crate::scalar::{RealHp, Scalar};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

/// Accumulated incidence matrix `Z(m, n)` over the given moves.
pub fn accumulate(moves: &[RauzyMove], m: usize, n: usize) -> IntMatrix {
    assert!(m <= n && n <= moves.len(), "invalid accumulation window");
    let d = moves
        .first()
        .map(|mv| mv.source.len())
        .unwrap_or_else(|| panic!("empty move list needs an explicit dimension"));
    let mut z = IntMatrix::identity(d);
    for mv in &moves[m..n] {
        // One height step: Id + E(loser, winner), applied on the left.
        z = IntMatrix::elementary(d, mv.loser.0 as usize, mv.winner.0 as usize).mul(&z);
    }
    z
}

/// `Z(m, n)` for a chain, defined also for empty windows.
pub fn accumulate_chain<M: IntervalMap>(
    chain: &InductionChain<M>,
    m: usize,
    n: usize,
) -> IntMatrix {
    let d = chain.initial().perm().len();
    if m == n {
        return IntMatrix::identity(d);
    }
    accumulate(chain.moves(), m, n)
}

/// Return-time vector of level `n`, indexed by symbol.
pub fn heights_at<M: IntervalMap>(chain: &InductionChain<M>, n: usize) -> Vec<BigUint> {
    chain.heights(n).to_vec()
}

/// Length vector of the level-`n` induced map, indexed by symbol.
pub fn lengths_at<M: IntervalMap>(chain: &InductionChain<M>, n: usize) -> Vec<Scalar> {
    chain.state(n).lengths().to_vec()
}

/// Total mass `sum_a q(n)_a * lambda(n)_a`; equals the domain length.
pub fn tower_mass<M: IntervalMap>(chain: &InductionChain<M>, n: usize) -> Scalar {
    let q = chain.heights(n);
    let l = chain.state(n).lengths();
    let mut acc = Scalar::zero();
    for (qa, la) in q.iter().zip(l) {
        acc = acc.add(&la.mul(&Scalar::Rat(num_rational::BigRational::from(
            num_bigint::BigInt::from(qa.clone()),
        ))));
    }
    acc
}

/// Number of level-`m` subtowers stacked into the level-`n` tower of `a`.
pub fn subtower_count<M: IntervalMap>(
    chain: &InductionChain<M>,
    m: usize,
    n: usize,
    a: Symbol,
) -> BigUint {
    let z = accumulate_chain(chain, m, n);
    z.row_sum(a.0 as usize)
        .to_biguint()
        .expect("visit counts are nonnegative")
}

/// One cell of a dynamical partition.
#[derive(Clone, Debug)]
pub struct Cell {
    pub symbol: Symbol,
    pub floor: u64,
    pub lo: Scalar,
    pub hi: Scalar,
}

/// The level-`n` dynamical partition: base intervals, heights, and floors.
pub struct TowerPartition {
    pub level: usize,
    /// Base interval of each symbol's tower, by symbol index.
    pub bases: Vec<(Scalar, Scalar)>,
    pub heights: Vec<BigUint>,
}

impl TowerPartition {
    pub fn total_floors(&self) -> BigUint {
        self.heights.iter().fold(BigUint::zero(), |a, b| a + b)
    }
}

pub fn dynamical_partition<M: IntervalMap>(
    chain: &InductionChain<M>,
    n: usize,
) -> TowerPartition {
    let state = chain.state(n);
    let d = state.perm().len();
    let bases = (0..d)
        .map(|i| {
            let s = Symbol(i as u8);
            let lo = state.interval_start(s).clone();
            let hi = lo.add(&state.lengths()[i]);
            (lo, hi)
        })
        .collect();
    TowerPartition {
        level: n,
        bases,
        heights: chain.heights(n).to_vec(),
    }
}

/// Walks every floor of the level-`n` towers in orbit order. Fails if the
/// total floor count exceeds `cap`.
pub fn enumerate_cells<M: IntervalMap>(
    chain: &InductionChain<M>,
    n: usize,
    cap: u64,
) -> Result<Vec<Cell>> {
    let part = dynamical_partition(chain, n);
    let total = part
        .total_floors()
        .to_u64()
        .filter(|t| *t <= cap)
        .ok_or_else(|| Error::OrbitSearchOverflow(cap as usize))?;
    let map = chain.initial();
    let mut cells = Vec::with_capacity(total as usize);
    let half = Scalar::ratio(1, 2);
    for (i, (lo0, hi0)) in part.bases.iter().enumerate() {
        let s = Symbol(i as u8);
        let q = part.heights[i].to_u64().unwrap();
        // Walk the floor midpoints: cell endpoints can land exactly on
        // discontinuities, midpoints stay a half-width away from them.
        let mut width = hi0.sub(lo0);
        let mut mid = lo0.add(&width.mul(&half));
        for floor in 0..q {
            let h = width.mul(&half);
            cells.push(Cell {
                symbol: s,
                floor,
                lo: mid.sub(&h),
                hi: mid.add(&h),
            });
            if floor + 1 < q {
                let branch = map.symbol_at(&mid)?;
                mid = map.evaluate(&mid)?;
                if let Some(w) = map.log_slope(branch) {
                    width = width.mul(&Scalar::Real(w.exp()));
                }
            }
        }
    }
    Ok(cells)
}

/// Tower address of a point with enough affine data to transport its cell.
#[derive(Clone, Debug)]
pub struct Location {
    pub symbol: Symbol,
    pub floor: BigUint,
    /// The base representative `y` with `T^floor(y) = x`.
    pub base_point: Scalar,
    /// Cell containing `x`: the image of the base interval.
    pub cell_lo: Scalar,
    pub cell_hi: Scalar,
    /// Accumulated log-slope of `T^floor` on the base interval (`None`
    /// for a translation).
    pub climb_log_slope: Option<RealHp>,
}

impl Location {
    /// Image of a base-interval point under the same floor map `T^floor`.
    pub fn transport(&self, x: &Scalar, base_start: &Scalar, u: &Scalar) -> Scalar {
        match &self.climb_log_slope {
            None => {
                let _ = base_start;
                x.add(&u.sub(&self.base_point))
            }
            Some(acc) => {
                let slope = Scalar::Real(acc.exp());
                x.add(&u.sub(&self.base_point).mul(&slope))
            }
        }
    }
}

/// Locates `x` in the level-`n` partition by ascending the chain one step
/// at a time; each step costs O(1) scalar operations plus at most one
/// inverse evaluation of an induced map.
pub fn locate<M: IntervalMap>(chain: &InductionChain<M>, n: usize, x: &Scalar) -> Result<Location> {
    let base = chain.initial();
    let mut sym = base.symbol_at(x)?;
    let mut floor = BigUint::zero();
    let mut y = x.clone();
    let mut log_slope: Option<RealHp> = None;
    for level in 0..n {
        let mv = chain.move_at(level);
        let state = chain.state(level);
        let next = chain.state(level + 1);
        let w = mv.winner;
        let l = mv.loser;
        if sym != w && sym != l {
            continue;
        }
        let q = chain.heights(level);
        match mv.rv_type {
            RvType::Top => {
                if sym == l {
                    // The loser tower is the lower part of the new one.
                    continue;
                }
                // sym == w: does y stay in the trimmed winner interval?
                let start = state.interval_start(w).clone();
                let new_len = &next.lengths()[w.0 as usize];
                let keep_end = start.add(new_len);
                if y.cmp(&keep_end) == Ordering::Less {
                    continue;
                }
                // y sits in the cut piece, the image of the loser interval:
                // the floor joins the top section of the new loser tower.
                let u = state.evaluate_inverse(&y)?;
                debug_assert_eq!(state.symbol_at(&u)?, l);
                if let Some(wslope) = state.log_slope(l) {
                    log_slope = Some(match log_slope {
                        None => wslope.clone(),
                        Some(acc) => acc.add(wslope),
                    });
                }
                floor += &q[l.0 as usize];
                sym = l;
                y = u;
            }
            RvType::Bottom => {
                if sym == w {
                    let start = state.interval_start(w).clone();
                    let new_len = &next.lengths()[w.0 as usize];
                    let keep_end = start.add(new_len);
                    if y.cmp(&keep_end) == Ordering::Less {
                        continue;
                    }
                    // Right piece of the winner interval is the new loser base.
                    sym = l;
                    continue;
                }
                // sym == l: the old loser tower is stacked on top of the
                // winner part; pull the base back through the induced map.
                let u = state.evaluate_inverse(&y)?;
                debug_assert_eq!(state.symbol_at(&u)?, w);
                if let Some(wslope) = state.log_slope(w) {
                    log_slope = Some(match log_slope {
                        None => wslope.clone(),
                        Some(acc) => acc.add(wslope),
                    });
                }
                floor += &q[w.0 as usize];
                y = u;
            }
        }
    }
    let state = chain.state(n);
    let base_start = state.interval_start(sym).clone();
    let width = state.lengths()[sym.0 as usize].clone();
    let (cell_lo, cell_hi) = match &log_slope {
        None => {
            let lo = x.sub(&y.sub(&base_start));
            let hi = lo.add(&width);
            (lo, hi)
        }
        Some(acc) => {
            let slope = Scalar::Real(acc.exp());
            let lo = x.sub(&y.sub(&base_start).mul(&slope));
            let hi = lo.add(&width.mul(&slope));
            (lo, hi)
        }
    };
    debug_assert!(floor.cmp(&chain.heights(n)[sym.0 as usize]) == Ordering::Less);
    Ok(Location {
        symbol: sym,
        floor,
        base_point: y,
        cell_lo,
        cell_hi,
        climb_log_slope: log_slope,
    })
}

/// Stacking of the level-`level+1` tower of `sym` out of level-`level`
/// towers: either it is the same tower (possibly with trimmed floors), or
/// the concatenation of two level-`level` towers.
pub fn stacking<M: IntervalMap>(
    chain: &InductionChain<M>,
    level: usize,
    sym: Symbol,
) -> Option<(Symbol, Symbol)> {
    let mv = chain.move_at(level);
    if sym != mv.loser {
        return None;
    }
    match mv.rv_type {
        RvType::Top => Some((mv.loser, mv.winner)),
        RvType::Bottom => Some((mv.winner, mv.loser)),
    }
}

/// Per-symbol totals of a floor-indexed quantity that adds along stacking,
/// seeded with one value per symbol at level 0. Entry `[n][s]` is the sum
/// over all floors of the level-`n` tower of `s`.
pub fn propagate_tower_sums<M: IntervalMap>(
    chain: &InductionChain<M>,
    seed: &[Scalar],
    n: usize,
) -> Vec<Vec<Scalar>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(seed.to_vec());
    for level in 0..n {
        let mv = chain.move_at(level);
        let mut v = out[level].clone();
        let add = v[mv.winner.0 as usize].clone();
        v[mv.loser.0 as usize] = v[mv.loser.0 as usize].add(&add);
        out.push(v);
    }
    out
}

/// Sum of the first `r` floor values of the level-`n` tower of `sym`,
/// where floor values are the level-0 seed values of the floor positions.
/// `sums` must come from `propagate_tower_sums` with the same seed.
pub fn tower_prefix_sum<M: IntervalMap>(
    chain: &InductionChain<M>,
    sums: &[Vec<Scalar>],
    n: usize,
    sym: Symbol,
    r: &BigUint,
) -> Scalar {
    if r.is_zero() {
        return Scalar::zero();
    }
    let q = &chain.heights(n)[sym.0 as usize];
    assert!(r <= q, "prefix exceeds tower height");
    if r == q {
        return sums[n][sym.0 as usize].clone();
    }
    if n == 0 {
        // Height 1 and r == 0 handled above.
        return sums[0][sym.0 as usize].clone();
    }
    match stacking(chain, n - 1, sym) {
        None => tower_prefix_sum(chain, sums, n - 1, sym, r),
        Some((first, second)) => {
            let h1 = &chain.heights(n - 1)[first.0 as usize];
            if r <= h1 {
                tower_prefix_sum(chain, sums, n - 1, first, r)
            } else {
                let rest = r - h1;
                sums[n - 1][first.0 as usize]
                    .add(&tower_prefix_sum(chain, sums, n - 1, second, &rest))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Iet;
    use crate::perm::make_permutation;
    use crate::rauzy::InductionChain;
    use num_bigint::BigInt;

    fn golden_chain(n: usize) -> InductionChain<Iet> {
        use crate::scalar::NumberField;
        use num_rational::BigRational;
        let rat = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let f = NumberField::new(vec![rat(-1, 1), rat(-1, 1), rat(1, 1)], rat(1, 1), rat(2, 1))
            .unwrap();
        let phi = f.theta();
        let one = f.from_rational(rat(1, 1));
        let two = f.from_rational(rat(2, 1));
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let iet = Iet::new(
            p,
            vec![
                Scalar::Alg(phi.sub(&one)),
                Scalar::Alg(two.sub(&phi)),
            ],
        )
        .unwrap();
        InductionChain::new(iet).extended_to(n).unwrap()
    }

    #[test]
    fn accumulate_identity_and_composition() {
        let chain = golden_chain(12);
        let d = 2;
        assert_eq!(accumulate_chain(&chain, 5, 5), IntMatrix::identity(d));
        let z = accumulate_chain(&chain, 0, 12);
        for k in [3, 7, 9] {
            let a = accumulate_chain(&chain, k, 12);
            let b = accumulate_chain(&chain, 0, k);
            assert_eq!(a.mul(&b), z, "split at {k}");
        }
    }

    #[test]
    fn golden_two_step_block() {
        let chain = golden_chain(2);
        // Height accumulation over the first two steps of the golden chain.
        let z = accumulate_chain(&chain, 0, 2);
        assert_eq!(z, IntMatrix::from_rows(vec![vec![2, 1], vec![1, 1]]));
        // Transpose relation with the length-side product.
        let m = crate::rauzy::loop_matrix(&chain.path());
        assert_eq!(z.transpose(), m);
    }

    #[test]
    fn heights_match_accumulation() {
        let chain = golden_chain(15);
        for n in [0, 1, 7, 15] {
            let z = accumulate_chain(&chain, 0, n);
            let ones = vec![BigInt::from(1); 2];
            let q = z.mul_vec(&ones);
            let expect = heights_at(&chain, n);
            for i in 0..2 {
                assert_eq!(q[i], BigInt::from(expect[i].clone()), "level {n} sym {i}");
            }
        }
    }

    #[test]
    fn mass_identity() {
        let chain = golden_chain(15);
        let total = chain.initial().total_len().clone();
        for n in [0, 3, 9, 15] {
            let mass = tower_mass(&chain, n);
            assert_eq!(mass.cmp(&total), Ordering::Equal, "level {n}");
        }
    }

    #[test]
    fn partition_level_zero() {
        let chain = golden_chain(1);
        let part = dynamical_partition(&chain, 0);
        assert_eq!(part.level, 0);
        assert!(part.heights.iter().all(|h| h == &BigUint::from(1u32)));
        let cells = enumerate_cells(&chain, 0, 100).unwrap();
        assert_eq!(cells.len(), 2);
    }

    #[test]
    fn partition_cells_disjoint_and_cover() {
        let chain = golden_chain(7);
        let mut cells = enumerate_cells(&chain, 7, 10_000).unwrap();
        cells.sort_by(|a, b| a.lo.cmp(&b.lo));
        // Consecutive cells tile the domain exactly.
        let total = chain.initial().total_len();
        assert!(cells[0].lo.is_zero());
        for w in cells.windows(2) {
            assert_eq!(w[0].hi.cmp(&w[1].lo), Ordering::Equal);
        }
        assert_eq!(cells.last().unwrap().hi.cmp(total), Ordering::Equal);
    }

    #[test]
    fn subtower_counts_decompose() {
        let chain = golden_chain(9);
        // Count level-m subtowers by comparing with the heights identity:
        // q(n) = Z(m,n) q(m).
        for (m, n) in [(0usize, 4usize), (2, 7), (3, 9)] {
            let z = accumulate_chain(&chain, m, n);
            let qm: Vec<BigInt> = chain.heights(m).iter().map(|b| BigInt::from(b.clone())).collect();
            let qn = z.mul_vec(&qm);
            for i in 0..2 {
                assert_eq!(qn[i], BigInt::from(chain.heights(n)[i].clone()));
            }
            // Row sums count the stacked subtowers.
            let total: BigUint = subtower_count(&chain, m, n, Symbol(0));
            assert!(total >= BigUint::from(1u32));
        }
    }

    #[test]
    fn locate_base_and_first_floor() {
        let chain = golden_chain(6);
        let n = 6;
        let state = chain.state(n);
        // A point in the base of the first tower has floor 0.
        let x = state.interval_start(Symbol(0)).clone();
        let loc = locate(&chain, n, &x).unwrap();
        assert_eq!(loc.symbol, Symbol(0));
        assert!(loc.floor.is_zero());
        // Its image lies on floor 1 of the same tower.
        let tx = chain.initial().evaluate(&x).unwrap();
        let loc = locate(&chain, n, &tx).unwrap();
        assert_eq!(loc.symbol, Symbol(0));
        assert_eq!(loc.floor, BigUint::from(1u32));
    }

    #[test]
    fn locate_agrees_with_backward_iteration() {
        let chain = golden_chain(8);
        let n = 8;
        let map = chain.initial().clone();
        for k in 1..24 {
            let x = Scalar::ratio(k, 25);
            let loc = locate(&chain, n, &x).unwrap();
            // Walk back floor steps; must land on the recorded base point.
            let floors = loc.floor.to_u64().unwrap();
            let mut u = x.clone();
            for _ in 0..floors {
                u = map.evaluate_inverse(&u).unwrap();
            }
            assert_eq!(u.cmp(&loc.base_point), Ordering::Equal, "x = {k}/25");
            // The base point lies in the located base interval.
            let state = chain.state(n);
            let lo = state.interval_start(loc.symbol);
            let hi = lo.add(&state.lengths()[loc.symbol.0 as usize]);
            assert!(u.cmp(lo) != Ordering::Less && u.cmp(&hi) == Ordering::Less);
            // Cell endpoints bracket x.
            assert!(loc.cell_lo.cmp(&x) != Ordering::Greater);
            assert!(x.cmp(&loc.cell_hi) == Ordering::Less);
        }
    }

    #[test]
    fn prefix_sums_match_direct_walk() {
        let chain = golden_chain(9);
        let seed = vec![Scalar::from_int(1), Scalar::from_int(-2)];
        let sums = propagate_tower_sums(&chain, &seed, 9);
        let map = chain.initial().clone();
        let n = 9;
        for si in 0..2u8 {
            let sym = Symbol(si);
            let q = chain.heights(n)[si as usize].to_u64().unwrap();
            // Walk the tower directly, accumulating seed values by symbol.
            let mut acc = Scalar::zero();
            let mut u = chain.state(n).interval_start(sym).clone();
            for r in 0..=q {
                let expect = tower_prefix_sum(&chain, &sums, n, sym, &BigUint::from(r));
                assert_eq!(acc.cmp(&expect), Ordering::Equal, "sym {si} r {r}");
                if r < q {
                    let branch = map.symbol_at(&u).unwrap();
                    acc = acc.add(&seed[branch.0 as usize]);
                    u = map.evaluate(&u).unwrap();
                }
            }
        }
    }
}
