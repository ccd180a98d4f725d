//! Forward and inverse Rauzy-Veech induction and the Zorich acceleration.
//!
//! Induction is non-normalized: the induced map acts on a shrinking prefix
//! of the original domain. With exact scalars a tie of the two candidate
//! intervals is detected exactly; with floats a gap below the guard aborts
//! the run instead of guessing the type.

use crate::error::{Error, Result};
use crate::iet::IntervalMap;
use crate::intmat::IntMatrix;
use crate::perm::{PermutationPair, RvType, Symbol};
use crate::scalar::Scalar;
use num_bigint::BigUint;
use std::cmp::Ordering;
use std::collections::HashMap;

/// Default tie guard (bits) for float-valued induction.
pub const DEFAULT_GUARD_BITS: u32 = 80;

/// One step of induction: its type, the symbols that won and lost, and the
/// permutations before and after.
#[derive(Clone, Debug)]
pub struct RauzyMove {
    pub rv_type: RvType,
    pub winner: Symbol,
    pub loser: Symbol,
    pub source: PermutationPair,
    pub target: PermutationPair,
}

/// Exact or guarded tie met during induction.
#[derive(Clone, Debug)]
pub struct ConnectionReport {
    pub step: usize,
    pub top_length: String,
    pub bottom_length: String,
}

impl ConnectionReport {
    pub fn into_error(self) -> Error {
        Error::Connection {
            step: self.step,
            top: self.top_length,
            bottom: self.bottom_length,
        }
    }
}

/// Decides the induction type: `Top` when the last top interval is strictly
/// longer than the incoming interval, `Bottom` otherwise.
pub fn rv_type<M: IntervalMap>(map: &M, guard_bits: u32) -> Result<RvType> {
    let (top, bottom) = map.rv_candidates();
    match top.cmp_guarded(&bottom, guard_bits) {
        Ok(Ordering::Greater) => Ok(RvType::Top),
        Ok(Ordering::Less) => Ok(RvType::Bottom),
        Ok(Ordering::Equal) | Err(Error::PrecisionExhausted(_)) => Err(Error::Connection {
            step: 0,
            top: top.display_string(),
            bottom: bottom.display_string(),
        }),
        Err(e) => Err(e),
    }
}

/// One step of Rauzy-Veech induction.
pub fn rv_step<M: IntervalMap>(map: &M, guard_bits: u32) -> Result<(M, RauzyMove)> {
    let t = rv_type(map, guard_bits)?;
    let (winner, loser) = map.perm().winner_loser(t);
    let next = map.rv_apply(t);
    let mv = RauzyMove {
        rv_type: t,
        winner,
        loser,
        source: map.perm().clone(),
        target: next.perm().clone(),
    };
    Ok((next, mv))
}

/// Undoes `mv`; the forward step of the result reproduces `(map, mv)`.
pub fn inverse_rv_step<M: IntervalMap>(map: &M, mv: &RauzyMove) -> Result<M> {
    if mv.target != *map.perm() {
        return Err(Error::InconsistentMove);
    }
    map.inverse_rv(mv.rv_type, &mv.source)
}

/// One Zorich step: the maximal run of constant-type induction steps.
pub fn zorich_step<M: IntervalMap>(map: &M, guard_bits: u32) -> Result<(M, usize, Vec<RauzyMove>)> {
    let t0 = rv_type(map, guard_bits)?;
    let mut moves = Vec::new();
    let mut cur = map.clone();
    loop {
        let (next, mv) = rv_step(&cur, guard_bits).map_err(|e| shift_step(e, moves.len()))?;
        moves.push(mv);
        cur = next;
        match rv_type(&cur, guard_bits) {
            Ok(t) if t == t0 => continue,
            _ => break,
        }
    }
    let z = moves.len();
    Ok((cur, z, moves))
}

fn shift_step(e: Error, by: usize) -> Error {
    match e {
        Error::Connection { step, top, bottom } => Error::Connection {
            step: step + by,
            top,
            bottom,
        },
        other => other,
    }
}

/// A finite path in the Rauzy graph.
#[derive(Clone, Debug)]
pub struct RauzyPath {
    pub start: PermutationPair,
    pub moves: Vec<RauzyMove>,
}

impl RauzyPath {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn end(&self) -> &PermutationPair {
        self.moves
            .last()
            .map(|m| &m.target)
            .unwrap_or(&self.start)
    }

    /// Consecutive moves must compose.
    pub fn validate(&self) -> Result<()> {
        let mut cur = &self.start;
        for (i, m) in self.moves.iter().enumerate() {
            if &m.source != cur {
                return Err(Error::BadSpec(format!("move {i} does not compose")));
            }
            cur = &m.target;
        }
        Ok(())
    }

    /// Boundaries of the maximal constant-type runs: `0 = b_0 < b_1 < ...`,
    /// ending at the path length.
    pub fn zorich_boundaries(&self) -> Vec<usize> {
        let mut out = vec![0];
        for i in 1..self.moves.len() {
            if self.moves[i].rv_type != self.moves[i - 1].rv_type {
                out.push(i);
            }
        }
        if !self.moves.is_empty() {
            out.push(self.moves.len());
        }
        out
    }

    /// Lengths of the Zorich blocks.
    pub fn zorich_block_lengths(&self) -> Vec<usize> {
        let b = self.zorich_boundaries();
        b.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// True if every symbol wins at least once in every window of
    /// `window` consecutive moves (and in the final partial window).
    pub fn winners_complete(&self, window: usize) -> bool {
        let d = self.start.len();
        if window == 0 || self.moves.len() < window {
            return false;
        }
        let mut start = 0;
        while start < self.moves.len() {
            let end = (start + window).min(self.moves.len());
            let mut seen = vec![false; d];
            for m in &self.moves[start..end] {
                seen[m.winner.0 as usize] = true;
            }
            if !seen.iter().all(|s| *s) {
                return false;
            }
            if end == self.moves.len() {
                break;
            }
            start += 1;
        }
        true
    }

    /// Smallest window for which `winners_complete` holds, if any.
    pub fn completeness_window(&self) -> Option<usize> {
        (1..=self.moves.len()).find(|w| self.winners_complete(*w))
    }

    pub fn types(&self) -> Vec<RvType> {
        self.moves.iter().map(|m| m.rv_type).collect()
    }
}

/// The first `n` moves of the induction path of `map`.
pub fn rotation_number_prefix<M: IntervalMap>(
    map: &M,
    n: usize,
    guard_bits: u32,
) -> Result<RauzyPath> {
    let chain = InductionChain::with_guard(map.clone(), guard_bits).extended_to(n)?;
    Ok(chain.path())
}

/// Induction orbit of a single map, with per-level derived data.
///
/// `states[k]` is the induced map after `k` steps; `heights[k]` its vector
/// of first-return times to the level-`k` domain, indexed by symbol.
pub struct InductionChain<M> {
    states: Vec<M>,
    moves: Vec<RauzyMove>,
    heights: Vec<Vec<BigUint>>,
    guard_bits: u32,
    connection: Option<ConnectionReport>,
}

impl<M: IntervalMap> InductionChain<M> {
    pub fn new(map: M) -> Self {
        Self::with_guard(map, DEFAULT_GUARD_BITS)
    }

    pub fn with_guard(map: M, guard_bits: u32) -> Self {
        let d = map.perm().len();
        InductionChain {
            states: vec![map],
            moves: Vec::new(),
            heights: vec![vec![BigUint::from(1u32); d]],
            guard_bits,
            connection: None,
        }
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    pub fn depth(&self) -> usize {
        self.moves.len()
    }

    /// Extends the chain to `n` steps, or returns the connection that
    /// stops it earlier.
    pub fn ensure_depth(&mut self, n: usize) -> Result<()> {
        while self.moves.len() < n {
            if let Some(c) = &self.connection {
                return Err(c.clone().into_error());
            }
            let cur = self.states.last().unwrap();
            match rv_step(cur, self.guard_bits) {
                Ok((next, mv)) => {
                    let mut q = self.heights.last().unwrap().clone();
                    let qw = q[mv.winner.0 as usize].clone();
                    q[mv.loser.0 as usize] += qw;
                    self.heights.push(q);
                    self.states.push(next);
                    self.moves.push(mv);
                }
                Err(Error::Connection { top, bottom, .. }) => {
                    let report = ConnectionReport {
                        step: self.moves.len(),
                        top_length: top,
                        bottom_length: bottom,
                    };
                    self.connection = Some(report.clone());
                    return Err(report.into_error());
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    pub fn extended_to(mut self, n: usize) -> Result<Self> {
        self.ensure_depth(n)?;
        Ok(self)
    }

    /// Extends until `n_blocks` Zorich steps have completed; returns the
    /// move indices of the first `n_blocks + 1` block boundaries, so the
    /// k-th entry is the number of moves in the first k blocks.
    pub fn ensure_zorich_depth(&mut self, n_blocks: usize) -> Result<Vec<usize>> {
        loop {
            let bounds = self.path().zorich_boundaries();
            // The final run is confirmed maximal only once a move of the
            // other type follows it, hence the extra boundary.
            if bounds.len() >= n_blocks + 2 {
                return Ok(bounds[..=n_blocks].to_vec());
            }
            let cur = self.depth();
            self.ensure_depth(cur + 16)?;
        }
    }

    pub fn state(&self, n: usize) -> &M {
        &self.states[n]
    }

    pub fn initial(&self) -> &M {
        &self.states[0]
    }

    pub fn moves(&self) -> &[RauzyMove] {
        &self.moves
    }

    pub fn move_at(&self, i: usize) -> &RauzyMove {
        &self.moves[i]
    }

    /// Return times of the level-`n` intervals, indexed by symbol.
    pub fn heights(&self, n: usize) -> &[BigUint] {
        &self.heights[n]
    }

    pub fn path(&self) -> RauzyPath {
        RauzyPath {
            start: self.states[0].perm().clone(),
            moves: self.moves.clone(),
        }
    }

    pub fn path_prefix(&self, n: usize) -> RauzyPath {
        RauzyPath {
            start: self.states[0].perm().clone(),
            moves: self.moves[..n].to_vec(),
        }
    }

    /// Left endpoints of the level-`n` intervals, indexed by symbol.
    pub fn base_starts(&self, n: usize) -> Vec<Scalar> {
        let m = &self.states[n];
        let mut by_symbol = vec![Scalar::zero(); m.perm().len()];
        for s in m.perm().alphabet().symbols() {
            by_symbol[s.0 as usize] = m.interval_start(s).clone();
        }
        by_symbol
    }
}

/// Streaming Zorich acceleration; yields one block at a time without
/// retaining the history.
pub struct ZorichStream<M> {
    state: M,
    guard_bits: u32,
    steps_done: usize,
    stopped: Option<Error>,
}

/// A maximal constant-type run, summarized by its winner and the loser
/// multiplicities.
#[derive(Clone, Debug)]
pub struct ZorichBlock {
    pub rv_type: RvType,
    pub winner: Symbol,
    pub losers: Vec<(Symbol, u64)>,
    pub z: u64,
    /// Index of the first move of the block.
    pub start_step: usize,
}

impl ZorichBlock {
    /// The block of the height cocycle: identity plus `count` in
    /// entry (loser, winner) for each loser.
    pub fn height_matrix(&self, dim: usize) -> IntMatrix {
        let mut m = IntMatrix::identity(dim);
        for (l, c) in &self.losers {
            let v = m.get(l.0 as usize, self.winner.0 as usize) + num_bigint::BigInt::from(*c);
            m.set(l.0 as usize, self.winner.0 as usize, v);
        }
        m
    }
}

impl<M: IntervalMap> ZorichStream<M> {
    pub fn new(map: M, guard_bits: u32) -> Self {
        ZorichStream {
            state: map,
            guard_bits,
            steps_done: 0,
            stopped: None,
        }
    }

    pub fn state(&self) -> &M {
        &self.state
    }

    pub fn next_block(&mut self) -> Result<ZorichBlock> {
        if let Some(e) = &self.stopped {
            return Err(e.clone());
        }
        let start_step = self.steps_done;
        match zorich_step(&self.state, self.guard_bits) {
            Ok((next, z, moves)) => {
                let mut losers: Vec<(Symbol, u64)> = Vec::new();
                for mv in &moves {
                    match losers.iter_mut().find(|(s, _)| *s == mv.loser) {
                        Some((_, c)) => *c += 1,
                        None => losers.push((mv.loser, 1)),
                    }
                }
                let block = ZorichBlock {
                    rv_type: moves[0].rv_type,
                    winner: moves[0].winner,
                    losers,
                    z: z as u64,
                    start_step,
                };
                self.state = next;
                self.steps_done += z;
                Ok(block)
            }
            Err(e) => {
                let e = shift_step(e, start_step);
                self.stopped = Some(e.clone());
                Err(e)
            }
        }
    }
}

/// Closure of a permutation pair under both Rauzy operations.
#[derive(Clone, Debug)]
pub struct RauzyClass {
    pub perms: Vec<PermutationPair>,
    /// `(from, type, to)` index triples into `perms`.
    pub edges: Vec<(usize, RvType, usize)>,
}

pub fn rauzy_class(start: &PermutationPair) -> RauzyClass {
    let mut perms = vec![start.clone()];
    let mut index: HashMap<PermutationPair, usize> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    while let Some(i) = frontier.pop() {
        for t in [RvType::Top, RvType::Bottom] {
            let next = perms[i].rauzy_op(t);
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    let j = perms.len();
                    perms.push(next.clone());
                    index.insert(next, j);
                    frontier.push(j);
                    j
                }
            };
            edges.push((i, t, j));
        }
    }
    edges.sort_by_key(|(a, t, b)| (*a, t.index(), *b));
    RauzyClass { perms, edges }
}

/// Ordered product of the one-step length matrices `Id + E(winner, loser)`
/// along the path, earliest step leftmost. The length vectors of the chain
/// satisfy `lambda(m) = M lambda(n)` for the product over steps `m..n`, and
/// the transpose accumulates return times.
pub fn loop_matrix(path: &RauzyPath) -> IntMatrix {
    let d = path.start.len();
    let mut m = IntMatrix::identity(d);
    for mv in &path.moves {
        m = m.mul(&IntMatrix::elementary(
            d,
            mv.winner.0 as usize,
            mv.loser.0 as usize,
        ));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Iet;
    use crate::perm::make_permutation;
    use crate::scalar::{NumberField, Scalar};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;
    use std::sync::Arc;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn rotation_23() -> Iet {
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        Iet::new(p, vec![Scalar::ratio(2, 3), Scalar::ratio(1, 3)]).unwrap()
    }

    pub fn golden_iet() -> Iet {
        let f: Arc<NumberField> =
            NumberField::new(vec![rat(-1, 1), rat(-1, 1), rat(1, 1)], rat(1, 1), rat(2, 1))
                .unwrap();
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
    fn type_convention() {
        // lambda = (2/3, 1/3): last top interval is B with length 1/3, the
        // incoming interval is A with length 2/3, so the type is Bottom.
        let t = rotation_23();
        assert_eq!(rv_type(&t, 80).unwrap(), RvType::Bottom);
        // Exact tie.
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let tie = Iet::new(p, vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)]).unwrap();
        assert!(matches!(rv_type(&tie, 80), Err(Error::Connection { .. })));
    }

    #[test]
    fn golden_type_and_step() {
        // lambda = (phi-1, 2-phi): the incoming interval A is longer, so the
        // first step has type Bottom; the induced lengths are (2phi-3, 2-phi).
        let t = golden_iet();
        assert_eq!(rv_type(&t, 80).unwrap(), RvType::Bottom);
        let (t1, mv) = rv_step(&t, 80).unwrap();
        assert_eq!(mv.winner, Symbol(0));
        assert_eq!(mv.loser, Symbol(1));
        let l = t1.lengths();
        // 2phi - 3 and 2 - phi, checked through the field.
        let phi_minus_1 = t.lengths()[0].clone();
        let expect_a = phi_minus_1.sub(&t.lengths()[1]);
        assert_eq!(l[0].cmp(&expect_a), Ordering::Equal);
        assert_eq!(l[1].cmp(&t.lengths()[1]), Ordering::Equal);
        // Round trip.
        let back = inverse_rv_step(&t1, &mv).unwrap();
        assert_eq!(back.lengths()[0].cmp(&t.lengths()[0]), Ordering::Equal);
        assert_eq!(back.lengths()[1].cmp(&t.lengths()[1]), Ordering::Equal);
    }

    #[test]
    fn rational_rotation_hits_connection() {
        let t = rotation_23();
        let mut chain = InductionChain::new(t);
        let err = chain.ensure_depth(50).unwrap_err();
        match err {
            Error::Connection { step, .. } => assert!(step < 50),
            other => panic!("expected connection, got {other:?}"),
        }
    }

    #[test]
    fn golden_types_alternate() {
        let chain = InductionChain::new(golden_iet()).extended_to(50).unwrap();
        let types = chain.path().types();
        for w in types.windows(2) {
            assert_ne!(w[0], w[1], "types must alternate");
        }
        // All Zorich blocks have length 1.
        assert!(chain.path().zorich_block_lengths().iter().all(|z| *z == 1));
        // Heights are consecutive Fibonacci numbers: after 10 alternating
        // steps q = (144, 89) = (F12, F11).
        let q = chain.heights(10);
        let mut got: Vec<u64> = q.iter().map(|x| x.to_u64().unwrap()).collect();
        got.sort();
        assert_eq!(got, vec![89, 144]);
    }

    #[test]
    fn zorich_runs() {
        // lambda = (4/7, 3/7): length ratio 4/3 = [1; 3], so the first
        // Zorich block has length 1 and the second has length 2 before the
        // connection (rational data ties in finite time).
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let t = Iet::new(p, vec![Scalar::ratio(4, 7), Scalar::ratio(3, 7)]).unwrap();
        let (t1, z1, _) = zorich_step(&t, 80).unwrap();
        assert_eq!(z1, 1);
        let (_t2, z2, _) = zorich_step(&t1, 80).unwrap();
        assert_eq!(z2, 2);
    }

    #[test]
    fn explicit_type_run() {
        // A type run 0,0,1 must produce a first Zorich block of length 2.
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        // ratio lambda_B / lambda_A = [2; ...] gives two Top steps first:
        // take lambda = (2/7, 5/7): top-last B = 5/7 > 2/7 wins twice.
        let t = Iet::new(p, vec![Scalar::ratio(2, 7), Scalar::ratio(5, 7)]).unwrap();
        let (_, z, moves) = zorich_step(&t, 80).unwrap();
        assert_eq!(z, 2);
        assert!(moves.iter().all(|m| m.rv_type == RvType::Top));
    }

    #[test]
    fn empty_and_prefix_paths() {
        let t = golden_iet();
        let p = rotation_number_prefix(&t, 0, 80).unwrap();
        assert!(p.is_empty());
        assert_eq!(loop_matrix(&p), IntMatrix::identity(2));
        let p = rotation_number_prefix(&t, 2, 80).unwrap();
        // Two-step product: (Id + E_AB)(Id + E_BA) = [[2,1],[1,1]].
        let m = loop_matrix(&p);
        assert_eq!(m, IntMatrix::from_rows(vec![vec![2, 1], vec![1, 1]]));
    }

    #[test]
    fn rauzy_class_sizes() {
        let rot = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let c = rauzy_class(&rot);
        assert_eq!(c.perms.len(), 1);
        assert_eq!(c.edges.len(), 2);
        assert!(c.edges.iter().all(|(a, _, b)| a == b));

        let sym3 = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let c = rauzy_class(&sym3);
        assert_eq!(c.perms.len(), 3);
        assert_eq!(c.edges.len(), 6);
    }

    #[test]
    fn one_step_matrices_unimodular() {
        let chain = InductionChain::new(golden_iet()).extended_to(20).unwrap();
        for i in 0..20 {
            let m = loop_matrix(&RauzyPath {
                start: chain.move_at(i).source.clone(),
                moves: vec![chain.move_at(i).clone()],
            });
            assert_eq!(m.det(), BigInt::from(1));
        }
        let m = loop_matrix(&chain.path());
        assert_eq!(m.det(), BigInt::from(1));
        assert!(m.is_nonnegative());
    }

    #[test]
    fn winners_completeness() {
        let chain = InductionChain::new(golden_iet()).extended_to(10).unwrap();
        let path = chain.path();
        // Types alternate, so both symbols win within any window of 2.
        assert!(path.winners_complete(2));
        assert_eq!(path.completeness_window(), Some(2));
    }
}
