//! Alphabets and irreducible permutation pairs.
//!
//! An exchange on `d` letters is described by a pair of bijections
//! `(pi0, pi1)` from the alphabet onto `{1..d}`, recording the order of the
//! intervals before and after the exchange. Both Rauzy operations act here.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Index of a letter within its alphabet.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Symbol(pub u8);

/// Ordered set of distinct labels, at least two.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Arc<Self>> {
        if labels.len() < 2 {
            return Err(Error::BadSpec("alphabet needs at least two letters".into()));
        }
        if labels.len() > 64 {
            return Err(Error::BadSpec("alphabet too large".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::BadSpec(format!("duplicate label {a:?}")));
                }
            }
        }
        Ok(Arc::new(Alphabet { labels }))
    }

    /// Single-letter labels A, B, C, ...
    pub fn latin(d: usize) -> Arc<Self> {
        let labels = (0..d)
            .map(|i| {
                char::from_u32('A' as u32 + (i as u32 % 26)).unwrap().to_string()
                    + &(if i >= 26 { (i / 26).to_string() } else { String::new() })
            })
            .collect();
        Alphabet::new(labels).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, s: Symbol) -> &str {
        &self.labels[s.0 as usize]
    }

    pub fn lookup(&self, label: &str) -> Option<Symbol> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| Symbol(i as u8))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.labels.len() as u8).map(Symbol)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum RvType {
    /// The last interval of the top row is the longer one.
    Top,
    /// The incoming (bottom-last) interval is the longer one.
    Bottom,
}

impl RvType {
    pub fn index(self) -> u8 {
        match self {
            RvType::Top => 0,
            RvType::Bottom => 1,
        }
    }
}

impl fmt::Display for RvType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Irreducible pair of orderings of the alphabet.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PermutationPair {
    alphabet: Arc<Alphabet>,
    top: Vec<Symbol>,
    bottom: Vec<Symbol>,
}

impl PermutationPair {
    /// Builds the pair from explicit row orderings, rejecting reducible data.
    pub fn new(alphabet: Arc<Alphabet>, top: Vec<Symbol>, bottom: Vec<Symbol>) -> Result<Self> {
        let d = alphabet.len();
        let valid_row = |row: &[Symbol]| {
            if row.len() != d {
                return false;
            }
            let mut seen = vec![false; d];
            for s in row {
                if (s.0 as usize) >= d || seen[s.0 as usize] {
                    return false;
                }
                seen[s.0 as usize] = true;
            }
            true
        };
        if !valid_row(&top) || !valid_row(&bottom) {
            return Err(Error::NotABijection);
        }
        let pair = PermutationPair {
            alphabet,
            top,
            bottom,
        };
        if let Some(k) = pair.reducibility_witness() {
            return Err(Error::Reducible(k));
        }
        Ok(pair)
    }

    /// Smallest `k < d` with `pi1 . pi0^{-1}({1..k}) = {1..k}`, if any.
    fn reducibility_witness(&self) -> Option<usize> {
        let d = self.len();
        let mut max_bottom = 0usize;
        for (i, s) in self.top.iter().enumerate().take(d - 1) {
            max_bottom = max_bottom.max(self.bottom_position(*s));
            if max_bottom == i {
                return Some(i + 1);
            }
        }
        None
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn top_row(&self) -> &[Symbol] {
        &self.top
    }

    pub fn bottom_row(&self) -> &[Symbol] {
        &self.bottom
    }

    /// 0-based position of `s` in the top row.
    pub fn top_position(&self, s: Symbol) -> usize {
        self.top.iter().position(|t| *t == s).unwrap()
    }

    /// 0-based position of `s` in the bottom row.
    pub fn bottom_position(&self, s: Symbol) -> usize {
        self.bottom.iter().position(|t| *t == s).unwrap()
    }

    pub fn top_last(&self) -> Symbol {
        *self.top.last().unwrap()
    }

    pub fn bottom_last(&self) -> Symbol {
        *self.bottom.last().unwrap()
    }

    /// Winner and loser symbols for a step of the given type.
    pub fn winner_loser(&self, t: RvType) -> (Symbol, Symbol) {
        match t {
            RvType::Top => (self.top_last(), self.bottom_last()),
            RvType::Bottom => (self.bottom_last(), self.top_last()),
        }
    }

    /// Applies the type-`t` Rauzy operation to the rows.
    pub fn rauzy_op(&self, t: RvType) -> PermutationPair {
        let (winner, loser) = self.winner_loser(t);
        match t {
            RvType::Top => {
                // Loser leaves the end of the bottom row and re-enters just
                // after the winner.
                let mut bottom: Vec<Symbol> =
                    self.bottom.iter().cloned().filter(|s| *s != loser).collect();
                let wp = bottom.iter().position(|s| *s == winner).unwrap();
                bottom.insert(wp + 1, loser);
                PermutationPair {
                    alphabet: Arc::clone(&self.alphabet),
                    top: self.top.clone(),
                    bottom,
                }
            }
            RvType::Bottom => {
                let mut top: Vec<Symbol> =
                    self.top.iter().cloned().filter(|s| *s != loser).collect();
                let wp = top.iter().position(|s| *s == winner).unwrap();
                top.insert(wp + 1, loser);
                PermutationPair {
                    alphabet: Arc::clone(&self.alphabet),
                    top,
                    bottom: self.bottom.clone(),
                }
            }
        }
    }

    /// Bottom positions read along the top row; a relabeling-invariant key.
    pub fn monodromy(&self) -> Vec<u8> {
        self.top
            .iter()
            .map(|s| self.bottom_position(*s) as u8)
            .collect()
    }

    pub fn row_labels(&self) -> (Vec<String>, Vec<String>) {
        let lab = |row: &[Symbol]| {
            row.iter()
                .map(|s| self.alphabet.label(*s).to_string())
                .collect()
        };
        (lab(&self.top), lab(&self.bottom))
    }
}

impl fmt::Display for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (t, b) = self.row_labels();
        write!(f, "{} / {}", t.join(" "), b.join(" "))
    }
}

/// Builds a pair from label rows; the alphabet is taken in top-row order.
pub fn make_permutation(top: &[&str], bottom: &[&str]) -> Result<PermutationPair> {
    let alphabet = Alphabet::new(top.iter().map(|s| s.to_string()).collect())?;
    let top_syms: Vec<Symbol> = alphabet.symbols().collect();
    let bottom_syms: Vec<Symbol> = bottom
        .iter()
        .map(|l| alphabet.lookup(l).ok_or(Error::NotABijection))
        .collect::<Result<_>>()?;
    PermutationPair::new(alphabet, top_syms, bottom_syms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_is_irreducible() {
        let p = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.monodromy(), vec![2, 1, 0]);
    }

    #[test]
    fn reducible_reports_witness() {
        match make_permutation(&["A", "B", "C"], &["A", "C", "B"]) {
            Err(Error::Reducible(k)) => assert_eq!(k, 1),
            other => panic!("expected Reducible(1), got {other:?}"),
        }
        match make_permutation(&["A", "B", "C", "D"], &["B", "A", "D", "C"]) {
            Err(Error::Reducible(k)) => assert_eq!(k, 2),
            other => panic!("expected Reducible(2), got {other:?}"),
        }
    }

    #[test]
    fn rotation_datum() {
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        // Both Rauzy operations fix the rotation datum.
        assert_eq!(p.rauzy_op(RvType::Top), p);
        assert_eq!(p.rauzy_op(RvType::Bottom), p);
    }

    #[test]
    fn not_a_bijection() {
        assert!(matches!(
            make_permutation(&["A", "B"], &["A", "C"]),
            Err(Error::NotABijection)
        ));
        assert!(matches!(
            make_permutation(&["A", "B", "C"], &["A", "B"]),
            Err(Error::NotABijection)
        ));
    }

    #[test]
    fn rauzy_ops_on_symmetric_three() {
        let p = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let t0 = p.rauzy_op(RvType::Top);
        let (top, bottom) = t0.row_labels();
        assert_eq!(top, vec!["A", "B", "C"]);
        assert_eq!(bottom, vec!["C", "A", "B"]);
        let t1 = p.rauzy_op(RvType::Bottom);
        let (top, bottom) = t1.row_labels();
        assert_eq!(top, vec!["A", "C", "B"]);
        assert_eq!(bottom, vec!["C", "B", "A"]);
    }
}
