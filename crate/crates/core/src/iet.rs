//! Standard and affine interval exchange transformations.
//!
//! Both kinds of map share one interface so the renormalization engine can
//! induct either exactly or in high precision. Domains are left-closed,
//! right-open, starting at 0; induction shrinks the domain without
//! renormalizing, and `normalized` rescales back to unit length.

use crate::error::{Error, Result};
use crate::perm::{PermutationPair, RvType, Symbol};
use crate::scalar::{RealHp, Scalar};
use std::cmp::Ordering;

/// Common interface of standard and affine exchanges.
pub trait IntervalMap: Clone {
    fn perm(&self) -> &PermutationPair;
    fn lengths(&self) -> &[Scalar];
    fn total_len(&self) -> &Scalar;
    /// Width of the image interval of `s`.
    fn image_width(&self, s: Symbol) -> Scalar;
    /// Left endpoint of the interval of `s`.
    fn interval_start(&self, s: Symbol) -> &Scalar;
    /// Left endpoint of the image of the interval of `s`.
    fn image_start(&self, s: Symbol) -> &Scalar;
    /// Log-slope on the interval of `s`; `None` on a pure translation.
    fn log_slope(&self, s: Symbol) -> Option<&RealHp>;
    fn symbol_at(&self, x: &Scalar) -> Result<Symbol>;
    fn symbol_at_image(&self, y: &Scalar) -> Result<Symbol>;
    fn evaluate(&self, x: &Scalar) -> Result<Scalar>;
    fn evaluate_inverse(&self, y: &Scalar) -> Result<Scalar>;
    /// Lengths compared by the induction step: the last top interval
    /// against the last image interval.
    fn rv_candidates(&self) -> (Scalar, Scalar);
    /// One induction step of the given type. The caller must have decided
    /// that the step is admissible (no tie).
    fn rv_apply(&self, t: RvType) -> Self;
    /// Undoes a type-`t` step that started from `source`.
    fn inverse_rv(&self, t: RvType, source: &PermutationPair) -> Result<Self>;
    /// Same map rescaled to the unit interval.
    fn normalized(&self) -> Self;

    /// Left endpoints of the intervals 2..d; the discontinuity points.
    fn singularities(&self) -> Vec<Scalar> {
        (1..self.perm().len())
            .map(|p| self.interval_start(self.perm().top_row()[p]).clone())
            .collect()
    }

    /// Left endpoints of the image intervals 2..d; the discontinuities of
    /// the inverse map.
    fn inverse_singularities(&self) -> Vec<Scalar> {
        (1..self.perm().len())
            .map(|p| self.image_start(self.perm().bottom_row()[p]).clone())
            .collect()
    }
}

fn scan_position(starts: &[Scalar], widths: &[Scalar], x: &Scalar) -> Result<usize> {
    if x.sign() == Ordering::Less {
        return Err(Error::OutOfDomain(x.display_string()));
    }
    for p in (0..starts.len()).rev() {
        if x.cmp(&starts[p]) != Ordering::Less {
            let end = starts[p].add(&widths[p]);
            if x.cmp(&end) == Ordering::Less {
                return Ok(p);
            }
            return Err(Error::OutOfDomain(x.display_string()));
        }
    }
    Err(Error::OutOfDomain(x.display_string()))
}

/// A standard interval exchange: a piecewise translation.
#[derive(Clone, Debug)]
pub struct Iet {
    perm: PermutationPair,
    lengths: Vec<Scalar>,
    total: Scalar,
    // Left endpoints indexed by top position / bottom position.
    top_starts: Vec<Scalar>,
    image_starts: Vec<Scalar>,
}

impl Iet {
    pub fn new(perm: PermutationPair, lengths: Vec<Scalar>) -> Result<Self> {
        let d = perm.len();
        if lengths.len() != d {
            return Err(Error::BadSpec(format!(
                "expected {d} lengths, got {}",
                lengths.len()
            )));
        }
        for l in &lengths {
            if !l.is_positive() {
                return Err(Error::BadSpec(format!(
                    "lengths must be positive, got {}",
                    l.display_string()
                )));
            }
        }
        let mut top_starts = Vec::with_capacity(d);
        let mut acc = Scalar::zero();
        for p in 0..d {
            top_starts.push(acc.clone());
            acc = acc.add(&lengths[perm.top_row()[p].0 as usize]);
        }
        let total = acc;
        let mut image_starts = Vec::with_capacity(d);
        let mut acc = Scalar::zero();
        for p in 0..d {
            image_starts.push(acc.clone());
            acc = acc.add(&lengths[perm.bottom_row()[p].0 as usize]);
        }
        Ok(Iet {
            perm,
            lengths,
            total,
            top_starts,
            image_starts,
        })
    }

    pub fn length(&self, s: Symbol) -> &Scalar {
        &self.lengths[s.0 as usize]
    }

    /// Translation applied on the interval of `s`.
    pub fn translation(&self, s: Symbol) -> Scalar {
        self.image_start(s).sub(self.interval_start(s))
    }
}

impl IntervalMap for Iet {
    fn perm(&self) -> &PermutationPair {
        &self.perm
    }

    fn lengths(&self) -> &[Scalar] {
        &self.lengths
    }

    fn total_len(&self) -> &Scalar {
        &self.total
    }

    fn image_width(&self, s: Symbol) -> Scalar {
        self.lengths[s.0 as usize].clone()
    }

    fn interval_start(&self, s: Symbol) -> &Scalar {
        &self.top_starts[self.perm.top_position(s)]
    }

    fn image_start(&self, s: Symbol) -> &Scalar {
        &self.image_starts[self.perm.bottom_position(s)]
    }

    fn log_slope(&self, _s: Symbol) -> Option<&RealHp> {
        None
    }

    fn symbol_at(&self, x: &Scalar) -> Result<Symbol> {
        let widths: Vec<Scalar> = self
            .perm
            .top_row()
            .iter()
            .map(|s| self.lengths[s.0 as usize].clone())
            .collect();
        let p = scan_position(&self.top_starts, &widths, x)?;
        Ok(self.perm.top_row()[p])
    }

    fn symbol_at_image(&self, y: &Scalar) -> Result<Symbol> {
        let widths: Vec<Scalar> = self
            .perm
            .bottom_row()
            .iter()
            .map(|s| self.lengths[s.0 as usize].clone())
            .collect();
        let p = scan_position(&self.image_starts, &widths, y)?;
        Ok(self.perm.bottom_row()[p])
    }

    fn evaluate(&self, x: &Scalar) -> Result<Scalar> {
        let s = self.symbol_at(x)?;
        Ok(x.add(&self.translation(s)))
    }

    fn evaluate_inverse(&self, y: &Scalar) -> Result<Scalar> {
        let s = self.symbol_at_image(y)?;
        Ok(y.sub(&self.translation(s)))
    }

    fn rv_candidates(&self) -> (Scalar, Scalar) {
        (
            self.lengths[self.perm.top_last().0 as usize].clone(),
            self.lengths[self.perm.bottom_last().0 as usize].clone(),
        )
    }

    fn rv_apply(&self, t: RvType) -> Self {
        let (winner, loser) = self.perm.winner_loser(t);
        let mut lengths = self.lengths.clone();
        lengths[winner.0 as usize] =
            lengths[winner.0 as usize].sub(&self.lengths[loser.0 as usize]);
        Iet::new(self.perm.rauzy_op(t), lengths).expect("induced lengths stay positive")
    }

    fn inverse_rv(&self, t: RvType, source: &PermutationPair) -> Result<Self> {
        if &source.rauzy_op(t) != self.perm() {
            return Err(Error::InconsistentMove);
        }
        let (winner, loser) = source.winner_loser(t);
        let mut lengths = self.lengths.clone();
        lengths[winner.0 as usize] =
            lengths[winner.0 as usize].add(&self.lengths[loser.0 as usize]);
        Iet::new(source.clone(), lengths)
    }

    fn normalized(&self) -> Self {
        let lengths = self
            .lengths
            .iter()
            .map(|l| l.div(&self.total))
            .collect();
        Iet::new(self.perm.clone(), lengths).unwrap()
    }
}

/// An affine interval exchange: positive slope `e^{omega_s}` per branch.
#[derive(Clone, Debug)]
pub struct Aiet {
    perm: PermutationPair,
    lengths: Vec<Scalar>,
    log_slopes: Vec<RealHp>,
    // e^{omega_s}, computed once; evaluation is exp-free.
    slopes: Vec<RealHp>,
    slopes_all_zero: bool,
    total: Scalar,
    top_starts: Vec<Scalar>,
    image_starts: Vec<Scalar>,
    image_widths: Vec<Scalar>,
}

impl Aiet {
    /// Builds the map, checking the closing condition within `tol`
    /// (absolute). With all slopes exactly zero the condition holds exactly
    /// and `tol` is ignored.
    pub fn new(
        perm: PermutationPair,
        lengths: Vec<Scalar>,
        log_slopes: Vec<RealHp>,
        tol: &RealHp,
    ) -> Result<Self> {
        let out = Self::new_unchecked(perm, lengths, log_slopes)?;
        let defect = out.closing_defect();
        if !out.slopes_all_zero {
            let d_real = defect.to_real(tol.prec()).abs();
            if d_real.cmp(tol) == Ordering::Greater {
                return Err(Error::ClosingCondition(d_real.to_string()));
            }
        }
        Ok(out)
    }

    /// Builds without the closing-condition gate. Induction steps preserve
    /// the closing defect exactly, so re-checking derived maps against a
    /// domain-scaled tolerance would reject deep induced maps spuriously.
    pub fn new_unchecked(
        perm: PermutationPair,
        lengths: Vec<Scalar>,
        log_slopes: Vec<RealHp>,
    ) -> Result<Self> {
        let d = perm.len();
        if lengths.len() != d || log_slopes.len() != d {
            return Err(Error::BadSpec(format!(
                "expected {d} lengths and {d} log-slopes"
            )));
        }
        for l in &lengths {
            if !l.is_positive() {
                return Err(Error::BadSpec("lengths must be positive".into()));
            }
        }
        let slopes_all_zero = log_slopes.iter().all(RealHp::is_zero);
        let slopes: Vec<RealHp> = log_slopes.iter().map(RealHp::exp).collect();
        let image_widths: Vec<Scalar> = if slopes_all_zero {
            lengths.clone()
        } else {
            lengths
                .iter()
                .zip(&slopes)
                .map(|(l, w)| l.mul(&Scalar::Real(w.clone())))
                .collect()
        };
        let total = lengths.iter().fold(Scalar::zero(), |a, b| a.add(b));
        let mut top_starts = Vec::with_capacity(d);
        let mut acc = Scalar::zero();
        for p in 0..d {
            top_starts.push(acc.clone());
            acc = acc.add(&lengths[perm.top_row()[p].0 as usize]);
        }
        let mut image_starts = Vec::with_capacity(d);
        let mut acc = Scalar::zero();
        for p in 0..d {
            image_starts.push(acc.clone());
            acc = acc.add(&image_widths[perm.bottom_row()[p].0 as usize]);
        }
        Ok(Aiet {
            perm,
            lengths,
            log_slopes,
            slopes,
            slopes_all_zero,
            total,
            top_starts,
            image_starts,
            image_widths,
        })
    }

    /// Reasonable absolute closing tolerance for maps built at `prec` bits
    /// on a domain of the given size.
    pub fn default_tol(prec: u32, domain: &Scalar) -> RealHp {
        domain
            .to_real(prec)
            .abs()
            .mul(&RealHp::pow2(-(prec as i32) + 40, prec))
    }

    pub fn log_slopes(&self) -> &[RealHp] {
        &self.log_slopes
    }

    /// Same map with float data rounded to `prec` bits; exact lengths are
    /// kept as they are.
    pub fn with_precision(&self, prec: u32) -> Self {
        let lengths = self
            .lengths
            .iter()
            .map(|l| match l {
                Scalar::Real(x) => Scalar::Real(x.with_prec(prec)),
                other => other.clone(),
            })
            .collect();
        let slopes = self.log_slopes.iter().map(|w| w.with_prec(prec)).collect();
        Aiet::new_unchecked(self.perm.clone(), lengths, slopes).unwrap()
    }

    pub fn length(&self, s: Symbol) -> &Scalar {
        &self.lengths[s.0 as usize]
    }

    /// Signed difference between image total and domain total.
    pub fn closing_defect(&self) -> Scalar {
        let image_total = self
            .image_widths
            .iter()
            .fold(Scalar::zero(), |a, b| a.add(b));
        image_total.sub(&self.total)
    }
}

impl IntervalMap for Aiet {
    fn perm(&self) -> &PermutationPair {
        &self.perm
    }

    fn lengths(&self) -> &[Scalar] {
        &self.lengths
    }

    fn total_len(&self) -> &Scalar {
        &self.total
    }

    fn image_width(&self, s: Symbol) -> Scalar {
        self.image_widths[s.0 as usize].clone()
    }

    fn interval_start(&self, s: Symbol) -> &Scalar {
        &self.top_starts[self.perm.top_position(s)]
    }

    fn image_start(&self, s: Symbol) -> &Scalar {
        &self.image_starts[self.perm.bottom_position(s)]
    }

    fn log_slope(&self, s: Symbol) -> Option<&RealHp> {
        if self.slopes_all_zero {
            None
        } else {
            Some(&self.log_slopes[s.0 as usize])
        }
    }

    fn symbol_at(&self, x: &Scalar) -> Result<Symbol> {
        let widths: Vec<Scalar> = self
            .perm
            .top_row()
            .iter()
            .map(|s| self.lengths[s.0 as usize].clone())
            .collect();
        let p = scan_position(&self.top_starts, &widths, x)?;
        Ok(self.perm.top_row()[p])
    }

    fn symbol_at_image(&self, y: &Scalar) -> Result<Symbol> {
        let widths: Vec<Scalar> = self
            .perm
            .bottom_row()
            .iter()
            .map(|s| self.image_widths[s.0 as usize].clone())
            .collect();
        let p = scan_position(&self.image_starts, &widths, y)?;
        Ok(self.perm.bottom_row()[p])
    }

    fn evaluate(&self, x: &Scalar) -> Result<Scalar> {
        let s = self.symbol_at(x)?;
        let off = x.sub(self.interval_start(s));
        if self.slopes_all_zero {
            return Ok(self.image_start(s).add(&off));
        }
        let slope = self.slopes[s.0 as usize].clone();
        Ok(self.image_start(s).add(&off.mul(&Scalar::Real(slope))))
    }

    fn evaluate_inverse(&self, y: &Scalar) -> Result<Scalar> {
        let s = self.symbol_at_image(y)?;
        let off = y.sub(self.image_start(s));
        if self.slopes_all_zero {
            return Ok(self.interval_start(s).add(&off));
        }
        let slope = self.slopes[s.0 as usize].clone();
        Ok(self.interval_start(s).add(&off.div(&Scalar::Real(slope))))
    }

    fn rv_candidates(&self) -> (Scalar, Scalar) {
        (
            self.lengths[self.perm.top_last().0 as usize].clone(),
            self.image_widths[self.perm.bottom_last().0 as usize].clone(),
        )
    }

    fn rv_apply(&self, t: RvType) -> Self {
        let (winner, loser) = self.perm.winner_loser(t);
        let wi = winner.0 as usize;
        let li = loser.0 as usize;
        let mut lengths = self.lengths.clone();
        let mut slopes = self.log_slopes.clone();
        match t {
            RvType::Top => {
                // The tail of the winner interval (the image of the loser)
                // is cut off; the loser branch now passes through the winner.
                lengths[wi] = lengths[wi].sub(&self.image_widths[li]);
            }
            RvType::Bottom => {
                // The loser interval is cut; its preimage inside the winner
                // interval becomes the new loser interval.
                let shrink = if self.slopes_all_zero {
                    self.lengths[li].clone()
                } else {
                    self.lengths[li].div(&Scalar::Real(self.slopes[wi].clone()))
                };
                lengths[li] = shrink.clone();
                lengths[wi] = self.lengths[wi].sub(&shrink);
            }
        }
        slopes[li] = slopes[li].add(&slopes[wi]);
        Aiet::new_unchecked(self.perm.rauzy_op(t), lengths, slopes)
            .expect("induced affine map stays admissible")
    }

    fn inverse_rv(&self, t: RvType, source: &PermutationPair) -> Result<Self> {
        if &source.rauzy_op(t) != self.perm() {
            return Err(Error::InconsistentMove);
        }
        let (winner, loser) = source.winner_loser(t);
        let wi = winner.0 as usize;
        let li = loser.0 as usize;
        let mut lengths = self.lengths.clone();
        let mut slopes = self.log_slopes.clone();
        slopes[li] = slopes[li].sub(&slopes[wi]);
        match t {
            RvType::Top => {
                let cut = if self.slopes_all_zero {
                    self.lengths[li].clone()
                } else {
                    self.lengths[li].mul(&Scalar::Real(slopes[li].exp()))
                };
                lengths[wi] = lengths[wi].add(&cut);
            }
            RvType::Bottom => {
                lengths[wi] = lengths[wi].add(&self.lengths[li]);
                if !self.slopes_all_zero {
                    lengths[li] = self.lengths[li].mul(&Scalar::Real(self.slopes[wi].clone()));
                }
            }
        }
        Aiet::new_unchecked(source.clone(), lengths, slopes)
    }

    fn normalized(&self) -> Self {
        let lengths: Vec<Scalar> = self
            .lengths
            .iter()
            .map(|l| l.div(&self.total))
            .collect();
        Aiet::new_unchecked(self.perm.clone(), lengths, self.log_slopes.clone()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::make_permutation;

    fn rotation(n: i64, d: i64) -> Iet {
        // Exchange with lengths (1 - n/d, n/d); rotation by n/d.
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        Iet::new(p, vec![Scalar::ratio(d - n, d), Scalar::ratio(n, d)]).unwrap()
    }

    #[test]
    fn rotation_evaluation() {
        // lambda = (2/3, 1/3): x -> x + 1/3 mod 1.
        let t = rotation(1, 3);
        let y = t.evaluate(&Scalar::zero()).unwrap();
        assert_eq!(y.cmp(&Scalar::ratio(1, 3)), Ordering::Equal);
        let y = t.evaluate(&Scalar::ratio(2, 3)).unwrap();
        assert!(y.is_zero());
        // Inverse round-trip.
        let x = Scalar::ratio(5, 7);
        let y = t.evaluate(&x).unwrap();
        let back = t.evaluate_inverse(&y).unwrap();
        assert_eq!(back.cmp(&x), Ordering::Equal);
        // Out of domain.
        assert!(t.evaluate(&Scalar::one()).is_err());
        assert!(t.evaluate(&Scalar::from_int(-1)).is_err());
    }

    #[test]
    fn identity_on_fixed_first_interval() {
        // top = bottom on the first letter and first position: translation 0.
        let p = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let t = Iet::new(
            p,
            vec![Scalar::ratio(1, 2), Scalar::ratio(1, 3), Scalar::ratio(1, 6)],
        )
        .unwrap();
        // Singularities are the interior left endpoints.
        let sing = t.singularities();
        assert_eq!(sing.len(), 2);
        assert_eq!(sing[0].cmp(&Scalar::ratio(1, 2)), Ordering::Equal);
        assert_eq!(sing[1].cmp(&Scalar::ratio(5, 6)), Ordering::Equal);
    }

    #[test]
    fn aiet_zero_slope_matches_iet() {
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let lengths = vec![Scalar::ratio(2, 3), Scalar::ratio(1, 3)];
        let iet = Iet::new(p.clone(), lengths.clone()).unwrap();
        let tol = RealHp::pow2(-100, 128);
        let aiet = Aiet::new(
            p,
            lengths,
            vec![RealHp::zero(128), RealHp::zero(128)],
            &tol,
        )
        .unwrap();
        for k in 0..10 {
            let x = Scalar::ratio(k, 10);
            let a = iet.evaluate(&x).unwrap();
            let b = aiet.evaluate(&x).unwrap();
            assert_eq!(a.cmp(&b), Ordering::Equal, "x = {k}/10");
        }
    }

    #[test]
    fn aiet_image_lengths() {
        // d=2, eta=(1/2,1/2), omega=(ln(3/2), ln(1/2)): image of A has length 3/4.
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let prec = 128;
        let w_a = RealHp::from_f64(1.5, prec).ln();
        let w_b = RealHp::from_f64(0.5, prec).ln();
        let tol = RealHp::pow2(-100, prec);
        let t = Aiet::new(
            p,
            vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
            vec![w_a, w_b],
            &tol,
        )
        .unwrap();
        let wa = t.image_width(Symbol(0)).to_real(prec);
        let err = wa.sub(&RealHp::from_f64(0.75, prec)).abs();
        assert!(err.cmp(&RealHp::pow2(-90, prec)) == Ordering::Less);
        // Image intervals tile the domain in bottom order.
        let total = t.image_width(Symbol(0)).add(&t.image_width(Symbol(1)));
        let err = total.sub(t.total_len()).to_real(prec).abs();
        assert!(err.cmp(&RealHp::pow2(-90, prec)) == Ordering::Less);
    }

    #[test]
    fn closing_condition_rejected() {
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let prec = 128;
        let tol = RealHp::pow2(-80, prec);
        // Slopes (ln 2, ln 2) scale everything up; no eta satisfies closing.
        let r = Aiet::new(
            p,
            vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
            vec![RealHp::from_i64(2, prec).ln(), RealHp::from_i64(2, prec).ln()],
            &tol,
        );
        assert!(matches!(r, Err(Error::ClosingCondition(_))));
    }

    #[test]
    fn aiet_bijection_roundtrip() {
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let prec = 160;
        // eta = (1/2, 1/2), omega = (w, -w') chosen to satisfy closing:
        // (1/2) e^w + (1/2) e^{w'} = 1 with e^w = 3/2, e^{w'} = 1/2.
        let w_a = RealHp::from_f64(1.5, prec).ln();
        let w_b = RealHp::from_f64(0.5, prec).ln();
        let tol = RealHp::pow2(-120, prec);
        let t = Aiet::new(
            p,
            vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
            vec![w_a, w_b],
            &tol,
        )
        .unwrap();
        for k in 0..20 {
            let x = Scalar::ratio(k, 20);
            let y = t.evaluate(&x).unwrap();
            let back = t.evaluate_inverse(&y).unwrap();
            let err = back.sub(&x).to_real(prec).abs();
            assert!(
                err.cmp(&RealHp::pow2(-120, prec)) == Ordering::Less,
                "k = {k}, err = {err}"
            );
        }
    }
}
