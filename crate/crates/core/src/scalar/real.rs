//! High-precision floating-point scalars.
//!
//! Thin wrapper around `astro_float::BigFloat` that records the working
//! precision with each value. Binary operations round to the larger of the
//! two operand precisions.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as IntSign};
use num_rational::BigRational;
use num_traits::Zero;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

pub const DEFAULT_PRECISION: u32 = 128;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// A floating-point number with explicit mantissa precision in bits.
#[derive(Clone, Debug)]
pub struct RealHp {
    value: BigFloat,
    prec: u32,
}

impl RealHp {
    pub fn zero(prec: u32) -> Self {
        RealHp {
            value: BigFloat::from_i64(0, prec as usize),
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        RealHp {
            value: BigFloat::from_i64(1, prec as usize),
            prec,
        }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        RealHp {
            value: BigFloat::from_i64(v, prec as usize),
            prec,
        }
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        RealHp {
            value: BigFloat::from_f64(v, prec as usize),
            prec,
        }
    }

    /// Exact conversion; the result carries `max(prec, bits(v))` bits.
    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        let (sign, mag) = v.clone().into_parts();
        if mag.is_zero() {
            return Self::zero(prec);
        }
        let digits = mag.to_u64_digits();
        let bits = mag.bits();
        let mut words = digits;
        // Normalize so the top bit of the top word is set.
        let shift = (64 - (bits % 64)) % 64;
        if shift > 0 {
            let mut carry = 0u64;
            for w in words.iter_mut() {
                let nw = (*w << shift) | carry;
                carry = *w >> (64 - shift);
                *w = nw;
            }
            debug_assert_eq!(carry, 0);
        }
        let s = if sign == IntSign::Minus {
            Sign::Neg
        } else {
            Sign::Pos
        };
        let value = BigFloat::from_words(&words, s, bits as astro_float::Exponent);
        RealHp {
            value,
            prec: prec.max(bits as u32),
        }
    }

    /// Correctly rounded conversion of `num/den` at precision `prec`.
    pub fn from_ratio(r: &BigRational, prec: u32) -> Self {
        if r.is_zero() {
            return Self::zero(prec);
        }
        let num = Self::from_bigint(r.numer(), prec);
        let den = Self::from_bigint(r.denom(), prec);
        RealHp {
            value: num.value.div(&den.value, prec as usize, RM),
            prec,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let mut v = self.value.clone();
        v.set_precision(prec as usize, RM).expect("set precision");
        RealHp { value: v, prec }
    }

    fn join(&self, rhs: &Self) -> u32 {
        self.prec.max(rhs.prec)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        RealHp {
            value: self.value.add(&rhs.value, p as usize, RM),
            prec: p,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        RealHp {
            value: self.value.sub(&rhs.value, p as usize, RM),
            prec: p,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        RealHp {
            value: self.value.mul(&rhs.value, p as usize, RM),
            prec: p,
        }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        RealHp {
            value: self.value.div(&rhs.value, p as usize, RM),
            prec: p,
        }
    }

    pub fn neg(&self) -> Self {
        RealHp {
            value: self.value.neg(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Self {
        RealHp {
            value: self.value.abs(),
            prec: self.prec,
        }
    }

    pub fn exp(&self) -> Self {
        let value = CONSTS.with(|cc| self.value.exp(self.prec as usize, RM, &mut cc.borrow_mut()));
        RealHp {
            value,
            prec: self.prec,
        }
    }

    pub fn ln(&self) -> Self {
        let value = CONSTS.with(|cc| self.value.ln(self.prec as usize, RM, &mut cc.borrow_mut()));
        RealHp {
            value,
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Self {
        RealHp {
            value: self.value.sqrt(self.prec as usize, RM),
            prec: self.prec,
        }
    }

    pub fn powi(&self, n: usize) -> Self {
        RealHp {
            value: self.value.powi(n, self.prec as usize, RM),
            prec: self.prec,
        }
    }

    /// 2^-bits at this value's precision.
    pub fn pow2(bits: i32, prec: u32) -> Self {
        let two = Self::from_i64(2, prec);
        if bits >= 0 {
            two.powi(bits as usize)
        } else {
            Self::one(prec).div(&two.powi((-bits) as usize))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative() && !self.value.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.value.is_positive() && !self.value.is_zero()
    }

    pub fn cmp(&self, rhs: &Self) -> Ordering {
        match self.value.cmp(&rhs.value) {
            Some(v) => v.cmp(&0),
            None => panic!("NaN in RealHp comparison"),
        }
    }

    pub fn max(&self, rhs: &Self) -> Self {
        if self.cmp(rhs) == Ordering::Less {
            rhs.clone()
        } else {
            self.clone()
        }
    }

    pub fn min(&self, rhs: &Self) -> Self {
        if self.cmp(rhs) == Ordering::Greater {
            rhs.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.value.is_zero() {
            return 0.0;
        }
        let (words, _bits, sign, exp, _) = self
            .value
            .as_raw_parts()
            .expect("finite value");
        let top = *words.last().expect("nonempty mantissa");
        let mut v = (top as f64) / 2f64.powi(64);
        if words.len() >= 2 {
            v += (words[words.len() - 2] as f64) / 2f64.powi(128);
        }
        v *= 2f64.powi(exp);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Parses a decimal string such as `-1.25e-3` at the given precision.
    pub fn parse(s: &str, prec: u32) -> Option<Self> {
        let value = CONSTS.with(|cc| {
            BigFloat::parse(s, astro_float::Radix::Dec, prec as usize, RM, &mut cc.borrow_mut())
        });
        if value.is_nan() {
            return None;
        }
        Some(RealHp { value, prec })
    }
}

impl fmt::Display for RealHp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl From<&BigRational> for RealHp {
    fn from(r: &BigRational) -> Self {
        RealHp::from_ratio(r, DEFAULT_PRECISION)
    }
}

/// Sum of absolute errors tolerated when comparing near-equal lengths; see
/// `Scalar::cmp_guarded`.
pub fn guard_threshold(scale: &RealHp, guard_bits: u32) -> RealHp {
    scale.mul(&RealHp::pow2(-(guard_bits as i32), scale.prec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use std::str::FromStr;

    #[test]
    fn bigint_roundtrip_exact() {
        let v = BigInt::from_str("123456789012345678901234567890123456789").unwrap();
        let x = RealHp::from_bigint(&v, 256);
        let back = x.to_f64();
        let expect = 1.2345678901234568e38;
        assert!((back - expect).abs() / expect < 1e-12);
        // negative values
        let y = RealHp::from_bigint(&(-v), 256);
        assert!(y.is_negative());
    }

    #[test]
    fn ratio_conversion() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        let x = RealHp::from_ratio(&r, 128);
        let three = RealHp::from_i64(3, 128);
        let prod = x.mul(&three);
        let err = prod.sub(&RealHp::one(128)).abs();
        assert!(err.cmp(&RealHp::pow2(-120, 128)) == Ordering::Less);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let x = RealHp::from_f64(0.73, 160);
        let y = x.exp().ln();
        let err = y.sub(&x).abs();
        assert!(err.cmp(&RealHp::pow2(-140, 160)) == Ordering::Less);
    }

    #[test]
    fn tiny_exponents_do_not_underflow() {
        let mut x = RealHp::one(128);
        let half = RealHp::from_ratio(&BigRational::new(BigInt::one(), BigInt::from(2)), 128);
        for _ in 0..5000 {
            x = x.mul(&half);
        }
        assert!(x.is_positive());
        let lg = x.ln();
        let expect = RealHp::from_i64(5000, 128).mul(&RealHp::from_i64(2, 128).ln());
        let err = lg.add(&expect).abs();
        assert!(err.cmp(&RealHp::from_f64(1e-20, 128)) == Ordering::Less);
    }

    #[test]
    fn parse_decimal() {
        let x = RealHp::parse("-0.404508497187473712051146708591", 128).unwrap();
        assert!(x.is_negative());
        assert!((x.to_f64() + 0.4045084971874737).abs() < 1e-15);
    }
}
