//! Scalar tower: exact rationals, real number-field elements, and
//! high-precision floats behind one enum.
//!
//! Induction code works over `Scalar` so the same renormalization engine
//! runs exactly (rationals or a number field) or numerically (`RealHp`).
//! Mixing an exact value with a float promotes to the float side.

pub mod field;
pub mod real;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::cmp::Ordering;
use std::fmt;

pub use field::{FieldElement, NumberField};
pub use real::{RealHp, DEFAULT_PRECISION};

#[derive(Clone, Debug)]
pub enum Scalar {
    Rat(BigRational),
    Alg(FieldElement),
    Real(RealHp),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(BigRational::from(BigInt::from(1)))
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::Rat(BigRational::from(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Real(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Alg(a) => a.is_zero(),
            Scalar::Real(x) => x.is_zero(),
        }
    }

    pub fn sign(&self) -> Ordering {
        match self {
            Scalar::Rat(r) => r.cmp(&BigRational::zero()),
            Scalar::Alg(a) => a.sign(),
            Scalar::Real(x) => {
                if x.is_zero() {
                    Ordering::Equal
                } else if x.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn to_real(&self, prec: u32) -> RealHp {
        match self {
            Scalar::Rat(r) => RealHp::from_ratio(r, prec),
            Scalar::Alg(a) => a.to_real(prec),
            Scalar::Real(x) => x.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_real(64).to_f64()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Rat(r) => Some(r.clone()),
            Scalar::Alg(a) => a.as_rational(),
            Scalar::Real(_) => None,
        }
    }

    fn promote(a: &Scalar, b: &Scalar) -> Option<(FieldElement, FieldElement)> {
        match (a, b) {
            (Scalar::Alg(x), Scalar::Alg(y)) => Some((x.clone(), y.clone())),
            (Scalar::Alg(x), Scalar::Rat(r)) => Some((x.clone(), x.field().from_rational(r.clone()))),
            (Scalar::Rat(r), Scalar::Alg(y)) => Some((y.field().from_rational(r.clone()), y.clone())),
            _ => None,
        }
    }

    fn real_prec(a: &Scalar, b: &Scalar) -> u32 {
        let pa = if let Scalar::Real(x) = a { x.prec() } else { 0 };
        let pb = if let Scalar::Real(x) = b { x.prec() } else { 0 };
        pa.max(pb).max(DEFAULT_PRECISION)
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Real(_), _) | (_, Scalar::Real(_)) => {
                let p = Self::real_prec(self, rhs);
                Scalar::Real(self.to_real(p).add(&rhs.to_real(p)))
            }
            _ => {
                let (a, b) = Self::promote(self, rhs).unwrap();
                Scalar::Alg(a.add(&b))
            }
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            (Scalar::Real(_), _) | (_, Scalar::Real(_)) => {
                let p = Self::real_prec(self, rhs);
                Scalar::Real(self.to_real(p).sub(&rhs.to_real(p)))
            }
            _ => {
                let (a, b) = Self::promote(self, rhs).unwrap();
                Scalar::Alg(a.sub(&b))
            }
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Real(_), _) | (_, Scalar::Real(_)) => {
                let p = Self::real_prec(self, rhs);
                Scalar::Real(self.to_real(p).mul(&rhs.to_real(p)))
            }
            _ => {
                let (a, b) = Self::promote(self, rhs).unwrap();
                Scalar::Alg(a.mul(&b))
            }
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a / b),
            (Scalar::Real(_), _) | (_, Scalar::Real(_)) => {
                let p = Self::real_prec(self, rhs);
                Scalar::Real(self.to_real(p).div(&rhs.to_real(p)))
            }
            _ => {
                let (a, b) = Self::promote(self, rhs).unwrap();
                Scalar::Alg(a.div(&b))
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a.clone()),
            Scalar::Alg(a) => Scalar::Alg(a.neg()),
            Scalar::Real(x) => Scalar::Real(x.neg()),
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.sign() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Total order; exact when both sides are exact.
    pub fn cmp(&self, rhs: &Scalar) -> Ordering {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::Real(_), _) | (_, Scalar::Real(_)) => {
                let p = Self::real_prec(self, rhs);
                self.to_real(p).cmp(&rhs.to_real(p))
            }
            _ => {
                let (a, b) = Self::promote(self, rhs).unwrap();
                a.cmp(&b)
            }
        }
    }

    /// Comparison with a tie guard. Exact scalars tie only on exact
    /// equality; floats tie when the gap falls below
    /// `2^-guard_bits * max(|a|, |b|)` and the caller must abort rather
    /// than guess a type.
    pub fn cmp_guarded(&self, rhs: &Scalar, guard_bits: u32) -> Result<Ordering> {
        if self.is_exact() && rhs.is_exact() {
            return Ok(self.cmp(rhs));
        }
        let p = Self::real_prec(self, rhs);
        let a = self.to_real(p);
        let b = rhs.to_real(p);
        let gap = a.sub(&b).abs();
        let scale = a.abs().max(&b.abs());
        let thr = real::guard_threshold(&scale, guard_bits);
        if !gap.is_zero() && gap.cmp(&thr) == Ordering::Greater {
            Ok(a.cmp(&b))
        } else if gap.is_zero() && scale.is_zero() {
            Ok(Ordering::Equal)
        } else {
            Err(Error::PrecisionExhausted(format!(
                "gap {} below guard 2^-{} at scale {}",
                gap, guard_bits, scale
            )))
        }
    }

    /// Formats as `p/q`, as a coefficient tuple for field elements, or as a
    /// decimal float.
    pub fn display_string(&self) -> String {
        match self {
            Scalar::Rat(r) => format!("{}/{}", r.numer(), r.denom()),
            Scalar::Alg(a) => {
                let parts: Vec<String> = a
                    .coeffs()
                    .iter()
                    .map(|c| format!("{}/{}", c.numer(), c.denom()))
                    .collect();
                format!("[{}]", parts.join(", "))
            }
            Scalar::Real(x) => format!("{}", x),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_string())
    }
}

/// Parses `p/q` or a plain integer into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('/').collect();
    let bad = |m: &str| Error::BadScalar(format!("{m}: {s:?}"));
    match parts.len() {
        1 => {
            let n: BigInt = parts[0].parse().map_err(|_| bad("not an integer"))?;
            Ok(BigRational::from(n))
        }
        2 => {
            let n: BigInt = parts[0].parse().map_err(|_| bad("bad numerator"))?;
            let d: BigInt = parts[1].parse().map_err(|_| bad("bad denominator"))?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(BigRational::new(n, d))
        }
        _ => Err(bad("expected p/q")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_arithmetic_promotes() {
        let f = NumberField::new(
            vec![
                BigRational::from(BigInt::from(-1)),
                BigRational::from(BigInt::from(-1)),
                BigRational::from(BigInt::from(1)),
            ],
            BigRational::from(BigInt::from(1)),
            BigRational::from(BigInt::from(2)),
        )
        .unwrap();
        let phi = Scalar::Alg(f.theta());
        let one = Scalar::one();
        // phi * phi - phi - 1 = 0
        let v = phi.mul(&phi).sub(&phi).sub(&one);
        assert!(v.is_zero());
        // ordering: 1 < phi < 2
        assert_eq!(one.cmp(&phi), Ordering::Less);
        assert_eq!(phi.cmp(&Scalar::from_int(2)), Ordering::Less);
    }

    #[test]
    fn guarded_comparison() {
        let a = Scalar::Real(RealHp::from_f64(0.5, 128));
        let b = a.add(&Scalar::Real(RealHp::pow2(-100, 128)));
        // Gap 2^-100 at scale ~0.5 is above a 2^-110 guard, below 2^-80.
        assert!(a.cmp_guarded(&b, 110).is_ok());
        assert!(a.cmp_guarded(&b, 80).is_err());
        // Exact ties are fine.
        assert_eq!(
            Scalar::ratio(1, 2).cmp_guarded(&Scalar::ratio(1, 2), 80).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("2/3").unwrap(), BigRational::new(2.into(), 3.into()));
        assert_eq!(parse_rational("-5").unwrap(), BigRational::from(BigInt::from(-5)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
