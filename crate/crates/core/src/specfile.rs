//! On-disk description of standard and affine exchanges.
//!
//! The format is JSON: alphabet labels, the two row orders, lengths as
//! `"p/q"` strings or as coefficient arrays over an optional number field,
//! and optional log-slopes as decimal strings.

use crate::error::{Error, Result};
use crate::iet::{Aiet, Iet, IntervalMap};
use crate::perm::{Alphabet, PermutationPair};
use crate::scalar::{parse_rational, NumberField, RealHp, Scalar};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    /// `"p/q"` or an integer string.
    Rational(String),
    /// Coefficients `c0..ck` against the field basis, as rational strings.
    FieldCoeffs(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Minimal polynomial coefficients `c0..ck`, rational strings.
    pub min_poly: Vec<String>,
    /// Rational interval isolating the chosen real root.
    pub root_interval: [String; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapSpec {
    pub alphabet: Vec<String>,
    pub top: Vec<String>,
    pub bottom: Vec<String>,
    pub lengths: Vec<LengthSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
}

/// A parsed spec: either a standard or an affine exchange.
#[derive(Clone)]
pub enum LoadedMap {
    Standard(Iet),
    Affine(Aiet),
}

impl LoadedMap {
    pub fn perm(&self) -> &PermutationPair {
        match self {
            LoadedMap::Standard(t) => t.perm(),
            LoadedMap::Affine(t) => t.perm(),
        }
    }

    pub fn as_iet(&self) -> Result<&Iet> {
        match self {
            LoadedMap::Standard(t) => Ok(t),
            LoadedMap::Affine(_) => Err(Error::BadSpec(
                "expected a standard exchange, got an affine one".into(),
            )),
        }
    }

    pub fn as_aiet(&self) -> Result<&Aiet> {
        match self {
            LoadedMap::Affine(t) => Ok(t),
            LoadedMap::Standard(_) => Err(Error::BadSpec(
                "expected an affine exchange, got a standard one".into(),
            )),
        }
    }
}

impl MapSpec {
    pub fn parse(text: &str) -> Result<MapSpec> {
        serde_json::from_str(text).map_err(|e| Error::BadSpec(format!("invalid spec JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization")
    }

    fn build_field(&self) -> Result<Option<Arc<NumberField>>> {
        match &self.field {
            None => Ok(None),
            Some(f) => {
                let coeffs: Vec<BigRational> = f
                    .min_poly
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<_>>()?;
                let lo = parse_rational(&f.root_interval[0])?;
                let hi = parse_rational(&f.root_interval[1])?;
                Ok(Some(NumberField::new(coeffs, lo, hi)?))
            }
        }
    }

    /// Instantiates the map; `precision` governs the log-slopes.
    pub fn load(&self, precision: u32) -> Result<LoadedMap> {
        let alphabet = Alphabet::new(self.alphabet.clone())?;
        let lookup = |labels: &[String]| -> Result<Vec<crate::perm::Symbol>> {
            labels
                .iter()
                .map(|l| alphabet.lookup(l).ok_or(Error::NotABijection))
                .collect()
        };
        let perm = PermutationPair::new(
            Arc::clone(&alphabet),
            lookup(&self.top)?,
            lookup(&self.bottom)?,
        )?;
        let field = self.build_field()?;
        let lengths: Vec<Scalar> = self
            .lengths
            .iter()
            .map(|ls| match ls {
                LengthSpec::Rational(s) => Ok(Scalar::Rat(parse_rational(s)?)),
                LengthSpec::FieldCoeffs(cs) => {
                    let field = field.as_ref().ok_or_else(|| {
                        Error::BadSpec("field coefficients given without a field".into())
                    })?;
                    let coeffs: Vec<BigRational> =
                        cs.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
                    Ok(Scalar::Alg(field.element(coeffs)?))
                }
            })
            .collect::<Result<_>>()?;
        match &self.omega {
            None => Ok(LoadedMap::Standard(Iet::new(perm, lengths)?)),
            Some(ws) => {
                let omega: Vec<RealHp> = ws
                    .iter()
                    .map(|s| {
                        RealHp::parse(s, precision)
                            .ok_or_else(|| Error::BadScalar(format!("bad log-slope {s:?}")))
                    })
                    .collect::<Result<_>>()?;
                let domain = lengths.iter().fold(Scalar::zero(), |a, b| a.add(b));
                // Decimal slope strings only pin the closing condition to
                // their own number of digits.
                let digits = ws.iter().map(|s| sig_digits(s)).min().unwrap_or(30);
                let decimal_tol = domain
                    .to_real(precision)
                    .mul(&RealHp::from_f64(10f64.powi(-(digits.saturating_sub(3) as i32)), precision));
                let tol = Aiet::default_tol(precision, &domain).max(&decimal_tol);
                Ok(LoadedMap::Affine(Aiet::new(perm, lengths, omega, &tol)?))
            }
        }
    }

    pub fn from_iet(t: &Iet) -> MapSpec {
        let (top, bottom) = t.perm().row_labels();
        let alphabet = top.clone();
        let (lengths, field) = encode_lengths(t.lengths());
        MapSpec {
            alphabet,
            top,
            bottom,
            lengths,
            omega: None,
            field,
        }
    }

    pub fn from_aiet(t: &Aiet) -> MapSpec {
        let (top, bottom) = t.perm().row_labels();
        let alphabet = top.clone();
        let (lengths, field) = encode_lengths(t.lengths());
        MapSpec {
            alphabet,
            top,
            bottom,
            lengths,
            omega: Some(t.log_slopes().iter().map(|w| w.to_string()).collect()),
            field,
        }
    }
}

/// Significant digits of a decimal string.
fn sig_digits(s: &str) -> usize {
    let mant = s.split(['e', 'E']).next().unwrap_or(s);
    mant.chars().filter(|c| c.is_ascii_digit()).count()
}

fn encode_lengths(lengths: &[Scalar]) -> (Vec<LengthSpec>, Option<FieldSpec>) {
    let mut field_spec = None;
    let out = lengths
        .iter()
        .map(|l| match l {
            Scalar::Rat(r) => LengthSpec::Rational(format!("{}/{}", r.numer(), r.denom())),
            Scalar::Alg(a) => {
                if field_spec.is_none() {
                    let f = a.field();
                    let (lo, hi) = f.root_window();
                    field_spec = Some(FieldSpec {
                        min_poly: f
                            .min_poly()
                            .iter()
                            .map(|c| format!("{}/{}", c.numer(), c.denom()))
                            .collect(),
                        root_interval: [
                            format!("{}/{}", lo.numer(), lo.denom()),
                            format!("{}/{}", hi.numer(), hi.denom()),
                        ],
                    });
                }
                LengthSpec::FieldCoeffs(
                    a.coeffs()
                        .iter()
                        .map(|c| format!("{}/{}", c.numer(), c.denom()))
                        .collect(),
                )
            }
            Scalar::Real(x) => LengthSpec::Rational(real_to_rational_string(x)),
        })
        .collect();
    (out, field_spec)
}

/// Represents a float exactly as a dyadic rational string.
fn real_to_rational_string(x: &RealHp) -> String {
    // Decimal round-trip keeps the file readable while the parse error
    // stays below the working precision.
    format!("{}", to_rational(x))
}

fn to_rational(x: &RealHp) -> BigRational {
    // Exact dyadic expansion through the f64 components would lose bits;
    // go through the decimal printout instead, which astro-float rounds
    // to the stored precision.
    let s = x.to_string();
    parse_decimal_rational(&s).expect("printable float")
}

/// Parses a decimal float string into the exact rational it denotes.
pub fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let num: num_bigint::BigInt = digits.parse().ok()?;
    let mut r = BigRational::from(num);
    let shift = exp - frac_part.len() as i64;
    let ten = BigRational::from(num_bigint::BigInt::from(10));
    if shift > 0 {
        for _ in 0..shift {
            r = r * &ten;
        }
    } else {
        for _ in 0..(-shift) {
            r = r / &ten;
        }
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn rational_spec_roundtrip() {
        let text = r#"{
            "alphabet": ["A", "B", "C"],
            "top": ["A", "B", "C"],
            "bottom": ["C", "B", "A"],
            "lengths": ["1/2", "1/3", "1/6"]
        }"#;
        let spec = MapSpec::parse(text).unwrap();
        let map = spec.load(128).unwrap();
        let iet = map.as_iet().unwrap();
        assert_eq!(iet.perm().len(), 3);
        let back = MapSpec::from_iet(iet);
        let reloaded = back.load(128).unwrap();
        for (a, b) in iet.lengths().iter().zip(reloaded.as_iet().unwrap().lengths()) {
            assert_eq!(a.cmp(b), Ordering::Equal);
        }
    }

    #[test]
    fn field_spec_loads() {
        let text = r#"{
            "alphabet": ["A", "B"],
            "top": ["A", "B"],
            "bottom": ["B", "A"],
            "lengths": [["-1", "1"], ["2", "-1"]],
            "field": {"min_poly": ["-1", "-1", "1"], "root_interval": ["1", "2"]}
        }"#;
        let spec = MapSpec::parse(text).unwrap();
        let map = spec.load(128).unwrap();
        let iet = map.as_iet().unwrap();
        // lambda = (phi - 1, 2 - phi) sums to 1.
        assert_eq!(iet.total_len().cmp(&Scalar::one()), Ordering::Equal);
        let phi_minus_one = iet.lengths()[0].to_f64();
        assert!((phi_minus_one - 0.618033988).abs() < 1e-8);
    }

    #[test]
    fn affine_spec_loads() {
        let text = r#"{
            "alphabet": ["A", "B"],
            "top": ["A", "B"],
            "bottom": ["B", "A"],
            "lengths": ["1/2", "1/2"],
            "omega": ["0.405465108108164381978013115464349137", "-0.693147180559945309417232121458176568"]
        }"#;
        // omega = (ln(3/2), ln(1/2)) satisfies the closing condition.
        let spec = MapSpec::parse(text).unwrap();
        let map = spec.load(192).unwrap();
        let aiet = map.as_aiet().unwrap();
        assert!(aiet.closing_defect().to_real(192).abs().to_f64() < 1e-30);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(MapSpec::parse("{").is_err());
        let text = r#"{
            "alphabet": ["A", "B"],
            "top": ["A", "B"],
            "bottom": ["A", "B"],
            "lengths": ["1/2", "1/2"]
        }"#;
        // Identity permutation is reducible.
        assert!(matches!(
            MapSpec::parse(text).unwrap().load(128),
            Err(Error::Reducible(1))
        ));
    }

    #[test]
    fn decimal_rational_parsing() {
        let r = parse_decimal_rational("-1.25e-2").unwrap();
        assert_eq!(r, BigRational::new((-1i64).into(), 80.into()));
        let r = parse_decimal_rational("42").unwrap();
        assert_eq!(r, BigRational::from(num_bigint::BigInt::from(42)));
    }
}
