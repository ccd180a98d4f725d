//! Real quadratic and cubic number fields with decidable comparisons.
//!
//! A field is described by a minimal polynomial `p` (degree 2 or 3,
//! irreducible over Q) together with a rational interval isolating one real
//! root `theta`. Elements are Q-coefficient vectors against the basis
//! `1, theta, theta^2, ...`. Zero-testing reduces to the normal form being
//! the zero vector; the sign of a nonzero element is decided by interval
//! evaluation, bisecting the root interval until zero is excluded.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::real::RealHp;

type Poly = Vec<BigRational>; // coefficient c0 + c1 x + c2 x^2 + ...

fn poly_trim(p: &mut Poly) {
    while p.len() > 1 && p.last().map_or(false, Zero::is_zero) {
        p.pop();
    }
}

fn poly_deg(p: &Poly) -> usize {
    p.len().saturating_sub(1)
}

fn poly_eval(p: &Poly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_derivative(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    let mut d: Poly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from(BigInt::from(i)))
        .collect();
    poly_trim(&mut d);
    d
}

/// Euclidean division: returns (quotient, remainder).
fn poly_divmod(num: &Poly, den: &Poly) -> (Poly, Poly) {
    let dd = poly_deg(den);
    assert!(!den[dd].is_zero(), "division by zero polynomial");
    let mut rem = num.clone();
    poly_trim(&mut rem);
    if poly_deg(&rem) < dd && rem.iter().all(Zero::is_zero) {
        return (vec![BigRational::zero()], rem);
    }
    let mut quot = vec![BigRational::zero(); num.len()];
    while poly_deg(&rem) >= dd && !rem.iter().all(Zero::is_zero) {
        let rd = poly_deg(&rem);
        let coef = &rem[rd] / &den[dd];
        let shift = rd - dd;
        quot[shift] = coef.clone();
        for i in 0..=dd {
            let v = &den[i] * &coef;
            rem[i + shift] -= v;
        }
        poly_trim(&mut rem);
        if rd == 0 {
            break;
        }
    }
    poly_trim(&mut quot);
    (quot, rem)
}

fn poly_is_zero(p: &Poly) -> bool {
    p.iter().all(Zero::is_zero)
}

/// Sturm chain of `p`; used to count real roots in a half-open interval.
fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), poly_derivative(p)];
    loop {
        let n = chain.len();
        if poly_is_zero(&chain[n - 1]) {
            chain.pop();
            break;
        }
        let (_, mut r) = poly_divmod(&chain[n - 2], &chain[n - 1]);
        if poly_is_zero(&r) {
            break;
        }
        for c in r.iter_mut() {
            *c = -c.clone();
        }
        chain.push(r);
    }
    chain
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None;
    for p in chain {
        let v = poly_eval(p, x);
        if v.is_zero() {
            continue;
        }
        let s = v.is_positive();
        if let Some(prev) = last {
            if prev != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

fn roots_in_interval(p: &Poly, lo: &BigRational, hi: &BigRational) -> usize {
    let chain = sturm_chain(p);
    sign_changes(&chain, lo) - sign_changes(&chain, hi)
}

fn gcd_is_constant(p: &Poly, q: &Poly) -> bool {
    let mut a = p.clone();
    let mut b = q.clone();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !poly_is_zero(&b) {
        let (_, r) = poly_divmod(&a, &b);
        a = b;
        b = r;
    }
    poly_deg(&a) == 0
}

/// Rational-root screen. For degrees 2 and 3 the absence of rational roots
/// is equivalent to irreducibility over Q, which the zero test relies on.
fn has_rational_root(p: &Poly) -> bool {
    // Clear denominators to an integer polynomial.
    let mut lcm = BigInt::one();
    for c in p.iter() {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from(lcm.clone())).to_integer()).collect();
    let a0 = &ints[0];
    let ak = ints.last().unwrap();
    if a0.is_zero() {
        return true; // x = 0 is a root
    }
    let div0 = small_divisors(a0);
    let divk = small_divisors(ak);
    if div0.is_empty() || divk.is_empty() {
        return false; // screen skipped; the refinement cap still backstops
    }
    for n in &div0 {
        for d in &divk {
            for sgn in [1i64, -1] {
                let cand = BigRational::new(n * BigInt::from(sgn), d.clone());
                if poly_eval(p, &cand).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

/// Positive divisors, or empty if the trial bound is exceeded.
fn small_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut i = BigInt::one();
    let limit = BigInt::from(100_000u32);
    while &i * &i <= n {
        if (&n % &i).is_zero() {
            out.push(i.clone());
            out.push(&n / &i);
        }
        i += 1;
        if i > limit {
            return Vec::new();
        }
    }
    out
}

/// A real number field Q(theta) of degree 2 or 3.
pub struct NumberField {
    min_poly: Poly,
    degree: usize,
    // Isolating interval for theta, refined on demand.
    window: Mutex<(BigRational, BigRational)>,
    lo_sign_positive: bool,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberField(deg {})", self.degree)
    }
}

impl NumberField {
    /// Builds the field from `min_poly` coefficients `c0..ck` and an
    /// isolating interval for the chosen real root.
    pub fn new(min_poly: Vec<BigRational>, lo: BigRational, hi: BigRational) -> Result<Arc<Self>> {
        let mut p = min_poly;
        poly_trim(&mut p);
        let degree = poly_deg(&p);
        if !(2..=3).contains(&degree) {
            return Err(Error::BadScalar(format!(
                "minimal polynomial must have degree 2 or 3, got {degree}"
            )));
        }
        if lo >= hi {
            return Err(Error::BadScalar("empty root interval".into()));
        }
        let plo = poly_eval(&p, &lo);
        let phi = poly_eval(&p, &hi);
        if plo.is_zero() || phi.is_zero() {
            return Err(Error::BadScalar(
                "root interval endpoints must not be roots".into(),
            ));
        }
        if plo.is_positive() == phi.is_positive() {
            return Err(Error::BadScalar(
                "minimal polynomial does not change sign over the root interval".into(),
            ));
        }
        if !gcd_is_constant(&p, &poly_derivative(&p)) {
            return Err(Error::BadScalar("minimal polynomial is not squarefree".into()));
        }
        if has_rational_root(&p) {
            return Err(Error::BadScalar(
                "minimal polynomial is reducible over Q".into(),
            ));
        }
        if roots_in_interval(&p, &lo, &hi) != 1 {
            return Err(Error::BadScalar(
                "root interval does not isolate a single root".into(),
            ));
        }
        Ok(Arc::new(NumberField {
            lo_sign_positive: plo.is_positive(),
            min_poly: p,
            degree,
            window: Mutex::new((lo, hi)),
        }))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn min_poly(&self) -> &[BigRational] {
        &self.min_poly
    }

    pub fn root_window(&self) -> (BigRational, BigRational) {
        self.window.lock().unwrap().clone()
    }

    /// Halves the isolating interval once.
    fn refine_once(&self) {
        let mut w = self.window.lock().unwrap();
        let mid = (&w.0 + &w.1) / BigRational::from(BigInt::from(2));
        let pm = poly_eval(&self.min_poly, &mid);
        // `mid` is rational and the polynomial is irreducible of degree >= 2,
        // so pm never vanishes.
        if pm.is_positive() == self.lo_sign_positive {
            w.0 = mid;
        } else {
            w.1 = mid;
        }
    }

    /// Generator element theta.
    pub fn theta(self: &Arc<Self>) -> FieldElement {
        let mut coeffs = vec![BigRational::zero(); self.degree];
        coeffs[1] = BigRational::one();
        FieldElement {
            coeffs,
            field: Arc::clone(self),
        }
    }

    pub fn from_rational(self: &Arc<Self>, r: BigRational) -> FieldElement {
        let mut coeffs = vec![BigRational::zero(); self.degree];
        coeffs[0] = r;
        FieldElement {
            coeffs,
            field: Arc::clone(self),
        }
    }

    pub fn element(self: &Arc<Self>, mut coeffs: Vec<BigRational>) -> Result<FieldElement> {
        if coeffs.len() > self.degree {
            return Err(Error::BadScalar(format!(
                "element has {} coefficients but the field has degree {}",
                coeffs.len(),
                self.degree
            )));
        }
        coeffs.resize(self.degree, BigRational::zero());
        Ok(FieldElement {
            coeffs,
            field: Arc::clone(self),
        })
    }

    /// Reduces an arbitrary-degree polynomial in theta to the canonical basis.
    fn reduce(&self, mut poly: Poly) -> Vec<BigRational> {
        let k = self.degree;
        let lead = &self.min_poly[k];
        while poly.len() > k {
            let top = poly.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let deg = poly.len(); // degree of the popped term
            let factor = top / lead;
            // x^k = -(c_{k-1} x^{k-1} + ... + c_0)/c_k, shifted by deg - k.
            for i in 0..k {
                let v = &self.min_poly[i] * &factor;
                poly[deg - k + i] -= v;
            }
        }
        poly.resize(k, BigRational::zero());
        poly
    }
}

/// An element of a shared `NumberField`.
#[derive(Clone)]
pub struct FieldElement {
    coeffs: Vec<BigRational>,
    field: Arc<NumberField>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement{:?}", self.coeffs)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Exact rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn same_field(&self, rhs: &Self) -> bool {
        if Arc::ptr_eq(&self.field, &rhs.field) {
            return true;
        }
        if self.field.min_poly != rhs.field.min_poly {
            return false;
        }
        // Same polynomial: the designated roots agree exactly when the
        // intersection of the two isolating intervals still holds a root.
        let (alo, ahi) = self.field.root_window();
        let (blo, bhi) = rhs.field.root_window();
        let lo = alo.max(blo);
        let hi = ahi.min(bhi);
        if lo >= hi {
            return false;
        }
        roots_in_interval(&self.field.min_poly, &lo, &hi) == 1
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(self.same_field(rhs), "mixed number fields");
        FieldElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            field: Arc::clone(&self.field),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert!(self.same_field(rhs), "mixed number fields");
        FieldElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
            field: Arc::clone(&self.field),
        }
    }

    pub fn neg(&self) -> Self {
        FieldElement {
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
            field: Arc::clone(&self.field),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert!(self.same_field(rhs), "mixed number fields");
        let k = self.field.degree;
        let mut prod = vec![BigRational::zero(); 2 * k - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                prod[i + j] += a * b;
            }
        }
        FieldElement {
            coeffs: self.field.reduce(prod),
            field: Arc::clone(&self.field),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// the minimal polynomial.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero field element");
        let mut a = self.field.min_poly.clone();
        let mut b: Poly = self.coeffs.clone();
        poly_trim(&mut b);
        // Bezout coefficients tracking only the b-side multiplier.
        let mut t0: Poly = vec![BigRational::zero()];
        let mut t1: Poly = vec![BigRational::one()];
        while !poly_is_zero(&b) && poly_deg(&b) > 0 {
            let (q, r) = poly_divmod(&a, &b);
            // t2 = t0 - q * t1
            let mut qt = vec![BigRational::zero(); q.len() + t1.len()];
            for (i, qc) in q.iter().enumerate() {
                for (j, tc) in t1.iter().enumerate() {
                    qt[i + j] += qc * tc;
                }
            }
            let mut t2 = vec![BigRational::zero(); t0.len().max(qt.len())];
            for (i, c) in t0.iter().enumerate() {
                t2[i] += c;
            }
            for (i, c) in qt.iter().enumerate() {
                t2[i] -= c;
            }
            poly_trim(&mut t2);
            a = b;
            b = r;
            t0 = t1;
            t1 = t2;
        }
        assert!(
            !poly_is_zero(&b),
            "element shares a factor with the minimal polynomial"
        );
        // b is the constant gcd; the inverse is t1 / b.
        let c = b[0].clone();
        let coeffs: Poly = t1.iter().map(|t| t / &c).collect();
        FieldElement {
            coeffs: self.field.reduce(coeffs),
            field: Arc::clone(&self.field),
        }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inv())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        FieldElement {
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
            field: Arc::clone(&self.field),
        }
    }

    /// Interval evaluation of the element over the current root window.
    fn eval_interval(&self) -> (BigRational, BigRational) {
        let (lo, hi) = self.field.root_window();
        // Horner with rational interval arithmetic.
        let mut alo = BigRational::zero();
        let mut ahi = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            // (alo, ahi) * (lo, hi)
            let cands = [&alo * &lo, &alo * &hi, &ahi * &lo, &ahi * &hi];
            let mut nlo = cands[0].clone();
            let mut nhi = cands[0].clone();
            for v in &cands[1..] {
                if *v < nlo {
                    nlo = v.clone();
                }
                if *v > nhi {
                    nhi = v.clone();
                }
            }
            alo = nlo + c;
            ahi = nhi + c;
        }
        (alo, ahi)
    }

    /// Exact sign. Refines the shared root interval until the interval
    /// evaluation excludes zero.
    pub fn sign(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        if let Some(r) = self.as_rational() {
            return r.cmp(&BigRational::zero());
        }
        for round in 0.. {
            let (lo, hi) = self.eval_interval();
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            if round > 4096 {
                panic!("sign refinement did not converge; the minimal polynomial is not irreducible");
            }
            self.field.refine_once();
        }
        unreachable!()
    }

    pub fn cmp(&self, rhs: &Self) -> Ordering {
        self.sub(rhs).sign()
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    /// Rounds to a `RealHp` of the requested precision.
    pub fn to_real(&self, prec: u32) -> RealHp {
        // Refine until the interval evaluation pins down `prec + 8` bits.
        loop {
            let (lo, hi) = self.eval_interval();
            let mid = (&lo + &hi) / BigRational::from(BigInt::from(2));
            let width = &hi - &lo;
            let scale = if mid.is_zero() {
                BigRational::one()
            } else {
                mid.abs()
            };
            // width < scale * 2^-(prec+8) ?
            let mut thr = scale;
            for _ in 0..((prec + 8) / 16 + 1) {
                thr /= BigRational::from(BigInt::from(1u32 << 16));
            }
            if width < thr || width.is_zero() {
                return RealHp::from_ratio(&mid, prec);
            }
            self.field.refine_once();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Q(phi) with phi^2 = phi + 1, phi in (1, 2).
    pub fn golden_field() -> Arc<NumberField> {
        NumberField::new(vec![rat(-1, 1), rat(-1, 1), rat(1, 1)], rat(1, 1), rat(2, 1)).unwrap()
    }

    #[test]
    fn golden_identities() {
        let f = golden_field();
        let phi = f.theta();
        let one = f.from_rational(rat(1, 1));
        // phi^2 = phi + 1
        assert!(phi.mul(&phi).sub(&phi.add(&one)).is_zero());
        // phi > 1, 2 - phi > 0, phi - 1 - (2 - phi) = 2 phi - 3 > 0
        assert_eq!(phi.sub(&one).sign(), Ordering::Greater);
        let two = f.from_rational(rat(2, 1));
        assert_eq!(two.sub(&phi).sign(), Ordering::Greater);
        let d = phi.sub(&one).sub(&two.sub(&phi));
        assert_eq!(d.sign(), Ordering::Greater);
        // 1/phi = phi - 1
        assert!(phi.inv().sub(&phi.sub(&one)).is_zero());
    }

    #[test]
    fn golden_to_real() {
        let f = golden_field();
        let phi = f.theta().to_real(128);
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-14);
    }

    #[test]
    fn cubic_field() {
        // x^3 - x - 1, real root ~ 1.3247 (the plastic number).
        let f = NumberField::new(
            vec![rat(-1, 1), rat(-1, 1), rat(0, 1), rat(1, 1)],
            rat(1, 1),
            rat(2, 1),
        )
        .unwrap();
        let t = f.theta();
        let t3 = t.mul(&t).mul(&t);
        assert!(t3.sub(&t.add(&f.from_rational(rat(1, 1)))).is_zero());
        assert!((t.to_real(96).to_f64() - 1.324717957244746).abs() < 1e-12);
        // inverse: 1/theta = theta^2 - 1
        let inv = t.inv();
        let expect = t.mul(&t).sub(&f.from_rational(rat(1, 1)));
        assert!(inv.sub(&expect).is_zero());
    }

    #[test]
    fn rejects_reducible() {
        // (x-1)(x-2) = x^2 - 3x + 2 has rational roots.
        assert!(NumberField::new(vec![rat(2, 1), rat(-3, 1), rat(1, 1)], rat(0, 1), rat(3, 2)).is_err());
        // Degree 1 rejected.
        assert!(NumberField::new(vec![rat(-1, 1), rat(1, 1)], rat(0, 1), rat(2, 1)).is_err());
    }

    #[test]
    fn rejects_bad_interval() {
        // Interval containing both roots of x^2 - 2.
        assert!(NumberField::new(vec![rat(-2, 1), rat(0, 1), rat(1, 1)], rat(-2, 1), rat(2, 1)).is_err());
    }
}
