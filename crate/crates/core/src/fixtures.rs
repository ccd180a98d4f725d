//! Canned instances and deterministic sampling used by the command-line
//! driver, the examples, and the test suites.

use crate::iet::Iet;
use crate::perm::{make_permutation, PermutationPair};
use crate::scalar::{NumberField, RealHp, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Q(phi), phi^2 = phi + 1, with the positive root isolated in (1, 2).
pub fn golden_field() -> Arc<NumberField> {
    NumberField::new(vec![rat(-1, 1), rat(-1, 1), rat(1, 1)], rat(1, 1), rat(2, 1)).unwrap()
}

/// The golden rotation datum: lambda = (phi - 1, 2 - phi).
pub fn golden_iet() -> Iet {
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

/// The contracted direction (1, -phi) of the golden period matrix.
pub fn golden_stable_omega() -> Vec<Scalar> {
    let f = golden_field();
    vec![
        Scalar::Alg(f.from_rational(rat(1, 1))),
        Scalar::Alg(f.theta().neg()),
    ]
}

/// Rotation by `n/d` as a two-interval exchange.
pub fn rotation_iet(n: i64, d: i64) -> Iet {
    let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
    Iet::new(p, vec![Scalar::ratio(d - n, d), Scalar::ratio(n, d)]).unwrap()
}

/// The order-reversing permutation pair on `d` letters.
pub fn symmetric_perm(d: usize) -> PermutationPair {
    let labels: Vec<String> = (0..d)
        .map(|i| char::from_u32('A' as u32 + i as u32).unwrap().to_string())
        .collect();
    let top: Vec<&str> = labels.iter().map(String::as_str).collect();
    let bottom: Vec<&str> = labels.iter().rev().map(String::as_str).collect();
    make_permutation(&top, &bottom).unwrap()
}

/// Deterministic stream for the `instance`-th draw of a seeded experiment.
pub fn rng_for_instance(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance.wrapping_add(1));
    rng
}

/// Uniform in [0, 1) from the top 53 bits; stable across platforms.
pub fn next_unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Random exchange with small-integer rational lengths over the given
/// permutation: `lambda_i = a_i / sum(a)` with `a_i` in `1..=max_num`.
pub fn random_rational_iet(perm: &PermutationPair, rng: &mut ChaCha8Rng, max_num: u64) -> Iet {
    let d = perm.len();
    let nums: Vec<i64> = (0..d)
        .map(|_| (rng.next_u64() % max_num + 1) as i64)
        .collect();
    let total: i64 = nums.iter().sum();
    let lengths = nums
        .into_iter()
        .map(|n| Scalar::ratio(n, total))
        .collect();
    Iet::new(perm.clone(), lengths).unwrap()
}

/// Random exchange with float lengths on the unit simplex.
pub fn random_real_iet(perm: &PermutationPair, rng: &mut ChaCha8Rng, prec: u32) -> Iet {
    let d = perm.len();
    // Exponential spacings give a uniform simplex point.
    let raw: Vec<f64> = (0..d)
        .map(|_| -(1.0 - next_unit(rng)).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let lengths = raw
        .into_iter()
        .map(|v| Scalar::Real(RealHp::from_f64(v / total, prec)))
        .collect();
    Iet::new(perm.clone(), lengths).unwrap()
}

/// Random point of the unit interval as an exact rational on a fine grid.
pub fn random_rational_point(rng: &mut ChaCha8Rng, denom: u64) -> Scalar {
    Scalar::ratio((rng.next_u64() % denom) as i64, denom as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::IntervalMap;

    #[test]
    fn deterministic_streams() {
        let mut a = rng_for_instance(7, 3);
        let mut b = rng_for_instance(7, 3);
        let mut c = rng_for_instance(7, 4);
        let va: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let vb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let vc: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_eq!(va, vb);
        assert_ne!(va, vc);
    }

    #[test]
    fn random_iets_are_valid() {
        let perm = symmetric_perm(4);
        let mut rng = rng_for_instance(42, 0);
        for _ in 0..10 {
            let t = random_rational_iet(&perm, &mut rng, 50);
            assert_eq!(t.lengths().len(), 4);
            let r = random_real_iet(&perm, &mut rng, 128);
            assert!(r.lengths().iter().all(|l| l.is_positive()));
        }
    }
}
