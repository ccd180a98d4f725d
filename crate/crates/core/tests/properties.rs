//! Property tests for the evaluation and cocycle layers.

use iet_core::cocycle::accumulate_chain;
use iet_core::fixtures::{golden_iet, rng_for_instance, symmetric_perm};
use iet_core::{Aiet, Error, Iet, InductionChain, IntervalMap, PermutationPair, RealHp, Scalar};
use proptest::prelude::*;
use std::cmp::Ordering;

fn arb_lengths(d: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    proptest::collection::vec((1i64..200, 1i64..200), d)
}

fn iet_from(perm: &PermutationPair, raw: &[(i64, i64)]) -> Iet {
    let lengths: Vec<Scalar> = raw.iter().map(|(n, d)| Scalar::ratio(*n, *d)).collect();
    Iet::new(perm.clone(), lengths).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_evaluation_is_a_bijection(raw in arb_lengths(4), num in 0i64..1000) {
        let perm = symmetric_perm(4);
        let t = iet_from(&perm, &raw);
        let x = t.total_len().mul(&Scalar::ratio(num, 1000));
        let y = t.evaluate(&x).unwrap();
        prop_assert!(y.sign() != Ordering::Less);
        prop_assert!(y.cmp(t.total_len()) == Ordering::Less);
        let back = t.evaluate_inverse(&y).unwrap();
        prop_assert!(back.cmp(&x) == Ordering::Equal);
    }

    #[test]
    fn lebesgue_preserved_on_subintervals(raw in arb_lengths(3), a in 0i64..999, w in 1i64..500) {
        let perm = symmetric_perm(3);
        let t = iet_from(&perm, &raw);
        let b = (a + w).min(1000);
        let lo = t.total_len().mul(&Scalar::ratio(a, 1000));
        let hi = t.total_len().mul(&Scalar::ratio(b, 1000));
        // Split [lo, hi) at the discontinuities; each piece translates.
        let mut cuts = vec![lo.clone()];
        for s in t.singularities() {
            if s.cmp(&lo) == Ordering::Greater && s.cmp(&hi) == Ordering::Less {
                cuts.push(s);
            }
        }
        cuts.push(hi.clone());
        cuts.sort_by(|x, y| x.cmp(y));
        let mut image_total = Scalar::zero();
        for pair in cuts.windows(2) {
            let width = pair[1].sub(&pair[0]);
            if width.is_zero() { continue; }
            // Translation pieces keep their width.
            image_total = image_total.add(&width);
            // And the piece endpoints map consistently.
            let mid = pair[0].add(&width.mul(&Scalar::ratio(1, 2)));
            let y = t.evaluate(&mid).unwrap();
            prop_assert!(y.cmp(t.total_len()) == Ordering::Less);
        }
        prop_assert!(image_total.cmp(&hi.sub(&lo)) == Ordering::Equal);
    }

    #[test]
    fn cocycle_composition_at_random_split(raw in arb_lengths(3), k in 0usize..12) {
        let perm = symmetric_perm(3);
        let t = iet_from(&perm, &raw);
        let mut chain = InductionChain::new(t);
        let reached = match chain.ensure_depth(12) {
            Ok(()) => 12,
            Err(Error::Connection { step, .. }) => step,
            Err(_) => 0,
        };
        let k = k.min(reached);
        let z = accumulate_chain(&chain, 0, reached);
        let a = accumulate_chain(&chain, k, reached);
        let b = accumulate_chain(&chain, 0, k);
        prop_assert_eq!(a.mul(&b), z);
    }

    #[test]
    fn one_step_matrices_are_unimodular(raw in arb_lengths(4)) {
        let perm = symmetric_perm(4);
        let t = iet_from(&perm, &raw);
        let mut chain = InductionChain::new(t);
        let reached = match chain.ensure_depth(10) {
            Ok(()) => 10,
            Err(Error::Connection { step, .. }) => step,
            Err(_) => 0,
        };
        for n in 0..=reached {
            let z = accumulate_chain(&chain, 0, n);
            prop_assert!(z.is_nonnegative());
            prop_assert_eq!(z.det(), num_bigint::BigInt::from(1));
        }
    }

    #[test]
    fn inverse_step_roundtrip(raw in arb_lengths(3)) {
        let perm = symmetric_perm(3);
        let t = iet_from(&perm, &raw);
        if let Ok((next, mv)) = iet_core::rv_step(&t, 80) {
            let back = iet_core::inverse_rv_step(&next, &mv).unwrap();
            for (a, b) in back.lengths().iter().zip(t.lengths()) {
                prop_assert!(a.cmp(b) == Ordering::Equal);
            }
            // And the forward step of the reconstruction reproduces the move.
            let (again, mv2) = iet_core::rv_step(&back, 80).unwrap();
            prop_assert_eq!(mv2.rv_type, mv.rv_type);
            prop_assert_eq!(mv2.winner, mv.winner);
            for (a, b) in again.lengths().iter().zip(next.lengths()) {
                prop_assert!(a.cmp(b) == Ordering::Equal);
            }
        }
    }
}

#[test]
fn float_evaluation_roundtrip_within_guard() {
    // Ten thousand sampled points must come back within 2^-100 after a
    // forward and an inverse evaluation at 128 bits.
    let prec = 128;
    let perm = symmetric_perm(4);
    let mut rng = rng_for_instance(99, 0);
    let t = iet_core::fixtures::random_real_iet(&perm, &mut rng, prec);
    let tol = RealHp::pow2(-100, prec);
    let total = t.total_len().to_real(prec);
    for k in 0..10_000u64 {
        let frac = (k as f64 + 0.5) / 10_000.0;
        let x = Scalar::Real(total.mul(&RealHp::from_f64(frac, prec)));
        let y = t.evaluate(&x).unwrap();
        let back = t.evaluate_inverse(&y).unwrap();
        let err = back.sub(&x).to_real(prec).abs();
        assert!(err.cmp(&tol) == Ordering::Less, "k = {k}, err = {err}");
    }
}

#[test]
fn affine_roundtrip_and_image_tiling() {
    let prec = 160;
    // An affine exchange built over the golden prefix with a small stable
    // log-slope.
    let t0 = golden_iet();
    let omega = iet_core::fixtures::golden_stable_omega();
    let omega: Vec<Scalar> = omega.iter().map(|w| w.mul(&Scalar::ratio(1, 5))).collect();
    let out = iet_core::affine::build_aiet(
        &t0,
        &omega,
        &iet_core::affine::BuildOptions {
            depth: 40,
            requested_prefix: 10,
            precision: prec,
            ..Default::default()
        },
    )
    .unwrap();
    let t: &Aiet = &out.aiet;
    let tol = RealHp::pow2(-100, prec);
    for k in 0..200u64 {
        let x = Scalar::Real(RealHp::from_f64((k as f64 + 0.5) / 200.0, prec));
        let y = t.evaluate(&x).unwrap();
        let back = t.evaluate_inverse(&y).unwrap();
        let err = back.sub(&x).to_real(prec).abs();
        assert!(err.cmp(&tol) == Ordering::Less, "k = {k}");
    }
    // Image widths sum to the domain length within tolerance.
    let total_image = (0..2u8)
        .map(|i| t.image_width(iet_core::Symbol(i)))
        .fold(Scalar::zero(), |a, b| a.add(&b));
    let defect = total_image.sub(t.total_len()).to_real(prec).abs();
    assert!(defect.cmp(&tol) == Ordering::Less);
}

#[test]
fn locate_floor_oracle_small_heights() {
    // Verify the tower address by explicit backward iteration on an exact
    // instance with manageable heights.
    let t = golden_iet();
    let chain = InductionChain::new(t.clone()).extended_to(10).unwrap();
    let mut rng = rng_for_instance(5, 1);
    for _ in 0..50 {
        let x = iet_core::fixtures::random_rational_point(&mut rng, 104_729);
        let loc = iet_core::cocycle::locate(&chain, 10, &x).unwrap();
        let mut u = x.clone();
        let mut steps = 0u64;
        loop {
            if u.cmp(chain.state(10).total_len()) == Ordering::Less {
                break;
            }
            u = t.evaluate_inverse(&u).unwrap();
            steps += 1;
        }
        // First backward entry time into the inducing interval is the floor.
        assert_eq!(
            num_bigint::BigUint::from(steps),
            loc.floor,
            "floor mismatch at {x}"
        );
        assert_eq!(u.cmp(&loc.base_point), Ordering::Equal);
    }
}
