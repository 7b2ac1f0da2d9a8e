use aces_core::arith::{iota, pi, Residue};
use aces_core::channel::{in_vanishing_ideal, sample_error_image, sample_vanishing};
use aces_core::{ArithmeticChannel, RandomSource, RingPoly};
use proptest::prelude::*;

const Q: u64 = 15015;

fn poly() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..Q, 4)
}

fn ring_elt(ch: &ArithmeticChannel, c: Vec<u64>) -> RingPoly {
    ch.ring().from_coeffs(c).unwrap()
}

/// Multiplication in Z_q[X]/(X^4 - 1): exponents wrap mod 4.
fn cyclic_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u128; 4];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[(i + j) % 4] += x as u128 * y as u128;
        }
    }
    out.into_iter().map(|v| (v % Q as u128) as u64).collect()
}

/// Evaluation at ω = 1 is the coefficient sum.
fn coeff_sum(a: &[u64]) -> u64 {
    a.iter()
        .map(|&x| x as u128)
        .sum::<u128>()
        .rem_euclid(Q as u128) as u64
}

proptest! {
    #[test]
    fn pi_inverts_iota(p in 2u64..1000, v in 0u64..1000) {
        let m = Residue::new(v % p, p);
        prop_assert_eq!(pi(p, iota(m)), m);
    }

    #[test]
    fn pi_is_additive_and_multiplicative(p in 2u64..1000, a in -10_000i128..10_000, b in -10_000i128..10_000) {
        prop_assert_eq!(pi(p, a + b), pi(p, a) + pi(p, b));
        prop_assert_eq!(pi(p, a * b), pi(p, a) * pi(p, b));
    }

    #[test]
    fn product_matches_cyclic_oracle(a in poly(), b in poly()) {
        let ch = ArithmeticChannel::desk();
        let got = ch.ring().mul(&ring_elt(&ch, a.clone()), &ring_elt(&ch, b.clone()));
        prop_assert_eq!(got.coeffs().to_vec(), cyclic_mul(&a, &b));
    }

    #[test]
    fn channel_is_a_ring_morphism(a in poly(), b in poly()) {
        let ch = ArithmeticChannel::desk();
        let ring = ch.ring();
        let (pa, pb) = (ring_elt(&ch, a.clone()), ring_elt(&ch, b.clone()));
        prop_assert_eq!(ch.eval(&pa), coeff_sum(&a));
        prop_assert_eq!(ch.eval(&ring.add(&pa, &pb)), (coeff_sum(&a) + coeff_sum(&b)) % Q);
        prop_assert_eq!(ch.eval(&ring.mul(&pa, &pb)), coeff_sum(&a) * coeff_sum(&b) % Q);
        prop_assert_eq!(ch.eval(&ring.one()), 1);
    }

    #[test]
    fn error_images_hit_their_target(seed: u64, m in 0u64..Q, k in 0u64..100) {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(seed);
        let r = sample_error_image(&ch, m, &mut rng);
        prop_assert_eq!(coeff_sum(r.coeffs()), m);
        let e = sample_vanishing(&ch, k, &mut rng);
        let v = coeff_sum(e.coeffs());
        prop_assert!(v.is_multiple_of(2) && v / 2 <= k);
        prop_assert!(in_vanishing_ideal(&ch, &e, k));
    }

    #[test]
    fn vanishing_ideals_compose(seed: u64, k1 in 0u64..60, k2 in 0u64..60, m1 in 0u64..Q, m2 in 0u64..Q) {
        let ch = ArithmeticChannel::desk();
        let ring = ch.ring();
        let mut rng = RandomSource::from_u64(seed);
        let e1 = sample_vanishing(&ch, k1, &mut rng);
        let e2 = sample_vanishing(&ch, k2, &mut rng);
        prop_assert!(in_vanishing_ideal(&ch, &ring.add(&e1, &e2), k1 + k2));
        // level (k1 k2 p) suffices for a product of two vanishing elements
        prop_assert!(in_vanishing_ideal(&ch, &ring.mul(&e1, &e2), k1 * k2 * 2));
        let r1 = sample_error_image(&ch, m1, &mut rng);
        let r2 = sample_error_image(&ch, m2, &mut rng);
        prop_assert_eq!(ch.eval(&ring.add(&r1, &r2)), (m1 + m2) % Q);
        prop_assert_eq!(ch.eval(&ring.mul(&r1, &r2)), m1 * m2 % Q);
    }
}
