//! Homomorphic addition, multiplication and the λ-scalar product.

use crate::channel::ArithmeticChannel;
use crate::cipher::{level_after, Ciphertext, LevelAfter, LevelOp};
use crate::error::{AcesError, Result};
use crate::keygen::LambdaTensor;
use crate::poly::RingPoly;

fn guarded(ch: &ArithmeticChannel, op: LevelOp, k1: u64, k2: u64) -> Result<u64> {
    match level_after(op, k1, k2, ch) {
        LevelAfter::Level(k) => Ok(k),
        LevelAfter::Overflow(k) => Err(AcesError::NoiseBudget(format!(
            "{op:?} of levels {k1} and {k2} would reach {k}, beyond the guard for q = {}",
            ch.q()
        ))),
    }
}

fn same_shape(ch: &ArithmeticChannel, a: &Ciphertext, b: &Ciphertext) -> Result<()> {
    a.check(ch)?;
    b.check(ch)
}

/// `(c1 + c2, c1' + c2')` at level `k1 + k2`.
pub fn hom_add(ch: &ArithmeticChannel, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    same_shape(ch, a, b)?;
    let level = guarded(ch, LevelOp::Add, a.level, b.level)?;
    let ring = ch.ring();
    Ok(Ciphertext {
        c: a.c.iter().zip(&b.c).map(|(x, y)| ring.add(x, y)).collect(),
        cprime: ring.add(&a.cprime, &b.cprime),
        level,
    })
}

/// Component `k` is `Σ_{i,j} λ_{ij}^k · v1_i · v2_j`.
pub fn boxtimes(
    ch: &ArithmeticChannel,
    lam: &LambdaTensor,
    v1: &[RingPoly],
    v2: &[RingPoly],
) -> Result<Vec<RingPoly>> {
    let n = lam.n();
    for (what, len) in [("left operand", v1.len()), ("right operand", v2.len())] {
        if len != n {
            return Err(AcesError::Dimension {
                what,
                expected: n,
                found: len,
            });
        }
    }
    let ring = ch.ring();
    let mut out = vec![ring.zero(); n];
    for i in 0..n {
        for j in 0..n {
            let prod = ring.mul(&v1[i], &v2[j]);
            if prod.is_zero() {
                continue;
            }
            for (k, slot) in out.iter_mut().enumerate() {
                let w = lam.get(i, j, k);
                if w != 0 {
                    *slot = ring.add(slot, &ring.scale(&prod, w));
                }
            }
        }
    }
    Ok(out)
}

/// `(c2'·c1 + c1'·c2 - c1 ⊠ c2, c1'·c2')` at level `(k1 + k2 + k1·k2)·p`.
pub fn hom_mul(
    ch: &ArithmeticChannel,
    lam: &LambdaTensor,
    a: &Ciphertext,
    b: &Ciphertext,
) -> Result<Ciphertext> {
    same_shape(ch, a, b)?;
    let level = guarded(ch, LevelOp::Mul, a.level, b.level)?;
    let ring = ch.ring();
    let cross = boxtimes(ch, lam, &a.c, &b.c)?;
    let c =
        a.c.iter()
            .zip(&b.c)
            .zip(&cross)
            .map(|((c1, c2), x)| {
                let lin = ring.add(&ring.mul(&b.cprime, c1), &ring.mul(&a.cprime, c2));
                ring.sub(&lin, x)
            })
            .collect();
    Ok(Ciphertext {
        c,
        cprime: ring.mul(&a.cprime, &b.cprime),
        level,
    })
}

/// Left-to-right `⊕`-fold of the pairwise `⊗` products.
pub fn scalar_product(
    ch: &ArithmeticChannel,
    lam: &LambdaTensor,
    gamma: &[Ciphertext],
    rho: &[Ciphertext],
) -> Result<Ciphertext> {
    if gamma.len() != rho.len() {
        return Err(AcesError::Dimension {
            what: "scalar product operands",
            expected: gamma.len(),
            found: rho.len(),
        });
    }
    if gamma.is_empty() {
        return Err(AcesError::Parameter(
            "scalar product of empty sequences".into(),
        ));
    }
    let step = |i: usize, r: Result<Ciphertext>| {
        r.map_err(|e| match e {
            AcesError::NoiseBudget(msg) => AcesError::NoiseBudget(format!("step {}: {msg}", i + 1)),
            other => other,
        })
    };
    let mut acc = step(0, hom_mul(ch, lam, &gamma[0], &rho[0]))?;
    for i in 1..gamma.len() {
        let prod = step(i, hom_mul(ch, lam, &gamma[i], &rho[i]))?;
        acc = step(i, hom_add(ch, &acc, &prod))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RandomSource;
    use crate::cipher::{decrypt, encrypt, encrypt_with_secret, in_encryption_space};
    use crate::keygen::keygen;

    #[test]
    fn add_and_mul_at_desk() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(21);
        let b = keygen(&ch, &mut rng).unwrap();
        let (sk, pk, lam) = (&b.secret, &b.public.key, &b.public.lambda);
        for m1 in 0..2 {
            for m2 in 0..2 {
                let c1 = encrypt(&ch, pk, m1, &mut rng).unwrap();
                let c2 = encrypt(&ch, pk, m2, &mut rng).unwrap();
                let s = hom_add(&ch, &c1, &c2).unwrap();
                assert_eq!(s.level, 8);
                assert_eq!(decrypt(&ch, sk, &s).unwrap(), (m1 + m2) % 2);
                assert!(in_encryption_space(&ch, &b.public.rep, sk, &s, m1 + m2));
                let p = hom_mul(&ch, lam, &c1, &c2).unwrap();
                assert_eq!(p.level, (4 + 4 + 16) * 2);
                assert_eq!(decrypt(&ch, sk, &p).unwrap(), m1 * m2);
                assert!(in_encryption_space(&ch, &b.public.rep, sk, &p, m1 * m2));
            }
        }
    }

    #[test]
    fn multiplicative_identity() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(22);
        let b = keygen(&ch, &mut rng).unwrap();
        let one = encrypt_with_secret(&ch, &b.public.rep, &b.secret, 1, 0, &mut rng);
        for m in 0..2 {
            let ct = encrypt(&ch, &b.public.key, m, &mut rng).unwrap();
            let p = hom_mul(&ch, &b.public.lambda, &ct, &one).unwrap();
            assert_eq!(decrypt(&ch, &b.secret, &p).unwrap(), m);
        }
    }

    #[test]
    fn boxtimes_zero_cases() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(23);
        let b = keygen(&ch, &mut rng).unwrap();
        let zero = vec![ch.ring().zero(); 3];
        let v = b.public.key.f0[0].clone();
        assert!(boxtimes(&ch, &b.public.lambda, &zero, &v)
            .unwrap()
            .iter()
            .all(RingPoly::is_zero));
        assert!(matches!(
            boxtimes(&ch, &b.public.lambda, &v[..2], &v),
            Err(AcesError::Dimension { .. })
        ));
    }

    #[test]
    fn overflow_is_rejected() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(24);
        let b = keygen(&ch, &mut rng).unwrap();
        let mut ct = encrypt(&ch, &b.public.key, 1, &mut rng).unwrap();
        ct.level = 4800;
        let other = Ciphertext {
            level: 48,
            ..ct.clone()
        };
        assert!(matches!(
            hom_mul(&ch, &b.public.lambda, &ct, &other),
            Err(AcesError::NoiseBudget(_))
        ));
    }

    #[test]
    fn scalar_product_matches_dot_product() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(25);
        let b = keygen(&ch, &mut rng).unwrap();
        let ms = [(1, 1), (0, 1), (1, 1)];
        let g: Vec<_> = ms
            .iter()
            .map(|&(a, _)| encrypt(&ch, &b.public.key, a, &mut rng).unwrap())
            .collect();
        let r: Vec<_> = ms
            .iter()
            .map(|&(_, c)| encrypt(&ch, &b.public.key, c, &mut rng).unwrap())
            .collect();
        let sp = scalar_product(&ch, &b.public.lambda, &g, &r).unwrap();
        assert_eq!(decrypt(&ch, &b.secret, &sp).unwrap(), 0);
        let single = scalar_product(&ch, &b.public.lambda, &g[..1], &r[..1]).unwrap();
        assert_eq!(
            single,
            hom_mul(&ch, &b.public.lambda, &g[0], &r[0]).unwrap()
        );
    }
}
