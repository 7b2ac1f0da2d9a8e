//! Ciphertexts, encryption with the public key or the secret key, decryption
//! and level arithmetic.

use crate::arith::{chi_member, sub_mod, Repartition};
use crate::channel::{sample_error_image, sample_vanishing, ArithmeticChannel, RandomSource};
use crate::error::{AcesError, Result};
use crate::keygen::{sample_divisible, PublicKey, SecretKey};
use crate::poly::RingPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub c: Vec<RingPoly>,
    pub cprime: RingPoly,
    pub level: u64,
}

impl Ciphertext {
    /// `(0, m, level)`.
    pub fn trivial(ch: &ArithmeticChannel, m: u64, level: u64) -> Self {
        Ciphertext {
            c: vec![ch.ring().zero(); ch.n()],
            cprime: ch.ring().constant(m),
            level,
        }
    }

    /// Shape and coefficient checks against a channel.
    pub fn check(&self, ch: &ArithmeticChannel) -> Result<()> {
        if self.c.len() != ch.n() {
            return Err(AcesError::Dimension {
                what: "ciphertext vector",
                expected: ch.n(),
                found: self.c.len(),
            });
        }
        for p in self.c.iter().chain(std::iter::once(&self.cprime)) {
            ch.ring().check(p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelOp {
    Add,
    Mul,
}

/// Result of level arithmetic; overflow is an ordinary outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelAfter {
    Level(u64),
    /// The level the operation would carry, which breaks its guard.
    Overflow(u128),
}

impl LevelAfter {
    pub fn level(self) -> Option<u64> {
        match self {
            LevelAfter::Level(k) => Some(k),
            LevelAfter::Overflow(_) => None,
        }
    }

    /// The level the result would carry, guard or not.
    pub fn raw(self) -> u128 {
        match self {
            LevelAfter::Level(k) => k as u128,
            LevelAfter::Overflow(k) => k,
        }
    }
}

/// Addition gives `k1 + k2` when `(k1 + k2)·p < q`; multiplication gives
/// `L = (k1 + k2 + k1·k2)·p` when `L·p < q`.
pub fn level_after(op: LevelOp, k1: u64, k2: u64, ch: &ArithmeticChannel) -> LevelAfter {
    let (p, q) = (ch.p() as u128, ch.q() as u128);
    let (a, b) = (k1 as u128, k2 as u128);
    let level = match op {
        LevelOp::Add => a + b,
        LevelOp::Mul => a
            .saturating_add(b)
            .saturating_add(a.saturating_mul(b))
            .saturating_mul(p),
    };
    if level.saturating_mul(p) < q {
        LevelAfter::Level(level as u64)
    } else {
        LevelAfter::Overflow(level)
    }
}

/// Level certified for a fresh public-key encryption: `k0·N·p`.
pub fn fresh_level(ch: &ArithmeticChannel) -> u64 {
    ch.k0() * ch.big_n() as u64 * ch.p()
}

/// The garbling vector: `⟦C⟧(b_i)` uniform in `{0, …, p}`.
pub fn sample_mask(ch: &ArithmeticChannel, rng: &mut RandomSource) -> Vec<RingPoly> {
    (0..ch.big_n())
        .map(|_| {
            let t = rng.between(0, ch.p());
            sample_error_image(ch, t, rng)
        })
        .collect()
}

pub fn encrypt(
    ch: &ArithmeticChannel,
    pk: &PublicKey,
    m: u64,
    rng: &mut RandomSource,
) -> Result<Ciphertext> {
    if m >= ch.p() {
        return Err(AcesError::InvalidMessage {
            message: m,
            modulus: ch.p(),
        });
    }
    let b = sample_mask(ch, rng);
    Ok(encrypt_with_mask(ch, pk, m, &b, rng))
}

/// Public-key encryption with a caller-chosen mask.
pub fn encrypt_with_mask(
    ch: &ArithmeticChannel,
    pk: &PublicKey,
    m: u64,
    b: &[RingPoly],
    rng: &mut RandomSource,
) -> Ciphertext {
    let ring = ch.ring();
    let c = (0..ch.n())
        .map(|j| {
            let column: Vec<RingPoly> = pk.f0.iter().map(|row| row[j].clone()).collect();
            ring.dot(&column, b)
        })
        .collect();
    let r = sample_error_image(ch, m, rng);
    let cprime = ring.add(&r, &ring.dot(b, &pk.fprime));
    Ciphertext {
        c,
        cprime,
        level: fresh_level(ch),
    }
}

/// `(c, r(m) + cᵀx + e)` with `c` uniform in the divisibility submodule,
/// `m ∈ Z_q` and `e` in the level-`k` vanishing ideal.
pub fn encrypt_with_secret(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    sk: &SecretKey,
    m: u64,
    k: u64,
    rng: &mut RandomSource,
) -> Ciphertext {
    let ring = ch.ring();
    let c: Vec<RingPoly> = (0..ch.n())
        .map(|i| sample_divisible(ch, rep.weight_of(i), rng))
        .collect();
    let r = sample_error_image(ch, m % ch.q(), rng);
    let e = sample_vanishing(ch, k, rng);
    let cprime = ring.add(&ring.add(&r, &ring.dot(&c, &sk.x)), &e);
    Ciphertext {
        c,
        cprime,
        level: k,
    }
}

/// `⟦C⟧(c' - cᵀx)` as an integer in `[0, q)`.
pub fn noise_value(ch: &ArithmeticChannel, sk: &SecretKey, ct: &Ciphertext) -> u64 {
    let ring = ch.ring();
    ch.eval(&ring.sub(&ct.cprime, &ring.dot(&ct.c, &sk.x)))
}

/// Decryption without the level guard.
pub fn decrypt_unchecked(ch: &ArithmeticChannel, sk: &SecretKey, ct: &Ciphertext) -> u64 {
    noise_value(ch, sk, ct) % ch.p()
}

pub fn decrypt(ch: &ArithmeticChannel, sk: &SecretKey, ct: &Ciphertext) -> Result<u64> {
    if !ch.is_decryptable_level(ct.level) {
        return Err(AcesError::NoiseBudget(format!(
            "level {} exceeds the decryption bound {}",
            ct.level,
            ch.max_decryptable_level()
        )));
    }
    ct.check(ch)?;
    Ok(decrypt_unchecked(ch, sk, ct))
}

/// Whether every `⟦C⟧(c_i)` is divisible by `q_{σ(i)}`.
pub fn in_sigma_submodule(ch: &ArithmeticChannel, rep: &Repartition, c: &[RingPoly]) -> bool {
    c.iter()
        .enumerate()
        .all(|(i, ci)| ch.eval(ci).is_multiple_of(rep.weight_of(i)))
}

/// Membership of `ct` in the encryption space of `m ∈ Z_q` at its level.
pub fn in_encryption_space(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    sk: &SecretKey,
    ct: &Ciphertext,
    m: u64,
) -> bool {
    if !in_sigma_submodule(ch, rep, &ct.c) {
        return false;
    }
    let offset = sub_mod(noise_value(ch, sk, ct), m % ch.q(), ch.q());
    chi_member(ch.p(), ct.level, offset as u128)
}
