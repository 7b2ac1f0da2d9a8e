//! Arithmetic channels `(p, q, ω, u)`, their validation, and the two samplers
//! used throughout the scheme.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::arith::{add_mod, chi_member, inv_mod, mul_mod, reduce_signed, Residue, MAX_MODULUS};
use crate::error::{AcesError, Result};
use crate::poly::{QuotientRing, RingPoly};

/// Raw channel parameters, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelParams {
    pub p: u64,
    pub q: u64,
    pub omega: u64,
    /// Coefficients of `u` over `Z`, lowest degree first, leading 1 included.
    pub u: Vec<i64>,
    pub n: usize,
    pub big_n: usize,
    pub k0: u64,
}

impl ChannelParams {
    /// `ω = 1` and `u = X^degree - 1`.
    pub fn with_defaults(p: u64, q: u64, degree: usize, n: usize, big_n: usize, k0: u64) -> Self {
        let mut u = vec![0i64; degree + 1];
        u[0] = -1;
        u[degree] = 1;
        ChannelParams {
            p,
            q,
            omega: 1,
            u,
            n,
            big_n,
            k0,
        }
    }

    /// p = 2, q = 15015, u = X^4 - 1, n = 3, N = 2.
    pub fn desk() -> Self {
        Self::with_defaults(2, 15015, 4, 3, 2, 1)
    }

    /// p = 2, q = 105, u = X^2 - 1, n = 2, N = 1.
    pub fn micro() -> Self {
        Self::with_defaults(2, 105, 2, 2, 1, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelViolation {
    PlaintextModulusTooSmall { p: u64 },
    ModulusOrder { p: u64, q: u64 },
    ModulusTooLarge { q: u64 },
    NotMonic,
    DegreeTooSmall { degree: usize },
    NotVanishing { residue: u64 },
    SecurityBound { required: u128, q: u64 },
    OmegaNotInvertible { omega: u64 },
    ZeroDimension { what: &'static str },
    ZeroSlack,
}

impl fmt::Display for ChannelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PlaintextModulusTooSmall { p } => write!(f, "p = {p} must be >= 2"),
            Self::ModulusOrder { p, q } => write!(f, "p < q violated (p = {p}, q = {q})"),
            Self::ModulusTooLarge { q } => write!(f, "q = {q} must be below 2^62"),
            Self::NotMonic => write!(f, "u must be monic"),
            Self::DegreeTooSmall { degree } => write!(f, "deg(u) = {degree} must be >= 2"),
            Self::NotVanishing { residue } => {
                write!(f, "u(omega) ≢ 0 mod q (u(omega) mod q = {residue})")
            }
            Self::SecurityBound { required, q } => {
                write!(
                    f,
                    "q ≥ k0·p²·N+1 violated (q = {q}, need at least {required})"
                )
            }
            Self::OmegaNotInvertible { omega } => {
                write!(f, "omega = {omega} is not invertible mod q")
            }
            Self::ZeroDimension { what } => write!(f, "{what} must be positive"),
            Self::ZeroSlack => write!(f, "k0 must be positive"),
        }
    }
}

/// A validated arithmetic channel together with its quotient ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithmeticChannel {
    params: ChannelParams,
    ring: QuotientRing,
    omega_pows: Vec<u64>,
    omega_inv: u64,
}

/// Checks every channel constraint and reports all violations at once.
pub fn validate_channel(params: ChannelParams) -> Result<ArithmeticChannel> {
    let ChannelParams {
        p,
        q,
        omega,
        ref u,
        n,
        big_n,
        k0,
    } = params;
    let mut bad = Vec::new();
    if p < 2 {
        bad.push(ChannelViolation::PlaintextModulusTooSmall { p });
    }
    if p >= q {
        bad.push(ChannelViolation::ModulusOrder { p, q });
    }
    if q >= MAX_MODULUS {
        bad.push(ChannelViolation::ModulusTooLarge { q });
    }
    let monic = u.len() >= 2 && u.last() == Some(&1);
    if !monic {
        bad.push(ChannelViolation::NotMonic);
    }
    let degree = u.len().saturating_sub(1);
    if degree < 2 {
        bad.push(ChannelViolation::DegreeTooSmall { degree });
    }
    if q >= 2 {
        let mut acc = 0u64;
        for &c in u.iter().rev() {
            acc = add_mod(mul_mod(acc, omega % q, q), reduce_signed(c as i128, q), q);
        }
        if acc != 0 {
            bad.push(ChannelViolation::NotVanishing { residue: acc });
        }
    }
    let required = k0 as u128 * (p as u128) * (p as u128) * big_n as u128 + 1;
    if (q as u128) < required {
        bad.push(ChannelViolation::SecurityBound { required, q });
    }
    let omega_inv = if q >= 2 { inv_mod(omega % q, q) } else { None };
    if omega_inv.is_none() {
        bad.push(ChannelViolation::OmegaNotInvertible { omega });
    }
    if n == 0 {
        bad.push(ChannelViolation::ZeroDimension { what: "n" });
    }
    if big_n == 0 {
        bad.push(ChannelViolation::ZeroDimension { what: "N" });
    }
    if k0 == 0 {
        bad.push(ChannelViolation::ZeroSlack);
    }
    if !bad.is_empty() {
        return Err(AcesError::InvalidChannel(bad));
    }

    let ring = QuotientRing::new(q, u)?;
    let mut omega_pows = Vec::with_capacity(degree);
    let mut w = 1u64;
    for _ in 0..degree {
        omega_pows.push(w);
        w = mul_mod(w, omega % q, q);
    }
    Ok(ArithmeticChannel {
        params,
        ring,
        omega_pows,
        omega_inv: omega_inv.unwrap_or(1),
    })
}

impl ArithmeticChannel {
    pub fn new(params: ChannelParams) -> Result<Self> {
        validate_channel(params)
    }

    pub fn desk() -> Self {
        validate_channel(ChannelParams::desk()).expect("desk parameters are valid")
    }

    pub fn micro() -> Self {
        validate_channel(ChannelParams::micro()).expect("micro parameters are valid")
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn ring(&self) -> &QuotientRing {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.params.p
    }

    pub fn q(&self) -> u64 {
        self.params.q
    }

    pub fn omega(&self) -> u64 {
        self.params.omega
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn big_n(&self) -> usize {
        self.params.big_n
    }

    pub fn k0(&self) -> u64 {
        self.params.k0
    }

    pub fn degree(&self) -> usize {
        self.ring.degree()
    }

    /// `⟦C⟧(v) = v(ω) mod q` on canonical coefficients.
    pub fn eval(&self, v: &RingPoly) -> u64 {
        let q = self.q();
        v.coeffs()
            .iter()
            .zip(&self.omega_pows)
            .fold(0, |acc, (&c, &w)| add_mod(acc, mul_mod(c, w, q), q))
    }

    /// Largest level `k` with `k < (q + 1)/p - 1`, i.e. `(k + 1)·p ≤ q`.
    pub fn max_decryptable_level(&self) -> u64 {
        self.q() / self.p() - 1
    }

    pub fn is_decryptable_level(&self, k: u64) -> bool {
        k <= self.max_decryptable_level()
    }
}

/// The channel evaluation as a residue mod q.
pub fn channel_eval(ch: &ArithmeticChannel, v: &RingPoly) -> Residue {
    Residue::new(ch.eval(v), ch.q())
}

/// Seeded, reproducible randomness. The seed is hashed with SHA-256 into a
/// ChaCha20 key, so any byte string is accepted.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn from_seed_bytes(seed: &[u8]) -> Self {
        let digest: [u8; 32] = Sha256::digest(seed).into();
        RandomSource {
            rng: ChaCha20Rng::from_seed(digest),
        }
    }

    pub fn from_u64(seed: u64) -> Self {
        Self::from_seed_bytes(&seed.to_le_bytes())
    }

    /// Uniform in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }

    /// Uniform in `[lo, hi]`.
    pub fn between(&mut self, lo: u64, hi: u64) -> u64 {
        self.rng.gen_range(lo..=hi)
    }

    /// A fresh independent source, derived from this one.
    pub fn fork(&mut self) -> RandomSource {
        let mut seed = [0u8; 32];
        self.rng.fill_bytes(&mut seed);
        RandomSource {
            rng: ChaCha20Rng::from_seed(seed),
        }
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Builds the polynomial whose free coefficients are `free` (all positions
/// except `pivot`, in order) and whose pivot coefficient is solved so that
/// `⟦C⟧` of the result equals `target`.
pub fn error_image_from(
    ch: &ArithmeticChannel,
    target: u64,
    pivot: usize,
    free: &[u64],
) -> Result<RingPoly> {
    let d = ch.degree();
    let q = ch.q();
    if pivot == 0 || pivot >= d {
        return Err(AcesError::Parameter(format!(
            "pivot index {pivot} outside 1..{}",
            d - 1
        )));
    }
    if free.len() != d - 1 {
        return Err(AcesError::Dimension {
            what: "free coefficients",
            expected: d - 1,
            found: free.len(),
        });
    }
    let mut coeffs = Vec::with_capacity(d);
    let mut rest = free.iter();
    for j in 0..d {
        coeffs.push(if j == pivot {
            0
        } else {
            rest.next().copied().unwrap_or(0) % q
        });
    }
    let partial = coeffs
        .iter()
        .zip(&ch.omega_pows)
        .fold(0, |acc, (&c, &w)| add_mod(acc, mul_mod(c, w, q), q));
    let inv_pow = pow_inv(ch, pivot);
    let residual = crate::arith::sub_mod(target % q, partial, q);
    coeffs[pivot] = mul_mod(residual, inv_pow, q);
    ch.ring.from_coeffs(coeffs)
}

fn pow_inv(ch: &ArithmeticChannel, s: usize) -> u64 {
    crate::arith::pow_mod(ch.omega_inv, s as u64, ch.q())
}

/// Random `r` with `⟦C⟧(r) = m`.
pub fn sample_error_image(ch: &ArithmeticChannel, m: u64, rng: &mut RandomSource) -> RingPoly {
    let d = ch.degree();
    let pivot = rng.between(1, d as u64 - 1) as usize;
    let free: Vec<u64> = (0..d - 1).map(|_| rng.below(ch.q())).collect();
    error_image_from(ch, m, pivot, &free).expect("pivot and length are in range")
}

/// Random `e` with `⟦C⟧(e) = p·l` for a uniform `l ∈ {0, …, k}`, capped so that
/// `p·l < q`.
pub fn sample_vanishing(ch: &ArithmeticChannel, k: u64, rng: &mut RandomSource) -> RingPoly {
    let cap = (ch.q() - 1) / ch.p();
    let l = rng.between(0, k.min(cap));
    sample_error_image(ch, ch.p() * l, rng)
}

pub fn in_vanishing_ideal(ch: &ArithmeticChannel, e: &RingPoly, k: u64) -> bool {
    chi_member(ch.p(), k, ch.eval(e) as u128)
}
