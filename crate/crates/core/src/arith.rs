//! Exact modular integer arithmetic.
//!
//! Residues are kept as canonical representatives in `[0, modulus)`. All
//! products go through `u128`, which is exact for any modulus below `2^62`.

use serde::{Deserialize, Serialize};

use crate::error::{AcesError, Result};

/// Largest supported ciphertext modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

/// An element of `Z_n` held as its canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Reduces `value` into `[0, modulus)`. Panics if `modulus < 2`.
    pub fn new(value: u64, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        Residue {
            value: value % modulus,
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl std::ops::Add for Residue {
    type Output = Residue;

    fn add(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Residue::new(add_mod(self.value, rhs.value, self.modulus), self.modulus)
    }
}

impl std::ops::Sub for Residue {
    type Output = Residue;

    fn sub(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Residue::new(sub_mod(self.value, rhs.value, self.modulus), self.modulus)
    }
}

impl std::ops::Mul for Residue {
    type Output = Residue;

    fn mul(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Residue::new(mul_mod(self.value, rhs.value, self.modulus), self.modulus)
    }
}

impl std::ops::Neg for Residue {
    type Output = Residue;

    fn neg(self) -> Residue {
        Residue::new(sub_mod(0, self.value, self.modulus), self.modulus)
    }
}

/// The inclusion `Z_p -> Z`: the canonical representative as an integer.
pub fn iota(m: Residue) -> i128 {
    m.value as i128
}

/// The surjection `Z -> Z_p`.
pub fn pi(p: u64, z: i128) -> Residue {
    assert!(p >= 2, "modulus must be at least 2");
    let r = z.rem_euclid(p as i128);
    Residue::new(r as u64, p)
}

/// Euclidean division of `iota(m)` by `p`: returns `(quotient, remainder)`
/// with `iota(m) = p * quotient + iota(remainder)`.
pub fn euclid_div_p(p: u64, m: Residue) -> (u64, Residue) {
    assert!(p >= 2 && p <= m.modulus());
    (m.value / p, Residue::new(m.value % p, p))
}

/// Membership in `{0, p, 2p, ..., kp}`.
pub fn chi_member(p: u64, k: u64, z: u128) -> bool {
    let p = p as u128;
    z.is_multiple_of(p) && z / p <= k as u128
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    let (a, b) = (a % m, b % m);
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduces a signed integer into `[0, m)`.
#[inline]
pub fn reduce_signed(z: i128, m: u64) -> u64 {
    z.rem_euclid(m as i128) as u64
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid on two integers: `(g, s, t)` with `s*a + t*b = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Multiplicative inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, s, _) = ext_gcd(a as i128, m as i128);
    (g == 1).then(|| reduce_signed(s, m))
}

/// Bezout coefficients for a sequence: returns `(g, mu)` with
/// `sum(values[k] * mu[k]) = g = gcd(values)`.
pub fn bezout(values: &[i128]) -> (i128, Vec<i128>) {
    let mut mu = vec![0i128; values.len()];
    let Some((&first, rest)) = values.split_first() else {
        return (0, mu);
    };
    let mut g = first;
    mu[0] = 1;
    if g < 0 {
        g = -g;
        mu[0] = -1;
    }
    for (idx, &v) in rest.iter().enumerate() {
        let (g2, s, t) = ext_gcd(g, v);
        for m in mu.iter_mut().take(idx + 1) {
            *m = m.checked_mul(s).expect("bezout coefficient overflow");
        }
        mu[idx + 1] = t;
        g = g2;
    }
    (g, mu)
}

/// Distinct prime factors of `q` in increasing order, by trial division.
pub fn factorize(q: u64) -> Vec<u64> {
    assert!(q >= 2, "factorize requires q >= 2");
    let mut primes = Vec::new();
    let mut rest = q;
    let mut f = 2u64;
    while (f as u128) * (f as u128) <= rest as u128 {
        if rest.is_multiple_of(f) {
            primes.push(f);
            while rest.is_multiple_of(f) {
                rest /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        primes.push(rest);
    }
    primes
}

/// An `n`-repartition of `q`: assigns each secret-key coordinate either the
/// unit weight (index 0) or one of the distinct prime factors of `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repartition {
    sigma: Vec<usize>,
    primes: Vec<u64>,
}

impl Repartition {
    /// `primes` must be the increasing prime factors of `q`; every entry of
    /// `sigma` must lie in `0..=primes.len()`.
    pub fn new(sigma: Vec<usize>, primes: Vec<u64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(AcesError::Parameter("repartition needs n >= 1".into()));
        }
        if let Some(bad) = sigma.iter().find(|&&s| s > primes.len()) {
            return Err(AcesError::Parameter(format!(
                "repartition index {bad} exceeds number of prime factors {}",
                primes.len()
            )));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AcesError::Parameter(
                "prime factors must be strictly increasing".into(),
            ));
        }
        if let Some(&bad) = primes.iter().find(|&&p| p < 2 || factorize(p) != vec![p]) {
            return Err(AcesError::Parameter(format!("{bad} is not prime")));
        }
        Ok(Repartition { sigma, primes })
    }

    /// Builds a repartition for `q` from the factorization of `q`.
    pub fn for_modulus(sigma: Vec<usize>, q: u64) -> Result<Self> {
        Repartition::new(sigma, factorize(q))
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `q_{sigma(i)}` with the convention `q_0 = 1`.
    pub fn weight_of(&self, i: usize) -> u64 {
        match self.sigma[i] {
            0 => 1,
            s => self.primes[s - 1],
        }
    }

    /// Checks that every listed prime divides `q`.
    pub fn divides(&self, q: u64) -> bool {
        self.primes.iter().all(|&p| q.is_multiple_of(p))
    }
}

/// `sigma[q]_{i,j}`: `q / (q_s(i) q_s(j))` when the assignments differ,
/// `q / q_s(i)` when they coincide.
pub fn repartition_weight(rep: &Repartition, q: u64, i: usize, j: usize) -> Result<u64> {
    let n = rep.n();
    if i >= n || j >= n {
        return Err(AcesError::Parameter(format!(
            "repartition index ({i}, {j}) out of range for n = {n}"
        )));
    }
    let (qi, qj) = (rep.weight_of(i), rep.weight_of(j));
    if rep.sigma()[i] == rep.sigma()[j] {
        Ok(q / qi)
    } else {
        Ok(q / (qi * qj))
    }
}

/// `sum(a_i * b_i)` over integers, represented as `quot * q + rem` with
/// `rem < q`. Exact for any length since each term is split on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DotSplit {
    pub quot: u128,
    pub rem: u64,
}

impl DotSplit {
    pub fn compute(a: &[u64], b: &[u64], q: u64) -> DotSplit {
        debug_assert_eq!(a.len(), b.len());
        let q128 = q as u128;
        let mut quot = 0u128;
        let mut rem = 0u128;
        for (&x, &y) in a.iter().zip(b) {
            let t = x as u128 * y as u128;
            quot += t / q128;
            rem += t % q128;
            if rem >= q128 {
                quot += rem / q128;
                rem %= q128;
            }
        }
        DotSplit {
            quot,
            rem: rem as u64,
        }
    }
}
