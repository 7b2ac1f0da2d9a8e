//! Key material: secret key, initializer, public key, repartition, λ tensor
//! and refresher.

use crate::arith::{bezout, gcd, reduce_signed, repartition_weight, Repartition};
use crate::channel::{sample_error_image, sample_vanishing, ArithmeticChannel, RandomSource};
use crate::cipher::{encrypt_with_secret, Ciphertext};
use crate::error::{AcesError, Result};
use crate::poly::RingPoly;

/// Attempts allowed when resampling a secret key or a repartition.
pub const RESAMPLE_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub x: Vec<RingPoly>,
}

impl SecretKey {
    /// `ι_q(⟦C⟧(x_i))` for every component.
    pub fn images(&self, ch: &ArithmeticChannel) -> Vec<u64> {
        self.x.iter().map(|xi| ch.eval(xi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    /// `N × n` initializer.
    pub f0: Vec<Vec<RingPoly>>,
    /// `f0·x + e`, length `N`.
    pub fprime: Vec<RingPoly>,
}

/// Flat `n × n × n` tensor indexed as `(i, j, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaTensor {
    n: usize,
    data: Vec<u64>,
}

impl LambdaTensor {
    pub fn zeros(n: usize) -> Self {
        LambdaTensor {
            n,
            data: vec![0; n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: u64) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
    }

    /// The vector `(λ_{ij}^k)_k`.
    pub fn slice(&self, i: usize, j: usize) -> &[u64] {
        let start = (i * self.n + j) * self.n;
        &self.data[start..start + self.n]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refresher {
    pub kappa: Vec<u64>,
    pub rho: Vec<Ciphertext>,
}

/// Everything that may be published.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicMaterial {
    pub key: PublicKey,
    pub rep: Repartition,
    pub lambda: LambdaTensor,
    pub refresher: Refresher,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBundle {
    pub secret: SecretKey,
    pub public: PublicMaterial,
}

fn weighted_images(ch: &ArithmeticChannel, rep: &Repartition, sk: &SecretKey) -> Vec<i128> {
    sk.images(ch)
        .iter()
        .enumerate()
        .map(|(k, &v)| rep.weight_of(k) as i128 * v as i128)
        .collect()
}

/// `gcd_k(q_{σ(k)} · ι_q(⟦C⟧(x_k)))`.
pub fn secret_gcd(ch: &ArithmeticChannel, rep: &Repartition, sk: &SecretKey) -> u128 {
    weighted_images(ch, rep, sk)
        .into_iter()
        .fold(0, |g, v| gcd(g, v as u128))
}

/// Draws `n` uniform ring elements until the gcd condition holds.
pub fn gen_secret(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    rng: &mut RandomSource,
) -> Result<SecretKey> {
    let n = ch.n();
    if rep.n() != n {
        return Err(AcesError::Dimension {
            what: "repartition length",
            expected: n,
            found: rep.n(),
        });
    }
    if n == 1 {
        // gcd of a single value is the value itself, so it must be 1
        if rep.weight_of(0) != 1 {
            return Err(AcesError::KeyGeneration(format!(
                "n = 1 requires sigma(1) = 0, got prime {}",
                rep.weight_of(0)
            )));
        }
        return Ok(SecretKey {
            x: vec![sample_error_image(ch, 1, rng)],
        });
    }
    let ring = ch.ring();
    for _ in 0..RESAMPLE_CAP {
        let x: Vec<RingPoly> = (0..n)
            .map(|_| {
                let coeffs = (0..ch.degree()).map(|_| rng.below(ch.q())).collect();
                ring.from_coeffs(coeffs).expect("canonical coefficients")
            })
            .collect();
        let sk = SecretKey { x };
        if secret_gcd(ch, rep, &sk) == 1 {
            return Ok(sk);
        }
    }
    Err(AcesError::KeyGeneration(format!(
        "no secret key met the gcd condition within {RESAMPLE_CAP} attempts"
    )))
}

/// Entry `(i, j)` has `⟦C⟧` divisible by `q_{σ(j)}`.
pub fn gen_initializer(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    rng: &mut RandomSource,
) -> Vec<Vec<RingPoly>> {
    (0..ch.big_n())
        .map(|_| {
            (0..ch.n())
                .map(|j| sample_divisible(ch, rep.weight_of(j), rng))
                .collect()
        })
        .collect()
}

/// A random ring element whose channel image is a multiple of `w`.
pub(crate) fn sample_divisible(ch: &ArithmeticChannel, w: u64, rng: &mut RandomSource) -> RingPoly {
    let t = rng.below(ch.q());
    let target = ((w as u128 * t as u128) % ch.q() as u128) as u64;
    sample_error_image(ch, target, rng)
}

pub fn gen_public(
    ch: &ArithmeticChannel,
    sk: &SecretKey,
    f0: Vec<Vec<RingPoly>>,
    rng: &mut RandomSource,
) -> PublicKey {
    let ring = ch.ring();
    let fprime = f0
        .iter()
        .map(|row| {
            let e = sample_vanishing(ch, ch.k0(), rng);
            ring.add(&ring.dot(row, &sk.x), &e)
        })
        .collect();
    PublicKey { f0, fprime }
}

/// Bézout coefficients `μ` with `Σ q_{σ(k)}·ι_q(⟦C⟧(x_k))·μ_k = 1` over `Z`.
pub fn bezout_weights(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    sk: &SecretKey,
) -> Result<Vec<i128>> {
    let (g, mu) = bezout(&weighted_images(ch, rep, sk));
    if g != 1 {
        return Err(AcesError::KeyGeneration(format!(
            "weighted secret images have gcd {g}, not 1"
        )));
    }
    Ok(mu)
}

/// Builds `λ` from Bézout weights and a symmetric matrix of offsets `ell`.
pub fn lambda_from(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    sk: &SecretKey,
    mu: &[i128],
    ell: &[Vec<u64>],
) -> Result<LambdaTensor> {
    let n = ch.n();
    let q = ch.q();
    let images = sk.images(ch);
    let mut lam = LambdaTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let w = repartition_weight(rep, q, i, j)? as i128;
            let base = images[i] as i128 * images[j] as i128 - ell[i][j] as i128 * w;
            let base = reduce_signed(base, q) as i128;
            for (k, &mu_k) in mu.iter().enumerate() {
                let coef = reduce_signed(rep.weight_of(k) as i128 * mu_k, q) as i128;
                lam.set(i, j, k, reduce_signed(coef * base, q));
            }
        }
    }
    Ok(lam)
}

/// Whether `λ_{ij}` equals one of the unit-vector solutions that expose a
/// secret image.
pub fn is_degenerate_slice(lam: &LambdaTensor, images: &[u64], i: usize, j: usize) -> bool {
    let slice = lam.slice(i, j);
    let unit = |pos: usize, value: u64| {
        slice
            .iter()
            .enumerate()
            .all(|(k, &v)| v == if k == pos { value } else { 0 })
    };
    unit(j, images[i]) || unit(i, images[j])
}

/// Adds `s·(w_b X_b e_a - w_a X_a e_b)` for a random pair `a ≠ b`, which keeps
/// `Σ w_k X_k μ_k ≡ 1 (mod q)`.
fn shift_bezout(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    images: &[u64],
    mu: &mut [i128],
    rng: &mut RandomSource,
) {
    let n = mu.len() as u64;
    let q = ch.q();
    let a = rng.below(n) as usize;
    let b = (a + 1 + rng.below(n - 1) as usize) % n as usize;
    let s = rng.below(q) as i128;
    let wx = |k: usize| (rep.weight_of(k) as i128 * images[k] as i128) % q as i128;
    mu[a] = reduce_signed(mu[a] + s * wx(b), q) as i128;
    mu[b] = reduce_signed(mu[b] - s * wx(a), q) as i128;
}

pub fn gen_lambda(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    sk: &SecretKey,
    rng: &mut RandomSource,
) -> Result<LambdaTensor> {
    let n = ch.n();
    let mut mu = bezout_weights(ch, rep, sk)?;
    let images = sk.images(ch);
    let mut ell = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.below(ch.q());
            ell[i][j] = v;
            ell[j][i] = v;
        }
    }
    let mut lam = lambda_from(ch, rep, sk, &mu, &ell)?;
    if n == 1 {
        // the only solution is the unit one, and it reveals nothing beyond
        // the forced image 1
        return Ok(lam);
    }
    for _ in 0..RESAMPLE_CAP {
        let bad: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| is_degenerate_slice(&lam, &images, i, j))
            .collect();
        if bad.is_empty() {
            return Ok(lam);
        }
        for (i, j) in bad {
            let v = rng.below(ch.q());
            ell[i][j] = v;
            ell[j][i] = v;
        }
        // when σ[q]_{ij} kills every offset, only a different Bézout
        // solution can move the slice
        shift_bezout(ch, rep, &images, &mut mu, rng);
        lam = lambda_from(ch, rep, sk, &mu, &ell)?;
    }
    Err(AcesError::KeyGeneration(
        "could not avoid degenerate lambda slices".into(),
    ))
}

/// Refresher at `κ_i = 1`: encryptions of the mod-p digit of each secret image.
pub fn gen_refresher(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    sk: &SecretKey,
    rng: &mut RandomSource,
) -> Refresher {
    let kappa = vec![1u64; ch.n()];
    let rho = sk
        .images(ch)
        .into_iter()
        .zip(&kappa)
        .map(|(img, &k)| encrypt_with_secret(ch, rep, sk, img % ch.p(), k, rng))
        .collect();
    Refresher { kappa, rho }
}

/// Uniform repartition `[n] → {0, …, n0}`, redrawn until the weights
/// themselves are coprime (otherwise no secret key can satisfy the gcd
/// condition).
pub fn gen_repartition(ch: &ArithmeticChannel, rng: &mut RandomSource) -> Result<Repartition> {
    let primes = crate::arith::factorize(ch.q());
    let n0 = primes.len() as u64;
    if ch.n() == 1 {
        return Repartition::new(vec![0], primes);
    }
    for _ in 0..RESAMPLE_CAP {
        let sigma: Vec<usize> = (0..ch.n()).map(|_| rng.between(0, n0) as usize).collect();
        let rep = Repartition::new(sigma, primes.clone())?;
        let g = (0..ch.n()).fold(0u128, |g, k| gcd(g, rep.weight_of(k) as u128));
        if g == 1 {
            return Ok(rep);
        }
    }
    Err(AcesError::KeyGeneration(
        "no repartition with coprime weights found".into(),
    ))
}

/// Some secret keys force a degenerate `λ` slice whatever the offsets and
/// Bézout weights; those keys are redrawn.
fn secret_with_lambda(
    ch: &ArithmeticChannel,
    rep: &Repartition,
    rng: &mut RandomSource,
) -> Result<(SecretKey, LambdaTensor)> {
    let mut last = None;
    for _ in 0..RESAMPLE_CAP {
        let secret = gen_secret(ch, rep, rng)?;
        match gen_lambda(ch, rep, &secret, rng) {
            Ok(lambda) => return Ok((secret, lambda)),
            Err(e @ AcesError::KeyGeneration(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn keygen(ch: &ArithmeticChannel, rng: &mut RandomSource) -> Result<KeyBundle> {
    let rep = gen_repartition(ch, rng)?;
    let (secret, lambda) = secret_with_lambda(ch, &rep, rng)?;
    let f0 = gen_initializer(ch, &rep, rng);
    let key = gen_public(ch, &secret, f0, rng);
    let refresher = gen_refresher(ch, &rep, &secret, rng);
    Ok(KeyBundle {
        secret,
        public: PublicMaterial {
            key,
            rep,
            lambda,
            refresher,
        },
    })
}
