//! Toy ElGamal and RSA driven through the same generate/publish/encrypt/decrypt
//! protocol as the lattice scheme. Parameters are tiny; nothing here is secure.

use std::fmt::Debug;

use crate::arith::{factorize, gcd, inv_mod, mul_mod, pow_mod};
use crate::channel::{ArithmeticChannel, RandomSource};
use crate::cipher::{decrypt, encrypt, Ciphertext};
use crate::error::{AcesError, Result};
use crate::keygen::{keygen, KeyBundle, PublicMaterial};

/// Largest modulus accepted by the toy schemes.
pub const TOY_MODULUS_LIMIT: u64 = 1 << 16;

/// A public-key scheme as four steps.
pub trait FourStep {
    type Secret;
    type Public: Clone + Debug;
    type Message: Copy + Debug + PartialEq;
    type Cipher: Clone + Debug;

    fn generate(&self, rng: &mut RandomSource) -> Result<Self::Secret>;
    fn publish(&self, secret: &Self::Secret, rng: &mut RandomSource) -> Result<Self::Public>;
    fn encrypt(
        &self,
        public: &Self::Public,
        m: Self::Message,
        rng: &mut RandomSource,
    ) -> Result<Self::Cipher>;
    fn decrypt(&self, secret: &Self::Secret, c: &Self::Cipher) -> Result<Self::Message>;
}

/// Everything observable in one protocol run.
#[derive(Debug, Clone)]
pub struct Transcript<S: FourStep> {
    pub public: String,
    pub ciphertexts: Vec<String>,
    pub messages: Vec<S::Message>,
    pub recovered: Vec<S::Message>,
}

impl<S: FourStep> PartialEq for Transcript<S> {
    fn eq(&self, other: &Self) -> bool {
        self.public == other.public
            && self.ciphertexts == other.ciphertexts
            && self.messages == other.messages
            && self.recovered == other.recovered
    }
}

impl<S: FourStep> Transcript<S> {
    pub fn roundtrips(&self) -> bool {
        self.messages == self.recovered
    }
}

pub fn run_protocol<S: FourStep>(
    scheme: &S,
    messages: &[S::Message],
    rng: &mut RandomSource,
) -> Result<Transcript<S>> {
    let secret = scheme.generate(rng)?;
    let public = scheme.publish(&secret, rng)?;
    let mut ciphertexts = Vec::with_capacity(messages.len());
    let mut recovered = Vec::with_capacity(messages.len());
    for &m in messages {
        let c = scheme.encrypt(&public, m, rng)?;
        recovered.push(scheme.decrypt(&secret, &c)?);
        ciphertexts.push(format!("{c:?}"));
    }
    Ok(Transcript {
        public: format!("{public:?}"),
        ciphertexts,
        messages: messages.to_vec(),
        recovered,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyGroupParams {
    pub modulus: u64,
    pub g: u64,
    pub order: u64,
}

impl ToyGroupParams {
    /// Checks that `g` has exactly the stated order in `(Z/modulus)^×`.
    pub fn new(modulus: u64, g: u64, order: u64) -> Result<Self> {
        if !(3..TOY_MODULUS_LIMIT).contains(&modulus) || factorize(modulus) != [modulus] {
            return Err(AcesError::Toy(format!("{modulus} is not a small prime")));
        }
        let g = g % modulus;
        if g == 1 {
            return Err(AcesError::Toy("generator is the neutral element".into()));
        }
        if g == 0 || order == 0 || pow_mod(g, order, modulus) != 1 {
            return Err(AcesError::Toy(format!(
                "{g}^{order} is not 1 mod {modulus}"
            )));
        }
        let mut primes = factorize(order);
        primes.dedup();
        if let Some(&r) = primes
            .iter()
            .find(|&&r| pow_mod(g, order / r, modulus) == 1)
        {
            return Err(AcesError::Toy(format!(
                "{g} has order dividing {} mod {modulus}",
                order / r
            )));
        }
        Ok(ToyGroupParams { modulus, g, order })
    }

    pub fn contains(&self, m: u64) -> bool {
        m != 0 && m < self.modulus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElGamal {
    pub group: ToyGroupParams,
}

impl ElGamal {
    /// `(g^h, f^h·m)`.
    pub fn encrypt_with(&self, f: u64, m: u64, h: u64) -> Result<(u64, u64)> {
        let grp = &self.group;
        if !grp.contains(m) {
            return Err(AcesError::Toy(format!(
                "{m} is not a unit mod {}",
                grp.modulus
            )));
        }
        Ok((
            pow_mod(grp.g, h, grp.modulus),
            mul_mod(pow_mod(f, h, grp.modulus), m, grp.modulus),
        ))
    }
}

impl FourStep for ElGamal {
    type Secret = u64;
    type Public = u64;
    type Message = u64;
    type Cipher = (u64, u64);

    fn generate(&self, rng: &mut RandomSource) -> Result<u64> {
        Ok(rng.between(1, self.group.order - 1))
    }

    fn publish(&self, x: &u64, _rng: &mut RandomSource) -> Result<u64> {
        Ok(pow_mod(self.group.g, *x, self.group.modulus))
    }

    fn encrypt(&self, f: &u64, m: u64, rng: &mut RandomSource) -> Result<(u64, u64)> {
        let h = rng.below(self.group.order);
        self.encrypt_with(*f, m, h)
    }

    /// `c1^(order - x) · c2`.
    fn decrypt(&self, x: &u64, &(c1, c2): &(u64, u64)) -> Result<u64> {
        let grp = &self.group;
        let e = (grp.order - x % grp.order) % grp.order;
        Ok(mul_mod(pow_mod(c1, e, grp.modulus), c2, grp.modulus))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsaPublic {
    pub n: u64,
    pub e: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsaSecret {
    pub n: u64,
    pub d: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rsa {
    pub p1: u64,
    pub p2: u64,
    pub e: u64,
}

impl Rsa {
    pub fn new(p1: u64, p2: u64, e: u64) -> Result<Self> {
        for r in [p1, p2] {
            if r < 2 || factorize(r) != [r] {
                return Err(AcesError::Toy(format!("{r} is not prime")));
            }
        }
        if p1 == p2 {
            return Err(AcesError::Toy("the two primes must differ".into()));
        }
        if p1 * p2 >= TOY_MODULUS_LIMIT {
            return Err(AcesError::Toy(format!("modulus {} is too large", p1 * p2)));
        }
        let rsa = Rsa { p1, p2, e };
        rsa.private_exponent()?;
        Ok(rsa)
    }

    pub fn modulus(&self) -> u64 {
        self.p1 * self.p2
    }

    /// Carmichael function of `p1·p2`.
    pub fn carmichael(&self) -> u64 {
        let (a, b) = (self.p1 - 1, self.p2 - 1);
        a / gcd(a as u128, b as u128) as u64 * b
    }

    pub fn private_exponent(&self) -> Result<u64> {
        let lambda = self.carmichael();
        inv_mod(self.e % lambda, lambda).ok_or_else(|| {
            AcesError::Toy(format!(
                "exponent {} is not invertible mod {lambda}",
                self.e
            ))
        })
    }
}

impl FourStep for Rsa {
    type Secret = RsaSecret;
    type Public = RsaPublic;
    type Message = u64;
    type Cipher = u64;

    fn generate(&self, _rng: &mut RandomSource) -> Result<RsaSecret> {
        Ok(RsaSecret {
            n: self.modulus(),
            d: self.private_exponent()?,
        })
    }

    fn publish(&self, sk: &RsaSecret, _rng: &mut RandomSource) -> Result<RsaPublic> {
        Ok(RsaPublic { n: sk.n, e: self.e })
    }

    fn encrypt(&self, pk: &RsaPublic, m: u64, _rng: &mut RandomSource) -> Result<u64> {
        if m >= pk.n {
            return Err(AcesError::Toy(format!("message {m} is not below {}", pk.n)));
        }
        Ok(pow_mod(m, pk.e, pk.n))
    }

    fn decrypt(&self, sk: &RsaSecret, &c: &u64) -> Result<u64> {
        Ok(pow_mod(c, sk.d, sk.n))
    }
}

/// The lattice scheme through the same driver.
#[derive(Debug, Clone)]
pub struct AcesScheme {
    pub channel: ArithmeticChannel,
}

impl FourStep for AcesScheme {
    type Secret = KeyBundle;
    type Public = PublicMaterial;
    type Message = u64;
    type Cipher = Ciphertext;

    fn generate(&self, rng: &mut RandomSource) -> Result<KeyBundle> {
        keygen(&self.channel, rng)
    }

    fn publish(&self, bundle: &KeyBundle, _rng: &mut RandomSource) -> Result<PublicMaterial> {
        Ok(bundle.public.clone())
    }

    fn encrypt(
        &self,
        public: &PublicMaterial,
        m: u64,
        rng: &mut RandomSource,
    ) -> Result<Ciphertext> {
        encrypt(&self.channel, &public.key, m, rng)
    }

    fn decrypt(&self, bundle: &KeyBundle, c: &Ciphertext) -> Result<u64> {
        decrypt(&self.channel, &bundle.secret, c)
    }
}
