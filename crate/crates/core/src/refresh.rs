//! Refreshability tests (with the secret key, and public via a locator
//! database) and the refresh operation.

use std::collections::HashMap;

use crate::arith::DotSplit;
use crate::channel::{ArithmeticChannel, RandomSource};
use crate::cipher::{encrypt, Ciphertext};
use crate::error::{AcesError, Result};
use crate::homo::{hom_add, scalar_product};
use crate::keygen::{LambdaTensor, PublicKey, Refresher, SecretKey};

/// The integer shadow `(⟦C⟧⟨-c⟩, ⟦C⟧(c'))` of a ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pseudociphertext {
    pub v: Vec<u64>,
    pub vprime: u64,
}

pub fn pseudociphertext(ch: &ArithmeticChannel, ct: &Ciphertext) -> Pseudociphertext {
    let q = ch.q();
    Pseudociphertext {
        v: ct.c.iter().map(|ci| (q - ch.eval(ci)) % q).collect(),
        vprime: ch.eval(&ct.cprime),
    }
}

/// `⟦C⟧⟨c⟩`, the vector the refreshability theorem tests as a locator.
pub fn locator_of(ch: &ArithmeticChannel, ct: &Ciphertext) -> Vec<u64> {
    ct.c.iter().map(|ci| ch.eval(ci)).collect()
}

/// An exact rational `num / den` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Margin {
    pub num: u64,
    pub den: u64,
}

/// Fractional part of `ℓᵀX / q`, where `X` are the secret images.
pub fn margin(ch: &ArithmeticChannel, sk: &SecretKey, ell: &[u64]) -> Margin {
    let split = DotSplit::compute(ell, &sk.images(ch), ch.q());
    Margin {
        num: split.rem,
        den: ch.q(),
    }
}

/// `Σ X_i - ⌊ℓᵀX / q⌋`, never negative since every `ℓ_i < q`.
fn locator_gap(ch: &ArithmeticChannel, sk: &SecretKey, ell: &[u64]) -> u128 {
    let images = sk.images(ch);
    let total: u128 = images.iter().map(|&x| x as u128).sum();
    total - DotSplit::compute(ell, &images, ch.q()).quot
}

/// The index `k` with `ℓ` a `k`-th locator, if any.
pub fn is_locator(ch: &ArithmeticChannel, sk: &SecretKey, ell: &[u64]) -> Option<u64> {
    let gap = locator_gap(ch, sk, ell);
    let p = ch.p() as u128;
    gap.is_multiple_of(p).then(|| (gap / p) as u64)
}

/// The index `k` with `ℓ` a `k`-th director, if any.
pub fn is_director(ch: &ArithmeticChannel, sk: &SecretKey, ell: &[u64]) -> Option<u64> {
    let quot = DotSplit::compute(ell, &sk.images(ch), ch.q()).quot;
    let p = ch.p() as u128;
    quot.is_multiple_of(p).then(|| (quot / p) as u64)
}

/// The `k` for which the pseudociphertext's lifted identity holds up to
/// `k·p·q`, if any.
pub fn is_refreshable_secret(
    ch: &ArithmeticChannel,
    sk: &SecretKey,
    ct: &Ciphertext,
) -> Option<u64> {
    let pc = pseudociphertext(ch, ct);
    let q = ch.q() as u128;
    let split = DotSplit::compute(&pc.v, &sk.images(ch), ch.q());
    // v' + vᵀX = q·t + (v' + vᵀX mod q)
    let t = split.quot + (split.rem as u128 + pc.vprime as u128) / q;
    let p = ch.p() as u128;
    t.is_multiple_of(p).then(|| (t / p) as u64)
}

/// `p(k+1) - 1 < q·(1 - margin)` in integers.
fn margin_inequality(ch: &ArithmeticChannel, level: u64, margin_num: u64) -> bool {
    let lhs = (ch.p() as u128) * (level as u128 + 1) - 1;
    lhs < (ch.q() - margin_num) as u128
}

/// Sufficient condition for refreshability: `⟦C⟧⟨c⟩` is a locator and its
/// margin leaves room for the ciphertext's level.
pub fn theorem_test(ch: &ArithmeticChannel, sk: &SecretKey, ct: &Ciphertext) -> bool {
    let ell = locator_of(ch, ct);
    is_locator(ch, sk, &ell).is_some() && margin_inequality(ch, ct.level, margin(ch, sk, &ell).num)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryKind {
    Locator,
    Director,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatorEntry {
    pub vec: Vec<u64>,
    pub kind: EntryKind,
    pub k: u64,
    /// Margin numerator; the denominator is `q`.
    pub margin_num: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocatorDb {
    pub entries: Vec<LocatorEntry>,
}

/// Outcome of the public test. `Unknown` never means "not refreshable".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PublicVerdict {
    Verified { k: u64, margin: Margin },
    Unknown,
}

impl LocatorDb {
    /// Classifies `ell` with the secret key and stores it when it is a
    /// locator or a director (locator wins when both hold).
    pub fn classify_and_push(
        &mut self,
        ch: &ArithmeticChannel,
        sk: &SecretKey,
        ell: Vec<u64>,
    ) -> bool {
        let margin_num = margin(ch, sk, &ell).num;
        let entry = if let Some(k) = is_locator(ch, sk, &ell) {
            LocatorEntry {
                vec: ell,
                kind: EntryKind::Locator,
                k,
                margin_num,
            }
        } else if let Some(k) = is_director(ch, sk, &ell) {
            LocatorEntry {
                vec: ell,
                kind: EntryKind::Director,
                k,
                margin_num,
            }
        } else {
            return false;
        };
        if self.entries.iter().any(|e| e.vec == entry.vec) {
            return false;
        }
        self.entries.push(entry);
        true
    }

    fn of_kind(&self, kind: EntryKind) -> impl Iterator<Item = &LocatorEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }
}

/// Largest `(p + 1)^N` for which every fresh-mask combination is enumerated.
const MASK_ENUMERATION_CAP: u64 = 4096;

/// Built by the secret holder. Holds the classified images of every mask
/// combination `f0ᵀt`, `t ∈ {0..p}^N` (when few enough), plus `random`
/// classified uniform vectors.
pub fn build_locator_db(
    ch: &ArithmeticChannel,
    pk: &PublicKey,
    sk: &SecretKey,
    random: usize,
    rng: &mut RandomSource,
) -> LocatorDb {
    let mut db = LocatorDb::default();
    let q = ch.q();
    let rows: Vec<Vec<u64>> = pk
        .f0
        .iter()
        .map(|row| row.iter().map(|f| ch.eval(f)).collect())
        .collect();
    let combos = (ch.p() + 1).checked_pow(ch.big_n() as u32);
    if combos.is_some_and(|c| c <= MASK_ENUMERATION_CAP) {
        let mut t = vec![0u64; ch.big_n()];
        loop {
            let ell: Vec<u64> = (0..ch.n())
                .map(|j| {
                    rows.iter().zip(&t).fold(0u128, |acc, (row, &ti)| {
                        (acc + row[j] as u128 * ti as u128) % q as u128
                    }) as u64
                })
                .collect();
            db.classify_and_push(ch, sk, ell);
            // odometer over {0..p}^N
            let mut pos = 0;
            while pos < t.len() && t[pos] == ch.p() {
                t[pos] = 0;
                pos += 1;
            }
            if pos == t.len() {
                break;
            }
            t[pos] += 1;
        }
    }
    for _ in 0..random {
        let ell = (0..ch.n()).map(|_| rng.below(q)).collect();
        db.classify_and_push(ch, sk, ell);
    }
    db
}

/// Combines a locator with signed directors: returns the locator index and
/// exact margin of `ℓ + Σ sign_i·δ_i`, or `None` if the side conditions fail.
fn combine(
    ch: &ArithmeticChannel,
    loc: &LocatorEntry,
    dirs: &[(&LocatorEntry, i8)],
) -> Option<(u64, u64)> {
    let q = ch.q() as i128;
    let p = ch.p() as i128;
    // margins in units of 1/q
    let mut num = loc.margin_num as i128;
    let mut idx = loc.k as i128;
    for &(d, s) in dirs {
        num += s as i128 * d.margin_num as i128;
        // inverse operation on the indices
        idx -= s as i128 * d.k as i128;
    }
    if num < 0 {
        return None;
    }
    let kp = num / (p * q);
    if num - kp * p * q >= q {
        return None;
    }
    let idx = idx - kp;
    (idx >= 0).then(|| (idx as u64, (num - kp * p * q) as u64))
}

/// Searches `c = ℓ + Σ ±δ_i` with at most `budget` directors.
pub fn public_refresh_test(
    db: &LocatorDb,
    ch: &ArithmeticChannel,
    ct: &Ciphertext,
    budget: usize,
) -> PublicVerdict {
    let target = locator_of(ch, ct);
    let q = ch.q() as i128;
    let locators: HashMap<&[u64], &LocatorEntry> = db
        .of_kind(EntryKind::Locator)
        .map(|e| (e.vec.as_slice(), e))
        .collect();
    let directors: Vec<&LocatorEntry> = db.of_kind(EntryKind::Director).collect();

    let verdict = |loc: &LocatorEntry, dirs: &[(&LocatorEntry, i8)]| {
        combine(ch, loc, dirs).map(|(k, num)| PublicVerdict::Verified {
            k,
            margin: Margin { num, den: ch.q() },
        })
    };
    // ℓ = c - Σ s_i δ_i over Z, which must stay in [0, q)
    let peel = |dirs: &[(&LocatorEntry, i8)]| -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(target.len());
        for (i, &c) in target.iter().enumerate() {
            let v = c as i128
                - dirs
                    .iter()
                    .map(|&(d, s)| s as i128 * d.vec[i] as i128)
                    .sum::<i128>();
            if !(0..q).contains(&v) {
                return None;
            }
            out.push(v as u64);
        }
        Some(out)
    };
    let try_dirs = |dirs: &[(&LocatorEntry, i8)]| -> Option<PublicVerdict> {
        let base = peel(dirs)?;
        let loc = locators.get(base.as_slice())?;
        verdict(loc, dirs)
    };

    if let Some(v) = try_dirs(&[]) {
        return v;
    }
    if budget >= 1 {
        for d in &directors {
            for s in [1i8, -1] {
                if let Some(v) = try_dirs(&[(d, s)]) {
                    return v;
                }
            }
        }
    }
    if budget >= 2 {
        for (a, d1) in directors.iter().enumerate() {
            for d2 in &directors[a..] {
                for s1 in [1i8, -1] {
                    for s2 in [1i8, -1] {
                        if let Some(v) = try_dirs(&[(d1, s1), (d2, s2)]) {
                            return v;
                        }
                    }
                }
            }
        }
    }
    PublicVerdict::Unknown
}

/// Decides whether a ciphertext may be refreshed.
pub trait RefreshabilityCheck {
    fn is_refreshable(&self, ch: &ArithmeticChannel, ct: &Ciphertext) -> bool;
}

/// Exact test with the secret key.
pub struct SecretRefreshCheck<'a> {
    pub sk: &'a SecretKey,
}

impl RefreshabilityCheck for SecretRefreshCheck<'_> {
    fn is_refreshable(&self, ch: &ArithmeticChannel, ct: &Ciphertext) -> bool {
        is_refreshable_secret(ch, self.sk, ct).is_some()
    }
}

/// Public test: a verified locator decomposition plus the margin inequality.
pub struct PublicRefreshCheck<'a> {
    pub db: &'a LocatorDb,
    pub budget: usize,
}

impl RefreshabilityCheck for PublicRefreshCheck<'_> {
    fn is_refreshable(&self, ch: &ArithmeticChannel, ct: &Ciphertext) -> bool {
        match public_refresh_test(self.db, ch, ct, self.budget) {
            PublicVerdict::Verified { margin, .. } => margin_inequality(ch, ct.level, margin.num),
            PublicVerdict::Unknown => false,
        }
    }
}

/// `κ* = k2 + Σ p(κ_i + k1_i + κ_i·k1_i)` for digit encryptions at `k1_i = k2 = fresh`.
pub fn kappa_star(ch: &ArithmeticChannel, refresher: &Refresher, fresh: u64) -> u128 {
    let p = ch.p() as u128;
    let k1 = fresh as u128;
    fresh as u128
        + refresher
            .kappa
            .iter()
            .map(|&k| p * (k as u128 + k1 + k as u128 * k1))
            .sum::<u128>()
}

/// `κ^* = ⌊((p - 1) + n(p - 1)²) / p⌋`.
pub fn kappa_hat(ch: &ArithmeticChannel) -> u64 {
    let p = ch.p();
    (ch.n() as u64 * (p - 1) * (p - 1)).div_ceil(p)
}

/// Level of every refreshed ciphertext.
pub fn refreshed_level(ch: &ArithmeticChannel, refresher: &Refresher) -> u128 {
    kappa_star(ch, refresher, crate::cipher::fresh_level(ch)) + kappa_hat(ch) as u128
}

/// Rebuilds a low-level encryption of the same plaintext. The caller is
/// responsible for `ct` being refreshable.
pub fn refresh_ct(
    ch: &ArithmeticChannel,
    pk: &PublicKey,
    lam: &LambdaTensor,
    refresher: &Refresher,
    ct: &Ciphertext,
    rng: &mut RandomSource,
) -> Result<Ciphertext> {
    ct.check(ch)?;
    if !ch.is_decryptable_level(ct.level) {
        return Err(AcesError::RefreshRefused(format!(
            "level {} is not below (q+1)/p - 1 (max {})",
            ct.level,
            ch.max_decryptable_level()
        )));
    }
    let star = kappa_star(ch, refresher, crate::cipher::fresh_level(ch));
    if star * ch.p() as u128 >= ch.q() as u128 {
        return Err(AcesError::RefreshRefused(format!(
            "kappa* = {star} is not below q/p"
        )));
    }
    let p = ch.p();
    let pc = pseudociphertext(ch, ct);
    let gamma =
        pc.v.iter()
            .map(|&v| encrypt(ch, pk, v % p, rng))
            .collect::<Result<Vec<_>>>()?;
    let c2 = encrypt(ch, pk, pc.vprime % p, rng)?;
    let sp = scalar_product(ch, lam, &gamma, &refresher.rho)?;
    let mut out = hom_add(ch, &c2, &sp)?;
    out.level = (star + kappa_hat(ch) as u128) as u64;
    Ok(out)
}

/// Attempts allowed by [`make_refreshable`].
pub const REFRESH_RETRY_CAP: usize = 16;

/// Returns `ct` if it passes `check`, otherwise `ct ⊕ enc(0)` for fresh
/// encryptions of zero until one passes.
pub fn make_refreshable(
    ch: &ArithmeticChannel,
    pk: &PublicKey,
    check: &dyn RefreshabilityCheck,
    ct: &Ciphertext,
    rng: &mut RandomSource,
) -> Result<Ciphertext> {
    if check.is_refreshable(ch, ct) {
        return Ok(ct.clone());
    }
    for _ in 0..REFRESH_RETRY_CAP {
        let zero = encrypt(ch, pk, 0, rng)?;
        let candidate = hom_add(ch, ct, &zero)?;
        if check.is_refreshable(ch, &candidate) {
            return Ok(candidate);
        }
    }
    Err(AcesError::RefreshRefused(format!(
        "no refreshable variant found in {REFRESH_RETRY_CAP} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::decrypt;
    use crate::homo::hom_mul;
    use crate::keygen::keygen;

    #[test]
    fn pseudociphertext_negates() {
        let ch = ArithmeticChannel::desk();
        let mut ct = Ciphertext::trivial(&ch, 1, 0);
        assert_eq!(pseudociphertext(&ch, &ct).v, vec![0, 0, 0]);
        ct.c[0] = ch.ring().constant(1);
        assert_eq!(pseudociphertext(&ch, &ct).v[0], 15014);
    }

    #[test]
    fn trivial_ciphertext_is_refreshable_at_zero() {
        let ch = ArithmeticChannel::desk();
        let b = keygen(&ch, &mut RandomSource::from_u64(1)).unwrap();
        let ct = Ciphertext::trivial(&ch, 1, 0);
        assert_eq!(is_refreshable_secret(&ch, &b.secret, &ct), Some(0));
        assert_eq!(margin(&ch, &b.secret, &[0, 0, 0]).num, 0);
    }

    #[test]
    fn kappa_values_at_desk() {
        let ch = ArithmeticChannel::desk();
        let b = keygen(&ch, &mut RandomSource::from_u64(1)).unwrap();
        assert_eq!(kappa_star(&ch, &b.public.refresher, 4), 58);
        assert_eq!(kappa_hat(&ch), 2);
        assert_eq!(refreshed_level(&ch, &b.public.refresher), 60);
    }

    #[test]
    fn refresh_preserves_plaintext() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(31);
        let b = keygen(&ch, &mut rng).unwrap();
        let check = SecretRefreshCheck { sk: &b.secret };
        let pk = &b.public.key;
        let mut done = 0;
        for m in [0, 1, 1, 0, 1] {
            let x = encrypt(&ch, pk, m, &mut rng).unwrap();
            let y = encrypt(&ch, pk, 1, &mut rng).unwrap();
            let ct = hom_mul(&ch, &b.public.lambda, &x, &y).unwrap();
            let ct = make_refreshable(&ch, pk, &check, &ct, &mut rng).unwrap();
            let out = refresh_ct(
                &ch,
                pk,
                &b.public.lambda,
                &b.public.refresher,
                &ct,
                &mut rng,
            )
            .unwrap();
            assert_eq!(out.level, 60);
            assert_eq!(decrypt(&ch, &b.secret, &out).unwrap(), m);
            done += 1;
        }
        assert_eq!(done, 5);
    }

    #[test]
    fn refresh_refuses_undecryptable_levels() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(32);
        let b = keygen(&ch, &mut rng).unwrap();
        let ct = Ciphertext::trivial(&ch, 1, 9000);
        let err = refresh_ct(
            &ch,
            &b.public.key,
            &b.public.lambda,
            &b.public.refresher,
            &ct,
            &mut rng,
        );
        assert!(matches!(err, Err(AcesError::RefreshRefused(_))));
    }

    #[test]
    fn public_test_depth_zero_and_empty() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(33);
        let b = keygen(&ch, &mut rng).unwrap();
        let ct = encrypt(&ch, &b.public.key, 1, &mut rng).unwrap();
        assert_eq!(
            public_refresh_test(&LocatorDb::default(), &ch, &ct, 2),
            PublicVerdict::Unknown
        );
        let db = build_locator_db(&ch, &b.public.key, &b.secret, 0, &mut rng);
        let ell = locator_of(&ch, &ct);
        match public_refresh_test(&db, &ch, &ct, 0) {
            PublicVerdict::Verified { k, margin: m } => {
                assert_eq!(is_locator(&ch, &b.secret, &ell), Some(k));
                assert_eq!(margin(&ch, &b.secret, &ell), m);
            }
            PublicVerdict::Unknown => assert!(is_locator(&ch, &b.secret, &ell).is_none()),
        }
    }
}
