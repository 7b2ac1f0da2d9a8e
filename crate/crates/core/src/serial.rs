//! JSON encodings of channels, keys, ciphertexts and locator databases.
//! Ring coefficients and other modular values are written as decimal
//! strings; dimensions, indices and levels are plain integers.

use serde::{Deserialize, Serialize};

use crate::arith::Repartition;
use crate::channel::{ArithmeticChannel, ChannelParams};
use crate::cipher::Ciphertext;
use crate::error::{AcesError, Result};
use crate::keygen::{LambdaTensor, PublicKey, PublicMaterial, Refresher, SecretKey};
use crate::poly::RingPoly;
use crate::refresh::{EntryKind, LocatorDb, LocatorEntry};

fn bad(what: impl std::fmt::Display) -> AcesError {
    AcesError::Serialization(what.to_string())
}

fn dec<T: ToString>(v: &T) -> String {
    v.to_string()
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("'{s}' is not a valid decimal integer")))
}

fn parse_all<T: std::str::FromStr>(v: &[String]) -> Result<Vec<T>> {
    v.iter().map(|s| parse(s)).collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(bad)?;
    s.push('\n');
    Ok(s)
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(bad)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    p: String,
    q: String,
    omega: String,
    u: Vec<String>,
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    k0: String,
}

pub fn channel_to_json(ch: &ArithmeticChannel) -> Result<String> {
    let prm = ch.params();
    to_json(&ChannelDoc {
        p: dec(&prm.p),
        q: dec(&prm.q),
        omega: dec(&prm.omega),
        u: prm.u.iter().map(dec).collect(),
        n: prm.n,
        big_n: prm.big_n,
        k0: dec(&prm.k0),
    })
}

/// Parses and validates a channel.
pub fn channel_from_json(text: &str) -> Result<ArithmeticChannel> {
    let d: ChannelDoc = from_json(text)?;
    ArithmeticChannel::new(ChannelParams {
        p: parse(&d.p)?,
        q: parse(&d.q)?,
        omega: parse(&d.omega)?,
        u: parse_all(&d.u)?,
        n: d.n,
        big_n: d.big_n,
        k0: parse(&d.k0)?,
    })
}

type PolyDoc = Vec<String>;

fn poly_doc(p: &RingPoly) -> PolyDoc {
    p.coeffs().iter().map(dec).collect()
}

fn poly_from(ch: &ArithmeticChannel, d: &PolyDoc) -> Result<RingPoly> {
    ch.ring().from_coeffs(parse_all(d)?)
}

fn polys_from(
    ch: &ArithmeticChannel,
    d: &[PolyDoc],
    len: usize,
    what: &'static str,
) -> Result<Vec<RingPoly>> {
    if d.len() != len {
        return Err(AcesError::Dimension {
            what,
            expected: len,
            found: d.len(),
        });
    }
    d.iter().map(|p| poly_from(ch, p)).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiphertextDoc {
    c: Vec<PolyDoc>,
    cprime: PolyDoc,
    level: u64,
}

impl CiphertextDoc {
    fn of(ct: &Ciphertext) -> Self {
        CiphertextDoc {
            c: ct.c.iter().map(poly_doc).collect(),
            cprime: poly_doc(&ct.cprime),
            level: ct.level,
        }
    }

    fn into_ct(self, ch: &ArithmeticChannel) -> Result<Ciphertext> {
        Ok(Ciphertext {
            c: polys_from(ch, &self.c, ch.n(), "ciphertext vector")?,
            cprime: poly_from(ch, &self.cprime)?,
            level: self.level,
        })
    }
}

pub fn ciphertext_to_json(ct: &Ciphertext) -> Result<String> {
    to_json(&CiphertextDoc::of(ct))
}

pub fn ciphertext_from_json(ch: &ArithmeticChannel, text: &str) -> Result<Ciphertext> {
    from_json::<CiphertextDoc>(text)?.into_ct(ch)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefresherDoc {
    kappa: Vec<String>,
    rho: Vec<CiphertextDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicDoc {
    f0: Vec<Vec<PolyDoc>>,
    fprime: Vec<PolyDoc>,
    sigma: Vec<usize>,
    primes: Vec<String>,
    /// `lambda[i][j][k]`.
    lambda: Vec<Vec<Vec<String>>>,
    refresher: RefresherDoc,
}

pub fn public_to_json(public: &PublicMaterial) -> Result<String> {
    let n = public.lambda.n();
    let lambda = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| public.lambda.slice(i, j).iter().map(dec).collect())
                .collect()
        })
        .collect();
    to_json(&PublicDoc {
        f0: public
            .key
            .f0
            .iter()
            .map(|row| row.iter().map(poly_doc).collect())
            .collect(),
        fprime: public.key.fprime.iter().map(poly_doc).collect(),
        sigma: public.rep.sigma().to_vec(),
        primes: public.rep.primes().iter().map(dec).collect(),
        lambda,
        refresher: RefresherDoc {
            kappa: public.refresher.kappa.iter().map(dec).collect(),
            rho: public.refresher.rho.iter().map(CiphertextDoc::of).collect(),
        },
    })
}

pub fn public_from_json(ch: &ArithmeticChannel, text: &str) -> Result<PublicMaterial> {
    let d: PublicDoc = from_json(text)?;
    let (n, big_n) = (ch.n(), ch.big_n());
    if d.f0.len() != big_n {
        return Err(AcesError::Dimension {
            what: "initializer rows",
            expected: big_n,
            found: d.f0.len(),
        });
    }
    let f0 =
        d.f0.iter()
            .map(|row| polys_from(ch, row, n, "initializer row"))
            .collect::<Result<Vec<_>>>()?;
    let fprime = polys_from(ch, &d.fprime, big_n, "public key")?;

    let rep = Repartition::new(d.sigma, parse_all(&d.primes)?)?;
    if rep.n() != n || !rep.divides(ch.q()) {
        return Err(bad("repartition does not match the channel"));
    }

    let mut lambda = LambdaTensor::zeros(n);
    if d.lambda.len() != n
        || d.lambda.iter().flatten().any(|v| v.len() != n)
        || d.lambda.iter().any(|m| m.len() != n)
    {
        return Err(bad(format!("lambda must be {n}x{n}x{n}")));
    }
    for (i, m) in d.lambda.iter().enumerate() {
        for (j, v) in m.iter().enumerate() {
            for (k, s) in v.iter().enumerate() {
                let x: u64 = parse(s)?;
                if x >= ch.q() {
                    return Err(bad(format!("lambda entry {x} is not reduced mod q")));
                }
                lambda.set(i, j, k, x);
            }
        }
    }

    let kappa: Vec<u64> = parse_all(&d.refresher.kappa)?;
    if kappa.len() != n || d.refresher.rho.len() != n {
        return Err(bad(format!("refresher must have {n} entries")));
    }
    let rho = d
        .refresher
        .rho
        .into_iter()
        .map(|c| c.into_ct(ch))
        .collect::<Result<Vec<_>>>()?;

    Ok(PublicMaterial {
        key: PublicKey { f0, fprime },
        rep,
        lambda,
        refresher: Refresher { kappa, rho },
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SecretDoc {
    x: Vec<PolyDoc>,
}

pub fn secret_to_json(sk: &SecretKey) -> Result<String> {
    to_json(&SecretDoc {
        x: sk.x.iter().map(poly_doc).collect(),
    })
}

pub fn secret_from_json(ch: &ArithmeticChannel, text: &str) -> Result<SecretKey> {
    let d: SecretDoc = from_json(text)?;
    Ok(SecretKey {
        x: polys_from(ch, &d.x, ch.n(), "secret key")?,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum KindDoc {
    Locator,
    Director,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    vec: Vec<String>,
    kind: KindDoc,
    k: u64,
    margin_num: String,
}

pub fn locators_to_json(db: &LocatorDb) -> Result<String> {
    let docs: Vec<EntryDoc> = db
        .entries
        .iter()
        .map(|e| EntryDoc {
            vec: e.vec.iter().map(dec).collect(),
            kind: match e.kind {
                EntryKind::Locator => KindDoc::Locator,
                EntryKind::Director => KindDoc::Director,
            },
            k: e.k,
            margin_num: dec(&e.margin_num),
        })
        .collect();
    to_json(&docs)
}

pub fn locators_from_json(ch: &ArithmeticChannel, text: &str) -> Result<LocatorDb> {
    let docs: Vec<EntryDoc> = from_json(text)?;
    let entries = docs
        .into_iter()
        .map(|d| {
            let vec: Vec<u64> = parse_all(&d.vec)?;
            let margin_num: u64 = parse(&d.margin_num)?;
            if vec.len() != ch.n() {
                return Err(AcesError::Dimension {
                    what: "locator vector",
                    expected: ch.n(),
                    found: vec.len(),
                });
            }
            if vec.iter().chain([&margin_num]).any(|&v| v >= ch.q()) {
                return Err(bad("locator values must be reduced mod q"));
            }
            Ok(LocatorEntry {
                vec,
                kind: match d.kind {
                    KindDoc::Locator => EntryKind::Locator,
                    KindDoc::Director => EntryKind::Director,
                },
                k: d.k,
                margin_num,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocatorDb { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RandomSource;
    use crate::cipher::encrypt;
    use crate::keygen::keygen;
    use crate::refresh::build_locator_db;

    #[test]
    fn everything_roundtrips() {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(8);
        let b = keygen(&ch, &mut rng).unwrap();

        let ch2 = channel_from_json(&channel_to_json(&ch).unwrap()).unwrap();
        assert_eq!(ch2, ch);
        let text = public_to_json(&b.public).unwrap();
        assert_eq!(public_from_json(&ch, &text).unwrap(), b.public);
        assert_eq!(
            secret_from_json(&ch, &secret_to_json(&b.secret).unwrap()).unwrap(),
            b.secret
        );
        let ct = encrypt(&ch, &b.public.key, 1, &mut rng).unwrap();
        let text = ciphertext_to_json(&ct).unwrap();
        assert!(text.contains("\"level\": 4"));
        assert_eq!(ciphertext_from_json(&ch, &text).unwrap(), ct);
        let db = build_locator_db(&ch, &b.public.key, &b.secret, 20, &mut rng);
        let text = locators_to_json(&db).unwrap();
        assert_eq!(locators_from_json(&ch, &text).unwrap(), db);
    }

    #[test]
    fn rejects_malformed_input() {
        let ch = ArithmeticChannel::desk();
        assert!(channel_from_json("{").is_err());
        let bad_channel =
            r#"{"p":"2","q":"15015","omega":"1","u":["-1","0","1"],"n":3,"N":2,"k0":"10000"}"#;
        assert!(matches!(
            channel_from_json(bad_channel),
            Err(AcesError::InvalidChannel(_))
        ));
        let ct = r#"{"c":[["0","0","0","0"]],"cprime":["1","0","0","0"],"level":0}"#;
        assert!(matches!(
            ciphertext_from_json(&ch, ct),
            Err(AcesError::Dimension { .. })
        ));
        let ct = r#"{"c":[["0","0","0","0"],["0","0","0","0"],["0","0","0","x"]],"cprime":["1","0","0","0"],"level":0}"#;
        assert!(matches!(
            ciphertext_from_json(&ch, ct),
            Err(AcesError::Serialization(_))
        ));
    }
}
