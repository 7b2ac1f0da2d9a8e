//! Leveled homomorphic encryption over arithmetic channels, with a
//! noise-resetting refresh operation and a circuit evaluator.

pub mod arith;
pub mod channel;
pub mod cipher;
pub mod circuit;
pub mod classic;
pub mod error;
pub mod homo;
pub mod keygen;
pub mod poly;
pub mod refresh;
pub mod serial;

pub use arith::{Repartition, Residue};
pub use channel::{
    validate_channel, ArithmeticChannel, ChannelParams, ChannelViolation, RandomSource,
};
pub use cipher::{decrypt, encrypt, level_after, Ciphertext, LevelAfter, LevelOp};
pub use circuit::{evaluate, parse_circuit, Circuit, EvalKeys, EvalReport, RefreshPolicy};
pub use error::{AcesError, Result};
pub use homo::{hom_add, hom_mul};
pub use keygen::{
    keygen, KeyBundle, LambdaTensor, PublicKey, PublicMaterial, Refresher, SecretKey,
};
pub use poly::{QuotientRing, RingPoly};
pub use refresh::{
    refresh_ct, LocatorDb, PublicRefreshCheck, RefreshabilityCheck, SecretRefreshCheck,
};
