//! Shared fixtures for the benchmarks.

use aces_core::{encrypt, keygen, ArithmeticChannel, Ciphertext, KeyBundle, RandomSource};

pub struct Fixture {
    pub ch: ArithmeticChannel,
    pub bundle: KeyBundle,
    pub rng: RandomSource,
}

impl Fixture {
    pub fn desk(seed: u64) -> Self {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(seed);
        let bundle = keygen(&ch, &mut rng).expect("desk parameters admit keys");
        Fixture { ch, bundle, rng }
    }

    pub fn encrypt(&mut self, m: u64) -> Ciphertext {
        encrypt(&self.ch, &self.bundle.public.key, m, &mut self.rng).expect("message below p")
    }
}
