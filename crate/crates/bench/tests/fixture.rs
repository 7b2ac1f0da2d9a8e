use aces_bench::Fixture;
use aces_core::decrypt;

#[test]
fn fixture_encrypts_decryptably() {
    let mut fx = Fixture::desk(9);
    for m in 0..2 {
        let ct = fx.encrypt(m);
        assert_eq!(decrypt(&fx.ch, &fx.bundle.secret, &ct).unwrap(), m);
    }
}
