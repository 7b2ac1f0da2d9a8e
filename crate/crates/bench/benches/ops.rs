use aces_bench::Fixture;
use aces_core::refresh::make_refreshable;
use aces_core::{
    hom_add, hom_mul, keygen, refresh_ct, ArithmeticChannel, RandomSource, SecretRefreshCheck,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn ops(c: &mut Criterion) {
    let ch = ArithmeticChannel::desk();
    c.bench_function("keygen", |b| {
        let mut rng = RandomSource::from_u64(1);
        b.iter(|| keygen(&ch, &mut rng).unwrap())
    });

    let mut fx = Fixture::desk(2);
    c.bench_function("encrypt", |b| b.iter(|| fx.encrypt(black_box(1))));

    let (x, y) = (fx.encrypt(1), fx.encrypt(0));
    c.bench_function("hom_add", |b| {
        b.iter(|| hom_add(&fx.ch, black_box(&x), black_box(&y)).unwrap())
    });
    let lam = &fx.bundle.public.lambda;
    c.bench_function("hom_mul", |b| {
        b.iter(|| hom_mul(&fx.ch, lam, black_box(&x), black_box(&y)).unwrap())
    });

    let prod = hom_mul(&fx.ch, lam, &x, &x).unwrap();
    let check = SecretRefreshCheck {
        sk: &fx.bundle.secret,
    };
    let pk = &fx.bundle.public.key;
    let ready = make_refreshable(&fx.ch, pk, &check, &prod, &mut fx.rng).unwrap();
    let refresher = &fx.bundle.public.refresher;
    let mut rng = RandomSource::from_u64(3);
    c.bench_function("refresh", |b| {
        b.iter(|| refresh_ct(&fx.ch, pk, lam, refresher, black_box(&ready), &mut rng).unwrap())
    });
}

criterion_group!(benches, ops);
criterion_main!(benches);
