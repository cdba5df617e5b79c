use blindpad_core::num::PrimeModulus;
use blindpad_core::verifier::{Variant, Verifier};
use blindpad_core::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn leakfree_alice(c: &mut Criterion) {
    let p = PrimeModulus::from_u64(7).unwrap();
    let mut group = c.benchmark_group("leakfree_alice_p7");
    for (name, mode) in modes() {
        let v = Verifier::new(mode, Variant::Shipped);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| v.leakfree_alice(&p).unwrap()));
    }
    group.finish();
}

fn leakfree_encryptor(c: &mut Criterion) {
    let p = PrimeModulus::from_u64(5).unwrap();
    let mut group = c.benchmark_group("leakfree_encryptor_p5_l3");
    group.sample_size(10);
    for (name, mode) in modes() {
        let v = Verifier::new(mode, Variant::Shipped);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| v.leakfree_encryptor(&p, 3).unwrap()));
    }
    group.finish();
}

fn ordinary_secrecy(c: &mut Criterion) {
    let mut group = c.benchmark_group("ordinary_secrecy_n2000");
    group.sample_size(10);
    for (name, mode) in modes() {
        let v = Verifier::new(mode, Variant::Shipped);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| v.ordinary_secrecy(2000).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, leakfree_alice, leakfree_encryptor, ordinary_secrecy);
criterion_main!(benches);
