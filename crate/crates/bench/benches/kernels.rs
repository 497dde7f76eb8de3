use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wavexp_core::{
    assemble_joint_covariance, build_meyer_pair, Base, CoefficientIndex, CovarianceEngine, DyadicIndex, QuadSpec,
    SpectralModel, TruncationScheme,
};

fn eval_time(c: &mut Criterion) {
    let pair = build_meyer_pair(3).unwrap();
    pair.time_domain(Base::Psi).unwrap();
    let idx = DyadicIndex::new(3, 5);
    c.bench_function("eval_time psi (3,5), 1000 points", |b| {
        b.iter(|| {
            (0..1000)
                .map(|i| pair.eval_time(Base::Psi, idx, black_box(0.01 * i as f64)).unwrap())
                .sum::<f64>()
        })
    });
}

fn coeff_cov(c: &mut Criterion) {
    let pair = build_meyer_pair(3).unwrap();
    let model = SpectralModel::squared_exponential(1.0, 1.0).unwrap();
    let a = CoefficientIndex::Detail { j: 2, k: 1 };
    let b = CoefficientIndex::Detail { j: 3, k: -2 };
    c.bench_function("coeff_cov cold engine", |bench| {
        bench.iter(|| {
            let engine = CovarianceEngine::new(&model, &pair, QuadSpec::default());
            engine.coeff_cov(black_box(&a), black_box(&b)).unwrap()
        })
    });
}

fn joint_cholesky(c: &mut Criterion) {
    let pair = build_meyer_pair(3).unwrap();
    let model = SpectralModel::squared_exponential(1.0, 1.0).unwrap();
    let engine = CovarianceEngine::new(&model, &pair, QuadSpec::default());
    let scheme = TruncationScheme::uniform(2, 8);
    let grid: Vec<f64> = (0..33).map(|i| 10.0 * i as f64 / 32.0).collect();
    // warm the memo so the benchmark measures assembly and factorization
    assemble_joint_covariance(&engine, &scheme, &grid).unwrap();
    let mut group = c.benchmark_group("joint covariance");
    group.sample_size(20);
    group.bench_function("assemble + Cholesky, scheme (2,8), 33 points", |b| {
        b.iter(|| assemble_joint_covariance(&engine, black_box(&scheme), &grid).unwrap().jitter())
    });
    group.finish();
}

criterion_group!(benches, eval_time, coeff_cov, joint_cholesky);
criterion_main!(benches);
