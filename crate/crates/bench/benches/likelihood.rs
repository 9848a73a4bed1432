use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use shapelik::quadrature::random_instance;
use shapelik::rng::substream;
use shapelik::{
    g_marginal_loglik, quad_g_marginal, residual_A, sigma_marginal_loglik, simulate_shape, ClassModel, DataShape,
    GroupMarginalInputs, McConfig, QuadratureSpec, Regulators, ShapeDraws, SimilarityTransform,
};

fn rectangle_data(n: usize) -> (DataShape, DataShape) {
    let model = ClassModel::rectangle("a", 4.0, 0.5).unwrap();
    let tr = SimilarityTransform {
        angle: 0.7,
        scale: 1.3,
        translation: (0.4, -1.1),
    };
    let mut rng = substream(1, 0);
    let (y, truth) = simulate_shape(&mut rng, &model, n, 0.05, &tr).unwrap();
    let beta = DataShape::new(truth.corresponded_points()).unwrap();
    (y, beta)
}

fn closed_form(c: &mut Criterion) {
    let regs = Regulators::default();
    let (y, beta) = rectangle_data(12);
    c.bench_function("residual_A n=12", |b| b.iter(|| residual_A(black_box(&y), black_box(&beta), &regs)));
    c.bench_function("sigma_marginal n=12", |b| {
        b.iter(|| sigma_marginal_loglik(black_box(&y), black_box(&beta), &regs))
    });
    let inputs = GroupMarginalInputs::new(y.clone(), beta.clone(), 0.05, regs).unwrap();
    c.bench_function("g_marginal n=12", |b| b.iter(|| g_marginal_loglik(black_box(&inputs))));
}

fn monte_carlo(c: &mut Criterion) {
    let regs = Regulators::default();
    let (y, _) = rectangle_data(12);
    let cfg = McConfig {
        m_samples: 1024,
        seed: 3,
        ..Default::default()
    };
    let model = ClassModel::rectangle("a", 4.0, 0.5).unwrap();
    let mut group = c.benchmark_group("shape_draws");
    group.sample_size(10);
    group.bench_function("build M=1024 n=12", |b| {
        b.iter(|| ShapeDraws::new(black_box(&y), &regs, &cfg, 0).unwrap())
    });
    let draws = ShapeDraws::new(&y, &regs, &cfg, 0).unwrap();
    group.bench_function("reweight M=1024 n=12", |b| b.iter(|| draws.estimate(black_box(&model)).unwrap()));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("quad_g_marginal n=3", |b| {
        b.iter_batched(
            || random_instance(&mut substream(7, 0)),
            |inst| quad_g_marginal(&inst.y, &inst.beta_pts, inst.sigma, &inst.regs, &spec).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, closed_form, monte_carlo, oracle);
criterion_main!(benches);
