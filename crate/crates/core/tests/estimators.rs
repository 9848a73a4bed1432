//! Cross-checks between the Monte Carlo estimators and end-to-end use of
//! the public API.

use shapelik::io::{load_dataset, save_dataset, DatasetFile};
use shapelik::rng::{substream, unit};
use shapelik::{
    classify, dataset_loglik, likelihood_surface, mc_marginal_loglik, simulate_shape, BijectionMode, ClassModel,
    DataShape, LabelledDataset, McConfig, Proposal, Regulators, SimilarityTransform,
};

fn transform(rng: &mut shapelik::rng::Stream) -> SimilarityTransform {
    SimilarityTransform {
        angle: std::f64::consts::TAU * unit(rng),
        scale: 1.0 + unit(rng),
        translation: (unit(rng) - 0.5, unit(rng) - 0.5),
    }
}

fn shapes(model: &ClassModel, count: usize, n: usize, sigma: f64, seed: u64) -> Vec<DataShape> {
    let mut rng = substream(seed, 0);
    (0..count)
        .map(|_| {
            let tr = transform(&mut rng);
            simulate_shape(&mut rng, model, n, sigma, &tr).unwrap().0
        })
        .collect()
}

#[test]
fn guided_matches_prior_with_exact_enumeration() {
    let model = ClassModel::rectangle("a", 4.0, 0.5).unwrap();
    let regs = Regulators::new(0.01, 0.01, 2.0, 0.02).unwrap();
    for (i, y) in shapes(&model, 4, 5, 0.1, 31).iter().enumerate() {
        let guided = McConfig {
            m_samples: 20_000,
            seed: 100 + i as u64,
            ..Default::default()
        };
        let reference = McConfig {
            m_samples: 20_000,
            seed: 200 + i as u64,
            bijection_mode: BijectionMode::ExactEnumeration,
            proposal: Proposal::Prior,
            ..Default::default()
        };
        let g = mc_marginal_loglik(y, &model, &regs, &guided).unwrap();
        let p = mc_marginal_loglik(y, &model, &regs, &reference).unwrap();
        let z = (g.loglik - p.loglik) / (g.std_err.powi(2) + p.std_err.powi(2)).sqrt();
        assert!(z.abs() < 4.0, "shape {i}: guided {g:?} prior {p:?}");
    }
}

#[test]
fn dataset_round_trip_preserves_likelihood() {
    let model = ClassModel::rectangle("a", 4.0, 0.5).unwrap();
    let data = shapes(&model, 3, 8, 0.05, 32);
    let ids = (0..data.len()).map(|i| format!("s{i}")).collect();
    let file = DatasetFile::from_shapes(ids, vec![Some("a".into()); data.len()], &data).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.json");
    save_dataset(&path, &file).unwrap();
    let loaded = load_dataset(&path).unwrap();
    let direct = LabelledDataset::single_class(data, "a").unwrap();
    let cfg = McConfig {
        m_samples: 256,
        seed: 3,
        ..Default::default()
    };
    let regs = Regulators::default();
    let a = dataset_loglik(&direct, &model, &regs, &cfg).unwrap();
    let b = dataset_loglik(&loaded, &model, &regs, &cfg).unwrap();
    assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
}

#[test]
fn surface_nodes_match_direct_evaluation() {
    let model = ClassModel::rectangle("a", 3.0, 0.6).unwrap();
    let data = LabelledDataset::single_class(shapes(&model, 4, 10, 0.05, 33), "a").unwrap();
    let cfg = McConfig {
        m_samples: 512,
        seed: 8,
        ..Default::default()
    };
    let regs = Regulators::default();
    let (ks, ts) = ([2.0, 3.0, 5.0], [0.3, 0.6]);
    let grid = likelihood_surface(&data, &ks, &ts, &regs, &cfg).unwrap();
    for (i, &k) in ks.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let m = ClassModel::rectangle("a", k, t).unwrap();
            let direct = dataset_loglik(&data, &m, &regs, &cfg).unwrap();
            assert_eq!(grid.loglik[i][j].to_bits(), direct.loglik.to_bits(), "node ({k}, {t})");
            assert_eq!(grid.std_err[i][j].to_bits(), direct.std_err.to_bits(), "node ({k}, {t})");
        }
    }
}

#[test]
fn classification_prefers_the_generating_class() {
    let squat = ClassModel::rectangle("squat", 400.0, 1.2 / 400.0).unwrap();
    let long = ClassModel::rectangle("long", 400.0, 5.0 / 400.0).unwrap();
    let models = [squat.clone(), long.clone()];
    let cfg = McConfig {
        m_samples: 2048,
        seed: 4,
        ..Default::default()
    };
    for (truth, model) in models.iter().enumerate() {
        for y in shapes(model, 3, 12, 0.02, 34 + truth as u64) {
            let post = classify(&y, &models, &[0.5, 0.5], &Regulators::default(), &cfg).unwrap();
            let p: f64 = post.iter().map(|(_, lp)| lp.exp()).sum();
            assert!((p - 1.0).abs() < 1e-12);
            assert!(post[truth].1.exp() > 0.5, "truth {truth}: {post:?}");
        }
    }
}
