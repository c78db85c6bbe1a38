mod common;

use common::*;
use fedlearn_edu::dataset::EncodedDataset;
use fedlearn_edu::models::{
    argmax_rows, hinge_objective, logistic_gradient, logistic_loss, predict_labels, predict_scores, train,
    train_svm, LinearKind, LinearModel, Model, ModelDocument, ModelKind, TrainConfig,
};
use ndarray::{Array1, Array2};
use rand::Rng;

fn random_model(r: &mut rand_chacha::ChaCha8Rng, k: usize, d: usize) -> LinearModel {
    let mut m = LinearModel::zeros(LinearKind::Logistic, k, d);
    m.weights = Array2::from_shape_fn(m.weights.dim(), |_| r.random_range(-1.0..1.0));
    m.bias = Array1::from_shape_fn(m.bias.len(), |_| r.random_range(-1.0..1.0));
    m
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[test]
fn logistic_gradient_matches_central_differences() {
    let h = 1e-5;
    let mut r = rng(21);
    for case in 0..24 {
        let k = [2, 3][case % 2];
        let d = r.random_range(2..=5);
        let data = random_dataset(&mut r, 8, d, k);
        let l2 = r.random_range(0.0..0.1);
        let model = random_model(&mut r, k, d);
        let (gw, gb) = logistic_gradient(&model, &data, l2).unwrap();
        let loss = |m: &LinearModel| logistic_loss(m, &data, l2).unwrap();
        for idx in ndarray::indices(model.weights.dim()) {
            let (mut plus, mut minus) = (model.clone(), model.clone());
            plus.weights[idx] += h;
            minus.weights[idx] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!(rel_err(gw[idx], fd) < 1e-4, "case {case} w{idx:?}: {} vs {fd}", gw[idx]);
        }
        for c in 0..model.bias.len() {
            let (mut plus, mut minus) = (model.clone(), model.clone());
            plus.bias[c] += h;
            minus.bias[c] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!(rel_err(gb[c], fd) < 1e-4, "case {case} b{c}: {} vs {fd}", gb[c]);
        }
    }
}

#[test]
fn svm_objective_non_increasing_over_final_epochs() {
    let mut r = rng(22);
    let data = random_dataset(&mut r, 20, 3, 2);
    let cfg = TrainConfig {
        learning_rate: 0.05,
        l2: 1e-3,
        seed: 5,
        ..TrainConfig::default()
    };
    // training for e epochs replays the first e epochs of a longer run
    let total = 300;
    let trace: Vec<f64> = (total - 10..=total)
        .map(|e| {
            let m = train_svm(&data, &TrainConfig { epochs: e, ..cfg.clone() }, None).unwrap();
            hinge_objective(&m, &data, cfg.l2).unwrap()
        })
        .collect();
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "objective rose: {trace:?}");
    }
}

#[test]
fn predicted_labels_are_score_argmax() {
    let mut r = rng(23);
    for case in 0..100 {
        let k = r.random_range(2..=3);
        let data = random_dataset(&mut r, 30, 4, k);
        let kind = ModelKind::ALL[case % 3];
        let cfg = TrainConfig {
            epochs: 20,
            n_trees: 5,
            seed: case as u64,
            ..TrainConfig::defaults_for(kind)
        };
        let model = train(kind, &data, &cfg, None).unwrap();
        let x = Array2::from_shape_fn((25, 4), |_| r.random_range(-2.0..2.0));
        let scores = predict_scores(&model, &x).unwrap();
        let labels = predict_labels(&model, &x).unwrap();
        for (i, &l) in labels.iter().enumerate() {
            let row = scores.row(i);
            let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let first = row.iter().position(|&s| s == best).unwrap();
            assert_eq!(l, first);
        }
        assert_eq!(labels, argmax_rows(&scores));
        if kind != ModelKind::Svm {
            for row in scores.rows() {
                assert!(row.iter().all(|&p| p >= 0.0));
                assert!((row.sum() - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn training_is_deterministic_and_zero_epochs_is_identity() {
    let mut r = rng(24);
    let data = random_dataset(&mut r, 40, 5, 3);
    for kind in ModelKind::ALL {
        let cfg = TrainConfig {
            epochs: 15,
            n_trees: 7,
            seed: 3,
            ..TrainConfig::defaults_for(kind)
        };
        let a = train(kind, &data, &cfg, None).unwrap();
        let b = train(kind, &data, &cfg, None).unwrap();
        assert_eq!(a, b);
        if kind.is_parametric() {
            let zero = TrainConfig { epochs: 0, ..cfg };
            assert_eq!(train(kind, &data, &zero, Some(&a)).unwrap(), a);
        }
    }
}

#[test]
fn model_documents_round_trip() {
    let mut r = rng(25);
    let data = random_dataset(&mut r, 30, 3, 3);
    for kind in ModelKind::ALL {
        let cfg = TrainConfig {
            epochs: 10,
            n_trees: 3,
            max_depth: 3,
            ..TrainConfig::defaults_for(kind)
        };
        let model = train(kind, &data, &cfg, None).unwrap();
        let text = ModelDocument::to_json(&model).unwrap();
        assert!(text.contains("\"format_version\": 1"));
        let back: Model = ModelDocument::from_json(&text).unwrap();
        assert_eq!(
            predict_scores(&back, &data.features).unwrap(),
            predict_scores(&model, &data.features).unwrap()
        );
    }
}

#[test]
fn separable_points_are_learned() {
    let x = Array2::from_shape_vec((2, 1), vec![-1.0, 1.0]).unwrap();
    let data = EncodedDataset::new(x.clone(), vec![0, 1], 2).unwrap();
    let lr = TrainConfig {
        learning_rate: 0.5,
        epochs: 200,
        l2: 0.0,
        ..TrainConfig::default()
    };
    let m = train(ModelKind::Logistic, &data, &lr, None).unwrap();
    assert_eq!(predict_labels(&m, &x).unwrap(), vec![0, 1]);
    let m = train(ModelKind::Svm, &data, &TrainConfig::defaults_for(ModelKind::Svm), None).unwrap();
    let margins = predict_scores(&m, &x).unwrap();
    assert!(margins[[0, 1]] < 0.0 && margins[[1, 1]] > 0.0);
}
