mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use stnn_ddi::data::generate_planted;
use stnn_ddi::experiment::training_set;
use stnn_ddi::model::{init_model, train, Gradients, TrainConfig};
use stnn_ddi::tensor::{cp_reconstruct, dense_score, mode_product_vec, matrix_mode_product, vector_mode_product, basis, Mode};
use stnn_ddi::{Dataset, Fingerprint, LabeledTriple};

fn flatten(g: &Gradients) -> Vec<f64> {
    g.d_a
        .iter()
        .chain(g.d_c.iter())
        .chain(g.d_w.iter())
        .copied()
        .chain(std::iter::once(g.d_bias))
        .collect()
}

fn grad_matches_fd(model: &stnn_ddi::FactorModel, batch: &[LabeledTriple], fps: &[Fingerprint]) {
    let analytic = flatten(&model.grad_batch(batch, fps).unwrap());
    let numeric = finite_difference_grad(model, 1e-6, |m| m.loss_batch(batch, fps).unwrap());
    assert_eq!(analytic.len(), numeric.len());
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let ok = (a - n).abs() <= 1e-4 * a.abs().max(n.abs()) || (a - n).abs() <= 1e-6;
        assert!(ok, "coordinate {i}: analytic {a} vs numeric {n}");
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = rng(100);
    for _ in 0..5 {
        let bias = rng.gen_range(-0.5..0.5);
        let model = random_model(&mut rng, 10, 4, 5, bias);
        let fps: Vec<_> = (0..6).map(|_| random_fp(&mut rng, 10, 0.3)).collect();
        let batch = random_batch(&mut rng, 6, 4, 8);
        grad_matches_fd(&model, &batch, &fps);
    }
}

#[test]
fn gradient_on_same_drug_both_sides() {
    let mut rng = rng(101);
    let model = random_model(&mut rng, 8, 2, 3, 0.1);
    let fps = vec![Fingerprint::new([1, 4, 6], 8).unwrap()];
    let batch = [
        LabeledTriple { p: 0, q: 0, k: 1, label: 1 },
        LabeledTriple { p: 0, q: 0, k: 0, label: 0 },
    ];
    grad_matches_fd(&model, &batch, &fps);
    // both sides feed the same rows, so each selected row gets two terms
    let g = model.grad_batch(&batch[..1], &fps).unwrap();
    let u = model.drug_embedding(&fps[0]).unwrap();
    let s = model.score(&fps[0], &fps[0], 1).unwrap();
    let gs = 2.0 * (s - 1.0);
    for x in 0..3 {
        let one_side = gs * model.w_lambda[x] * u[x] * model.c[[1, x]];
        assert!((g.d_a[[4, x]] - 2.0 * one_side).abs() < 1e-12);
    }
}

#[test]
fn dense_and_factorized_agree_exhaustively() {
    let mut rng = rng(102);
    for _ in 0..5 {
        let model = random_model(&mut rng, 8, 4, 4, 0.0);
        let st = cp_reconstruct(&model.to_rank_one_factors()).unwrap();
        let fps: Vec<_> = (0..6).map(|_| random_fp(&mut rng, 8, 0.4)).collect();
        for p in &fps {
            for q in &fps {
                for k in 0..4 {
                    let fact = model.score(p, q, k).unwrap();
                    assert!(rel_close(fact, dense_score(&st, p, q, k).unwrap(), 1e-9));
                    // the generic mode-product chain of e_q, e_p, v_k
                    let m = mode_product_vec(&st, &basis(4, k), Mode::Three).unwrap();
                    let v = matrix_mode_product(&m, &q.to_dense(8), Mode::One).unwrap();
                    let chained = vector_mode_product(&v, &p.to_dense(8)).unwrap();
                    assert!(rel_close(fact, chained, 1e-9));
                }
            }
        }
    }
}

#[test]
fn adding_unseen_substructure_leaves_scores_unchanged() {
    let mut rng = rng(103);
    let model = random_model(&mut rng, 10, 3, 4, 0.2);
    let fps: Vec<_> = (0..5).map(|_| Fingerprint::new((0..9).filter(|_| rng.gen_bool(0.5)), 10).unwrap()).collect();
    let mut tweaked = model.clone();
    for x in 0..4 {
        tweaked.a[[9, x]] = 123.0;
    }
    for p in &fps {
        for q in &fps {
            for k in 0..3 {
                assert_eq!(model.score(p, q, k).unwrap(), tweaked.score(p, q, k).unwrap());
            }
        }
    }
}

fn planted_fixture() -> (Dataset, Vec<LabeledTriple>, TrainConfig) {
    let (ds, _) = generate_planted(20, 30, 3, 3, 0.1, 21).unwrap();
    let cfg = TrainConfig {
        rank: 16,
        epochs: 200,
        batch_size: 64,
        learning_rate: 0.01,
        seed: 4,
        ..TrainConfig::default()
    };
    let triples = training_set(&ds, &cfg).unwrap();
    (ds, triples, cfg)
}

#[test]
fn training_reduces_loss_on_planted_data() {
    let (ds, triples, cfg) = planted_fixture();
    let (model, report) = train(&ds, &triples, &cfg).unwrap();
    assert_eq!(report.loss_history.len(), 200);
    assert_eq!(report.loss_history[0].epoch, 1);
    let first = report.loss_history[0].loss;
    assert!(report.final_loss < 0.1 * first, "{} vs {}", report.final_loss, first);
    assert!(model.is_finite());
}

#[test]
fn training_is_deterministic_and_zero_epochs_is_init() {
    let (ds, triples, mut cfg) = planted_fixture();
    cfg.epochs = 20;
    let (a, ra) = train(&ds, &triples, &cfg).unwrap();
    let (b, rb) = train(&ds, &triples, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    cfg.epochs = 0;
    let (z, rz) = train(&ds, &triples, &cfg).unwrap();
    assert_eq!(z, init_model(ds.n, ds.f(), &cfg).unwrap());
    assert!(rz.loss_history.is_empty());
    assert!(rz.final_loss.is_finite());
}

#[test]
fn divergence_is_reported() {
    let (ds, triples, mut cfg) = planted_fixture();
    cfg.optimizer = stnn_ddi::Optimizer::Sgd;
    cfg.learning_rate = 1e6;
    cfg.init_scale = 3.0;
    cfg.epochs = 50;
    match train(&ds, &triples, &cfg) {
        Err(stnn_ddi::Error::TrainingDiverged { learning_rate, .. }) => assert_eq!(learning_rate, 1e6),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn training_rejects_single_class() {
    let (ds, triples, cfg) = planted_fixture();
    let only_pos: Vec<_> = triples.into_iter().filter(|t| t.label == 1).collect();
    assert!(train(&ds, &only_pos, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn score_is_symmetric(seed in any::<u64>(), k in 0usize..3) {
        let mut rng = rng(seed);
        let bias = rng.gen_range(-1.0..1.0);
        let model = random_model(&mut rng, 12, 3, 5, bias);
        let p = random_fp(&mut rng, 12, 0.4);
        let q = random_fp(&mut rng, 12, 0.4);
        prop_assert_eq!(model.score(&p, &q, k).unwrap().to_bits(), model.score(&q, &p, k).unwrap().to_bits());
    }

    #[test]
    fn score_is_additive_over_disjoint_p_bits(seed in any::<u64>(), k in 0usize..3) {
        let mut rng = rng(seed);
        let model = random_model(&mut rng, 12, 3, 4, 0.7);
        let q = random_fp(&mut rng, 12, 0.5);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for i in 0..12 {
            match rng.gen_range(0..3) {
                0 => left.push(i),
                1 => right.push(i),
                _ => {}
            }
        }
        let union = Fingerprint::new(left.iter().chain(&right).copied(), 12).unwrap();
        let l = Fingerprint::new(left, 12).unwrap();
        let r = Fingerprint::new(right, 12).unwrap();
        let b = model.bias;
        let whole = model.score(&union, &q, k).unwrap() - b;
        let parts = (model.score(&l, &q, k).unwrap() - b) + (model.score(&r, &q, k).unwrap() - b);
        prop_assert!((whole - parts).abs() < 1e-12);
    }
}
