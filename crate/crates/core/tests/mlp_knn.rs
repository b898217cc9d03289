use gasdemand_core::linalg::Matrix;
use gasdemand_core::models::knn::{KnnModel, Weighting};
use gasdemand_core::models::mlp::{MlpConfig, MlpModel, Network};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> (Matrix, Vec<f64>) {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    let y = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
    (Matrix::from_vec(rows, cols, data), y)
}

#[test]
fn gradients_match_central_differences_at_every_layer() {
    let h = 1e-5;
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Network::init(&[21, 24, 12, 4, 1], &mut rng);
        let mut net = net;
        for layer in net.layers.iter_mut() {
            layer.b.iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
        }
        let (x, y) = random_batch(&mut rng, 5, 21);
        let (_, grads) = net.loss_and_gradient(&x, &y);
        for (l, grad) in grads.iter().enumerate() {
            let mut worst = 0.0f64;
            let n_w = net.layers[l].w.as_slice().len();
            for i in 0..n_w + net.layers[l].b.len() {
                let probe = |delta: f64| {
                    let mut n = net.clone();
                    if i < n_w {
                        n.layers[l].w.as_mut_slice()[i] += delta;
                    } else {
                        n.layers[l].b[i - n_w] += delta;
                    }
                    n.loss_and_gradient(&x, &y).0
                };
                let numeric = (probe(h) - probe(-h)) / (2.0 * h);
                let analytic = if i < n_w { grad.w.as_slice()[i] } else { grad.b[i - n_w] };
                let scale = analytic.abs().max(numeric.abs());
                if scale > 1e-7 {
                    worst = worst.max((analytic - numeric).abs() / scale);
                }
            }
            assert!(worst < 1e-4, "layer {l}: relative error {worst}");
        }
    }
}

fn line(n: usize) -> (Matrix, Vec<f64>) {
    let xs: Vec<[f64; 1]> = (0..n).map(|i| [-1.0 + 2.0 * i as f64 / (n - 1) as f64]).collect();
    let y = xs.iter().map(|x| 2.0 * x[0]).collect();
    (Matrix::from_rows(&xs), y)
}

#[test]
fn seeded_training_is_bit_reproducible() {
    let (x, y) = line(64);
    let cfg = MlpConfig { epochs: 50, seed: 9, ..MlpConfig::default() };
    let a = MlpModel::fit(&x, &y, &cfg).unwrap();
    let b = MlpModel::fit(&x, &y, &cfg).unwrap();
    assert_eq!(a, b);
    let c = MlpModel::fit(&x, &y, &MlpConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.network, c.network);
}

#[test]
fn zero_epochs_is_the_initial_network() {
    let (x, y) = line(16);
    let cfg = MlpConfig { epochs: 0, seed: 4, ..MlpConfig::default() };
    let m = MlpModel::fit(&x, &y, &cfg).unwrap();
    let init = Network::init(&[1, 24, 12, 4, 1], &mut ChaCha8Rng::seed_from_u64(4));
    assert_eq!(m.network, init);
    for r in x.iter_rows() {
        assert_eq!(m.predict_row(r), m.target_mean + m.target_std * init.forward(r));
    }
}

#[test]
fn learns_a_linear_map() {
    let (x, y) = line(256);
    let sd = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    // A one-input ReLU stack occasionally starts with a dead layer, so score several seeds.
    let good = (0..10)
        .filter(|&seed| {
            let m = MlpModel::fit(&x, &y, &MlpConfig { seed, ..MlpConfig::default() }).unwrap();
            assert!(m.loss_history.iter().all(|l| l.is_finite()));
            let mse = x.iter_rows().zip(&y).map(|(r, t)| (m.predict_row(r) - t).powi(2)).sum::<f64>() / y.len() as f64;
            mse.sqrt() < 0.05 * sd
        })
        .count();
    assert!(good >= 9, "{good}/10 seeds fit the line");
}

#[test]
fn knn_hand_computed_inverse_distance() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0]]);
    let y = [10.0, 20.0, 30.0, 40.0];
    let m = KnnModel::fit(&x, &y, 2, Weighting::InverseDistance).unwrap();
    // Distances from (0.5, 0.5): √0.5, √0.5, √2.5, √12.5.
    assert!((m.predict_row(&[0.5, 0.5]) - 15.0).abs() < 1e-12);
    // From (0, 1): 1, √2, 1, √13 → ties at distance 1 keep the earlier rows.
    assert!((m.predict_row(&[0.0, 1.0]) - 20.0).abs() < 1e-12);
    // From (1, 1): 1 (row 1), √2 (row 0).
    let w = [1.0, 1.0 / 2f64.sqrt()];
    let expected = (w[0] * 20.0 + w[1] * 10.0) / (w[0] + w[1]);
    assert!((m.predict_row(&[1.0, 1.0]) - expected).abs() < 1e-12);
    assert_eq!(m.predict_row(&[3.0, 3.0]), 40.0);
}

#[test]
fn knn_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x, y) = random_batch(&mut rng, 30, 3);
    let all = KnnModel::fit(&x, &y, 30, Weighting::Uniform).unwrap();
    let mean = y.iter().sum::<f64>() / 30.0;
    assert!((all.predict_row(&[5.0, -2.0, 0.3]) - mean).abs() < 1e-12);
    let one = KnnModel::fit(&x, &y, 1, Weighting::Uniform).unwrap();
    for (r, t) in x.iter_rows().zip(&y) {
        assert_eq!(one.predict_row(r), *t);
    }
    assert!(KnnModel::fit(&x, &y, 31, Weighting::Uniform).is_err());
    assert!(KnnModel::fit(&Matrix::zeros(0, 3), &[], 1, Weighting::Uniform).is_err());
}

proptest! {
    #[test]
    fn knn_prediction_is_within_neighbour_range(seed in 0u64..500, k in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_batch(&mut rng, 20, 2);
        let q: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
        for w in [Weighting::Uniform, Weighting::InverseDistance] {
            let p = KnnModel::fit(&x, &y, k, w).unwrap().predict_row(&q);
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }
}
