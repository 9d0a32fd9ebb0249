use nalgebra::DMatrix;
use proptest::prelude::*;
use pseudoword::embeddings::Embeddings;
use pseudoword::mapping::{init_neural, init_random, project, MappingMatrix, NeuralInitOptions};
use pseudoword::rng;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

fn naive_matvec(m: &MappingMatrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.rows()];
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[i] += m.get(i, j) * v[j];
        }
    }
    out
}

#[test]
fn random_init_mean_within_clt_bound() {
    let (d_emb, d_v) = (300, 4096);
    let m = init_random(d_emb, d_v, &mut rng::seeded(17));
    let n = (d_emb * d_v) as f64;
    let mean = m.values().iter().sum::<f64>() / n;
    let range = 1.0 / d_emb as f64;
    let bound = 4.0 * (range / 12f64.sqrt()) / n.sqrt();
    assert!(mean.abs() < bound, "{mean} vs {bound}");
}

#[test]
fn projection_matches_triple_loop() {
    let mut r = rng::seeded(3);
    let m = MappingMatrix::from_vec(5, 7, (0..35).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
    let v: Vec<f64> = (0..7).map(|_| r.random_range(-2.0..2.0)).collect();
    for (a, b) in project(&m, &v).unwrap().iter().zip(naive_matvec(&m, &v)) {
        assert!((a - b).abs() < 1e-12);
    }
}

struct Problem {
    features: Vec<(String, Vec<f64>)>,
    targets: Embeddings,
    planted: DMatrix<f64>,
}

fn linear_problem(n: usize, d_v: usize, d_emb: usize, noise: f64, seed: u64) -> Problem {
    let mut r = rng::seeded(seed);
    let planted: DMatrix<f64> = DMatrix::from_fn(d_emb, d_v, |_, _| StandardNormal.sample(&mut r));
    let mut features = Vec::new();
    let mut targets = Embeddings::new(d_emb);
    for i in 0..n {
        let v: Vec<f64> = (0..d_v).map(|_| StandardNormal.sample(&mut r)).collect();
        let clean: DMatrix<f64> = &planted * DMatrix::from_column_slice(d_v, 1, &v);
        let e: Vec<f64> = clean
            .iter()
            .map(|x| {
                let eps: f64 = StandardNormal.sample(&mut r);
                x + noise * eps
            })
            .collect();
        let word = format!("w{i}");
        targets.push(&word, &e).unwrap();
        features.push((word, v));
    }
    Problem { features, targets, planted }
}

/// Least-squares M from the normal equations (VᵀV) Mᵀ = VᵀE, plus its MSE.
fn least_squares(p: &Problem) -> (DMatrix<f64>, f64) {
    let n = p.features.len();
    let d_v = p.features[0].1.len();
    let d_emb = p.targets.dim();
    let v = DMatrix::from_fn(n, d_v, |i, j| p.features[i].1[j]);
    let e = DMatrix::from_fn(n, d_emb, |i, j| p.targets.get(&p.features[i].0).unwrap()[j]);
    let vtv = v.transpose() * &v;
    let mt = vtv.lu().solve(&(v.transpose() * &e)).unwrap();
    let resid = &v * &mt - &e;
    (mt.transpose(), resid.norm_squared() / n as f64)
}

fn to_dmatrix(m: &MappingMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.values())
}

#[test]
fn neural_init_recovers_planted_matrix() {
    let p = linear_problem(100, 10, 10, 0.0, 5);
    let (oracle, _) = least_squares(&p);
    assert!((&oracle - &p.planted).norm() / p.planted.norm() < 1e-8);

    let opts = NeuralInitOptions { epochs: 500, lr: 0.05, batch_size: 10 };
    let fit = init_neural(&p.features, &p.targets, &opts, &mut rng::seeded(6)).unwrap();
    let rel = (to_dmatrix(&fit.matrix) - &oracle).norm() / oracle.norm();
    assert!(rel < 0.05, "relative Frobenius error {rel}");
    assert_eq!(fit.pairs_used, 100);
}

#[test]
fn neural_init_approaches_least_squares_residual() {
    let p = linear_problem(200, 6, 4, 0.3, 8);
    let (_, oracle_mse) = least_squares(&p);
    let opts = NeuralInitOptions { epochs: 300, lr: 0.02, batch_size: 16 };
    let fit = init_neural(&p.features, &p.targets, &opts, &mut rng::seeded(9)).unwrap();
    assert!(fit.final_mse() <= oracle_mse * 1.1, "{} vs {}", fit.final_mse(), oracle_mse);
    assert!(fit.final_mse() >= oracle_mse * (1.0 - 1e-9));
}

#[test]
fn backoff_keeps_mse_monotone() {
    // lr far above the stability limit: every bad epoch is rolled back
    let p = linear_problem(50, 8, 3, 0.1, 10);
    let opts = NeuralInitOptions { epochs: 60, lr: 5.0, batch_size: 5 };
    let fit = init_neural(&p.features, &p.targets, &opts, &mut rng::seeded(1)).unwrap();
    let mut prev = fit.initial_mse;
    for &m in &fit.mse_history {
        assert!(m <= prev);
        prev = m;
    }
    assert!(fit.final_lr < 5.0);
    assert!(fit.final_mse() < fit.initial_mse);
}

#[test]
fn missing_targets_are_counted() {
    let p = linear_problem(10, 3, 2, 0.0, 2);
    let mut features = p.features.clone();
    features.push(("unseen".into(), vec![1.0, 2.0, 3.0]));
    let fit = init_neural(&features, &p.targets, &NeuralInitOptions::default(), &mut rng::seeded(0)).unwrap();
    assert_eq!((fit.pairs_used, fit.skipped), (10, 1));
}

proptest! {
    #[test]
    fn projection_is_linear(
        seed in any::<u64>(),
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
    ) {
        let mut r = rng::seeded(seed);
        let m = MappingMatrix::from_vec(4, 6, (0..24).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let x: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(x, y)| a * x + b * y).collect();
        let lhs = project(&m, &combo).unwrap();
        let px = project(&m, &x).unwrap();
        let py = project(&m, &y).unwrap();
        for i in 0..4 {
            prop_assert!((lhs[i] - (a * px[i] + b * py[i])).abs() < 1e-10);
        }
    }
}
