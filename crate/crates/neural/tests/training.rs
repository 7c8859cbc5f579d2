mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulnrank_neural::{predict, train, Mode, ModelConfig, NeuralError, RankModel, Sample, Tensor, TrainConfig};

const K: usize = 4;

/// Random token rows; TP documents carry one fixed marker row somewhere.
fn toy(seed: u64, n: usize) -> Vec<Sample<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marker = [1.0, -1.0, 1.0, -1.0];
    (0..n)
        .map(|i| {
            let label = usize::from(i % 3 == 0);
            let mut doc = |l: usize| {
                let mut d: Vec<f32> = (0..l * K).map(|_| rng.gen_range(-0.3..0.3)).collect();
                if label == 1 {
                    let at = rng.gen_range(0..l);
                    d[at * K..(at + 1) * K].copy_from_slice(&marker);
                }
                Tensor::new(vec![l, K], d).unwrap()
            };
            Sample { slice: doc(8), gadget: doc(10), label }
        })
        .collect()
}

fn cfg(mode: Mode) -> ModelConfig {
    ModelConfig { embed_dim: K, filters: 6, kernel_width: 3, hidden: 4, layers: 1, dense: 8, dropout: 0.1, mode }
}

#[test]
fn separable_toy_set_is_learned() {
    let data = toy(1, 120);
    for mode in Mode::ALL {
        let mut model = RankModel::<f32>::new(cfg(mode), 2).unwrap();
        let hist = train(&mut model, &data, &TrainConfig { epochs: 40, batch_size: 16, ..TrainConfig::default() }).unwrap();
        let probs = predict(&model, &data).unwrap();
        let acc = probs.iter().zip(&data).filter(|(p, s)| usize::from(p[1] > p[0]) == s.label).count() as f64 / data.len() as f64;
        assert!(acc >= 0.95, "{mode}: accuracy {acc}, last epoch {:?}", hist.last());
        assert!(hist.last().unwrap().loss < hist[0].loss);
    }
}

#[test]
fn same_seed_same_history() {
    let data = toy(2, 40);
    let run = || {
        let mut m = RankModel::<f32>::new(cfg(Mode::Combined), 3).unwrap();
        let h = train(&mut m, &data, &TrainConfig { epochs: 3, batch_size: 8, seed: 9, ..TrainConfig::default() }).unwrap();
        (h, m)
    };
    let (h1, m1) = run();
    let (h2, m2) = run();
    assert_eq!(h1, h2);
    assert_eq!(m1, m2);
}

#[test]
fn first_epoch_starts_at_ln2() {
    let data = toy(3, 64);
    let mut m = RankModel::<f32>::new(cfg(Mode::Combined), 3).unwrap();
    m.zero_output_layer();
    let (first, _) = m.loss_and_grad(&data[..16], None).unwrap();
    assert!((first - std::f32::consts::LN_2).abs() < 1e-6);
    let h = train(&mut m, &data, &TrainConfig { epochs: 1, batch_size: 16, ..TrainConfig::default() }).unwrap();
    assert!((h[0].loss - std::f64::consts::LN_2).abs() < 0.05, "{:?}", h[0]);
}

#[test]
fn empty_dataset() {
    let mut m = RankModel::<f32>::new(cfg(Mode::Combined), 3).unwrap();
    assert_eq!(train(&mut m, &[], &TrainConfig::default()), Err(NeuralError::EmptyDataset));
}
