#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulnrank_neural::{Mode, ModelConfig, Sample, Tensor};

pub fn tiny(mode: Mode) -> ModelConfig {
    ModelConfig { embed_dim: 3, filters: 3, kernel_width: 3, hidden: 2, layers: 2, dense: 4, dropout: 0.1, mode }
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor<f64> {
    Tensor::new(vec![rows, cols], (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn samples(seed: u64, n: usize, l: usize, k: usize) -> Vec<Sample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| Sample { slice: matrix(&mut rng, l, k), gadget: matrix(&mut rng, l + 1, k), label: i % 2 }).collect()
}
