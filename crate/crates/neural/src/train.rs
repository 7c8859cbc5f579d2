use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adamax::{AdamaxConfig, AdamaxState};
use crate::model::{RankModel, Sample};
use crate::tensor::NeuralError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adamax: AdamaxConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 60, batch_size: 64, seed: 0, adamax: AdamaxConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean training loss over the epoch (dropout on).
    pub loss: f64,
    /// Training accuracy of the same forward passes.
    pub accuracy: f64,
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Minibatch Adamax training. The shuffle of each epoch and the dropout mask
/// of each (epoch, sample) pair derive from `cfg.seed` alone.
pub fn train<F: Float + Send + Sync>(
    model: &mut RankModel<F>,
    data: &[Sample<F>],
    cfg: &TrainConfig,
) -> Result<Vec<EpochStats>, NeuralError> {
    if data.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let mut opt = AdamaxState::new(model.params(), cfg.adamax);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let epoch_seed = mix_seed(cfg.seed, epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed));
        let (mut loss, mut correct) = (0.0, 0);
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let batch: Vec<&Sample<F>> = chunk.iter().map(|&i| &data[i]).collect();
            let seeds: Vec<u64> = chunk.iter().map(|&i| mix_seed(epoch_seed, i as u64)).collect();
            let (l, mut g, ok) = model.accumulate(&batch, Some(&seeds))?;
            loss += l.to_f64().unwrap();
            correct += ok;
            let inv = F::from(1.0 / chunk.len() as f64).unwrap();
            g.tensors.iter_mut().flatten().for_each(|v| *v = *v * inv);
            opt.step(model.params_mut(), &g)?;
        }
        history.push(EpochStats {
            epoch,
            loss: loss / data.len() as f64,
            accuracy: correct as f64 / data.len() as f64,
        });
    }
    Ok(history)
}

/// `(p_FP, p_TP)` for every sample in inference mode, in input order.
pub fn predict<F: Float + Send + Sync>(model: &RankModel<F>, data: &[Sample<F>]) -> Result<Vec<[F; 2]>, NeuralError> {
    use rayon::prelude::*;
    data.par_iter().map(|s| model.forward(&s.slice, &s.gadget)).collect()
}
