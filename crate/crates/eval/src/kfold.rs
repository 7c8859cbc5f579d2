use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::EvalError;

/// Fold index of every sample. TPs are shuffled and dealt round-robin, then
/// the FPs continue the deal, so fold sizes differ by at most one and each
/// fold holds `⌊t/k⌋` or `⌈t/k⌉` of the `t` TPs.
pub fn kfold_split(is_tp: &[bool], k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 || is_tp.len() < k {
        return Err(EvalError::TooFewSamples { samples: is_tp.len(), folds: k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tps: Vec<usize> = (0..is_tp.len()).filter(|&i| is_tp[i]).collect();
    let mut fps: Vec<usize> = (0..is_tp.len()).filter(|&i| !is_tp[i]).collect();
    tps.shuffle(&mut rng);
    fps.shuffle(&mut rng);
    let mut fold = vec![0; is_tp.len()];
    for (slot, &i) in tps.iter().chain(&fps).enumerate() {
        fold[i] = slot % k;
    }
    Ok(fold)
}

/// `(train, test)` index lists of fold `f`.
pub fn fold_indices(folds: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != f)
}
