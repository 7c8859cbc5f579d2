use serde::{Deserialize, Serialize};

use crate::model::{RankModel, Sample};
use crate::tensor::NeuralError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCheck {
    pub name: String,
    pub values: usize,
    pub max_rel_err: f64,
    pub max_abs_grad: f64,
}

/// `|a − n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares the analytic gradient of the mean batch loss with central
/// finite differences of step `h`, for every scalar of every parameter.
/// Dropout masks, when given, are held fixed across evaluations.
pub fn gradcheck(
    model: &RankModel<f64>,
    batch: &[Sample<f64>],
    dropout_seeds: Option<&[u64]>,
    h: f64,
    floor: f64,
) -> Result<Vec<TensorCheck>, NeuralError> {
    let (_, grads) = model.loss_and_grad(batch, dropout_seeds)?;
    let mut probe = model.clone();
    let mut out = Vec::new();
    for (i, name) in model.names().iter().enumerate() {
        let mut check = TensorCheck { name: name.clone(), values: model.params()[i].len(), max_rel_err: 0.0, max_abs_grad: 0.0 };
        for j in 0..model.params()[i].len() {
            let orig = model.params()[i].data()[j];
            probe.params_mut()[i].data_mut()[j] = orig + h;
            let (up, _) = probe.loss_and_grad(batch, dropout_seeds)?;
            probe.params_mut()[i].data_mut()[j] = orig - h;
            let (down, _) = probe.loss_and_grad(batch, dropout_seeds)?;
            probe.params_mut()[i].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.tensors[i][j];
            check.max_rel_err = check.max_rel_err.max(relative_error(analytic, numeric, floor));
            check.max_abs_grad = check.max_abs_grad.max(analytic.abs());
        }
        out.push(check);
    }
    Ok(out)
}
