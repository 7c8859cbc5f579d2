mod common;

use common::{samples, tiny};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulnrank_neural::layers::{conv1d, conv1d_backward};
use vulnrank_neural::{gradcheck, relative_error, Mode, RankModel};

#[test]
fn every_parameter_tensor_passes_finite_differences() {
    for mode in Mode::ALL {
        let model = RankModel::<f64>::new(tiny(mode), 21).unwrap();
        let batch = samples(5, 3, 6, 3);
        let seeds = [1, 2, 3];
        let report = gradcheck(&model, &batch, Some(&seeds), 1e-5, 1e-8).unwrap();
        assert_eq!(report.len(), model.params().len());
        for t in &report {
            assert!(t.max_rel_err < 1e-4, "{mode} {}: {}", t.name, t.max_rel_err);
        }
        // Wiring check: the active stack has non-zero gradients.
        let live = |prefix: &str| report.iter().filter(|t| t.name.contains(prefix)).any(|t| t.max_abs_grad > 0.0);
        assert_eq!(live(".conv."), mode != Mode::BigruOnly, "{mode}");
        assert_eq!(live(".gru"), mode != Mode::CnnOnly, "{mode}");
        assert!(live("head."));
    }
}

#[test]
fn conv_layer_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (l, k, f, w) = (5, 4, 3, 3);
    let x: Vec<f64> = (0..l * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut kernel: Vec<f64> = (0..f * w * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut bias: Vec<f64> = (0..f).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let dy: Vec<f64> = (0..l * f).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let loss = |x: &[f64], kernel: &[f64], bias: &[f64]| -> f64 {
        conv1d(x, l, k, kernel, bias, f, w).iter().zip(&dy).map(|(a, b)| a * b).sum()
    };
    let y = conv1d(&x, l, k, &kernel, &bias, f, w);
    let (mut dk, mut db, mut dx) = (vec![0.0; kernel.len()], vec![0.0; f], vec![0.0; x.len()]);
    conv1d_backward(&x, l, k, &kernel, f, w, &y, &dy, &mut dk, &mut db, Some(&mut dx));
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for i in 0..kernel.len() {
        let o = kernel[i];
        kernel[i] = o + h;
        let up = loss(&x, &kernel, &bias);
        kernel[i] = o - h;
        let down = loss(&x, &kernel, &bias);
        kernel[i] = o;
        worst = worst.max(relative_error(dk[i], (up - down) / (2.0 * h), 1e-8));
    }
    for i in 0..f {
        let o = bias[i];
        bias[i] = o + h;
        let up = loss(&x, &kernel, &bias);
        bias[i] = o - h;
        let down = loss(&x, &kernel, &bias);
        bias[i] = o;
        worst = worst.max(relative_error(db[i], (up - down) / (2.0 * h), 1e-8));
    }
    let mut xp = x.clone();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let up = loss(&xp, &kernel, &bias);
        xp[i] = x[i] - h;
        let down = loss(&xp, &kernel, &bias);
        xp[i] = x[i];
        worst = worst.max(relative_error(dx[i], (up - down) / (2.0 * h), 1e-8));
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}
