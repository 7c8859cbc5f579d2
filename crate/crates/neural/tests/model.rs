mod common;

use common::{matrix, samples, tiny};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulnrank_neural::{Mode, ModelConfig, NeuralError, RankModel, Tensor};

#[test]
fn softmax_is_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let models: Vec<RankModel<f32>> = Mode::ALL.iter().map(|&m| RankModel::new(tiny(m), 2).unwrap()).collect();
    for i in 0..1000 {
        let scale = rng.gen_range(0.1..20.0);
        let l = rng.gen_range(1..10);
        let s: Tensor<f32> = matrix(&mut rng, l, 3).cast();
        let lg = rng.gen_range(1..10);
        let g: Tensor<f32> = matrix(&mut rng, lg, 3).cast();
        let s = Tensor::new(vec![l, 3], s.data().iter().map(|v| v * scale).collect()).unwrap();
        let p = models[i % 3].forward_with(&s, &g, (i % 2 == 0).then_some(i as u64)).unwrap();
        assert!(p[0] >= 0.0 && p[1] >= 0.0);
        assert!((p[0] + p[1] - 1.0).abs() <= 1e-6, "{p:?}");
    }
}

#[test]
fn zero_output_layer_gives_half_and_ln2() {
    let mut model = RankModel::<f64>::new(tiny(Mode::Combined), 3).unwrap();
    model.zero_output_layer();
    let batch = samples(1, 4, 6, 3);
    assert_eq!(model.forward(&batch[0].slice, &batch[0].gadget).unwrap(), [0.5, 0.5]);
    let (loss, _) = model.loss_and_grad(&batch, None).unwrap();
    assert!((loss - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn confident_correct_prediction_has_zero_loss() {
    let mut model = RankModel::<f64>::new(tiny(Mode::CnnOnly), 3).unwrap();
    model.zero_output_layer();
    let b2 = model.names().iter().position(|n| n == "head.dense2.b").unwrap();
    model.params_mut()[b2].data_mut().copy_from_slice(&[-40.0, 40.0]);
    let mut batch = samples(2, 2, 6, 3);
    batch.iter_mut().for_each(|s| s.label = 1);
    let (loss, _) = model.loss_and_grad(&batch, None).unwrap();
    assert!(loss < 1e-30, "{loss}");
}

#[test]
fn forward_is_bit_identical() {
    let a = RankModel::<f32>::new(tiny(Mode::Combined), 8).unwrap();
    let b = RankModel::<f32>::new(tiny(Mode::Combined), 8).unwrap();
    let s = samples(4, 1, 6, 3).remove(0).cast::<f32>();
    let pa = a.forward_with(&s.slice, &s.gadget, Some(5)).unwrap();
    let pb = b.forward_with(&s.slice, &s.gadget, Some(5)).unwrap();
    assert_eq!(pa.map(f32::to_bits), pb.map(f32::to_bits));
    assert_eq!(a.forward(&s.slice, &s.gadget).unwrap(), a.forward(&s.slice, &s.gadget).unwrap());
}

#[test]
fn unused_stack_cannot_change_output() {
    let batch = samples(6, 3, 7, 3);
    for (mode, unused) in [(Mode::CnnOnly, ".gru"), (Mode::BigruOnly, ".conv.")] {
        let model = RankModel::<f64>::new(tiny(mode), 4).unwrap();
        let mut perturbed = model.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (name, t) in model.names().iter().zip(perturbed.params_mut()) {
            if name.contains(unused) {
                t.data_mut().iter_mut().for_each(|v| *v += rng.gen_range(-3.0..3.0));
            }
        }
        for s in &batch {
            assert_eq!(model.forward(&s.slice, &s.gadget).unwrap(), perturbed.forward(&s.slice, &s.gadget).unwrap());
        }
    }
}

#[test]
fn dropout_needs_a_seed() {
    let model = RankModel::<f64>::new(ModelConfig { dropout: 0.5, ..tiny(Mode::Combined) }, 4).unwrap();
    let s = &samples(6, 1, 7, 3)[0];
    let eval = model.forward(&s.slice, &s.gadget).unwrap();
    assert_eq!(eval, model.forward_with(&s.slice, &s.gadget, None).unwrap());
    let differs = (0..20).any(|seed| model.forward_with(&s.slice, &s.gadget, Some(seed)).unwrap() != eval);
    assert!(differs);
}

#[test]
fn shape_and_value_errors() {
    let model = RankModel::<f64>::new(tiny(Mode::Combined), 4).unwrap();
    let bad = Tensor::<f64>::zeros(vec![4, 5]);
    let ok = Tensor::<f64>::zeros(vec![4, 3]);
    assert!(matches!(model.forward(&bad, &ok), Err(NeuralError::Shape(_))));
    assert!(matches!(model.forward(&ok, &Tensor::zeros(vec![0, 3])), Err(NeuralError::Shape(_))));
    let nan = Tensor::new(vec![1, 3], vec![0.0, f64::NAN, 0.0]).unwrap();
    assert!(matches!(model.forward(&nan, &ok), Err(NeuralError::NonFinite(_))));
    assert!(RankModel::<f64>::new(ModelConfig { kernel_width: 2, ..tiny(Mode::Combined) }, 0).is_err());
    let empty: [vulnrank_neural::Sample<f64>; 0] = [];
    assert_eq!(model.loss_and_grad(&empty, None).unwrap_err(), NeuralError::EmptyDataset);
}

#[test]
fn named_round_trip() {
    let model = RankModel::<f32>::new(tiny(Mode::BigruOnly), 11).unwrap();
    let named: Vec<_> = model.names().iter().cloned().zip(model.params().iter().cloned()).collect();
    let back = RankModel::from_named(model.config().clone(), named.clone()).unwrap();
    assert_eq!(back, model);
    let mut wrong = named;
    wrong.swap(0, 1);
    assert!(RankModel::from_named(model.config().clone(), wrong).is_err());
}

#[test]
fn default_sizes() {
    let model = RankModel::<f32>::new(ModelConfig::default(), 0).unwrap();
    let w1 = model.names().iter().position(|n| n == "head.dense1.w").unwrap();
    assert_eq!(model.params()[w1].shape(), [128, 256]);
}
