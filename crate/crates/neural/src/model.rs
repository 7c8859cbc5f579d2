use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::layers::{self, c, GruGrads, GruTrace, GruWeights};
use crate::tensor::{NeuralError, Tensor};

/// Which branch stack feeds the pooling layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// conv -> GMP
    CnnOnly,
    /// BiGRU -> GMP
    BigruOnly,
    /// conv -> BiGRU -> GMP
    Combined,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Combined, Mode::CnnOnly, Mode::BigruOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::CnnOnly => "cnn_only",
            Mode::BigruOnly => "bigru_only",
            Mode::Combined => "combined",
        }
    }

    fn uses_conv(self) -> bool {
        self != Mode::BigruOnly
    }

    fn uses_gru(self) -> bool {
        self != Mode::CnnOnly
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected combined, cnn_only or bigru_only)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub filters: usize,
    pub kernel_width: usize,
    /// Hidden units per GRU direction.
    pub hidden: usize,
    pub layers: usize,
    pub dense: usize,
    pub dropout: f64,
    pub mode: Mode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 64,
            filters: 64,
            kernel_width: 3,
            hidden: 64,
            layers: 2,
            dense: 128,
            dropout: 0.1,
            mode: Mode::Combined,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::Shape(m.to_string()));
        if self.embed_dim == 0 || self.filters == 0 || self.hidden == 0 || self.dense == 0 || self.layers == 0 {
            return bad("all layer sizes must be at least 1");
        }
        if self.kernel_width % 2 == 0 {
            return bad("kernel width must be odd");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        Ok(())
    }

    fn branch_features(&self) -> usize {
        match self.mode {
            Mode::CnnOnly => self.filters,
            Mode::BigruOnly | Mode::Combined => 2 * self.hidden,
        }
    }

    fn gru_input(&self, layer: usize) -> usize {
        match (layer, self.mode) {
            (0, Mode::BigruOnly) => self.embed_dim,
            (0, _) => self.filters,
            _ => 2 * self.hidden,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DirIdx {
    w: [usize; 3],
    u: [usize; 3],
    b: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BranchIdx {
    conv_k: usize,
    conv_b: usize,
    gru: Vec<[DirIdx; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HeadIdx {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

/// One labeled example: embedded slice and gadget sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<F> {
    /// `slice_len × embed_dim`.
    pub slice: Tensor<F>,
    /// `gadget_len × embed_dim`.
    pub gadget: Tensor<F>,
    /// 1 for TP, 0 for FP.
    pub label: usize,
}

impl<F: Float> Sample<F> {
    pub fn cast<G: Float>(&self) -> Sample<G> {
        Sample { slice: self.slice.cast(), gadget: self.gadget.cast(), label: self.label }
    }
}

/// Gradient of the loss for every parameter tensor, in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub tensors: Vec<Vec<F>>,
}

impl<F: Float> Gradients<F> {
    fn zeros_like(params: &[Tensor<F>]) -> Self {
        Gradients { tensors: params.iter().map(|p| vec![F::zero(); p.len()]).collect() }
    }

    fn add(&mut self, other: &Gradients<F>) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = *x + *y;
            }
        }
    }

    fn scale(&mut self, s: F) {
        self.tensors.iter_mut().flatten().for_each(|v| *v = *v * s);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|v| v.is_finite())
    }
}

struct BranchTrace<F> {
    l: usize,
    conv: Vec<F>,
    /// Input to each GRU layer, then the last layer's output.
    gru_io: Vec<Vec<F>>,
    gru: Vec<[GruTrace<F>; 2]>,
    pooled: Vec<F>,
    arg: Vec<usize>,
}

struct Trace<F> {
    branches: [BranchTrace<F>; 2],
    concat: Vec<F>,
    hidden: Vec<F>,
    mask: Option<Vec<F>>,
    dropped: Vec<F>,
    probs: Vec<F>,
}

/// Two-branch classifier: slice and gadget stacks, pooled and concatenated,
/// then a dense ReLU layer, dropout and a two-way softmax (FP, TP).
#[derive(Debug, Clone, PartialEq)]
pub struct RankModel<F> {
    cfg: ModelConfig,
    names: Vec<String>,
    params: Vec<Tensor<F>>,
    branches: [BranchIdx; 2],
    head: HeadIdx,
}

const BRANCH_NAMES: [&str; 2] = ["slice", "gadget"];
const GATES: [&str; 3] = ["z", "r", "h"];

impl<F: Float + Send + Sync> RankModel<F> {
    /// Glorot-uniform weights and zero biases drawn from `seed`.
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Self, NeuralError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names = Vec::new();
        let mut params: Vec<Tensor<F>> = Vec::new();
        let mut add = |name: String, shape: Vec<usize>, fans: Option<(usize, usize)>| -> usize {
            let mut t = Tensor::zeros(shape);
            if let Some((fan_in, fan_out)) = fans {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                for v in t.data_mut() {
                    *v = c(rng.gen_range(-limit..limit));
                }
            }
            names.push(name);
            params.push(t);
            params.len() - 1
        };
        let (k, f, w, h) = (cfg.embed_dim, cfg.filters, cfg.kernel_width, cfg.hidden);
        let branch = |b: &str, add: &mut dyn FnMut(String, Vec<usize>, Option<(usize, usize)>) -> usize| {
            let conv_k = add(format!("{b}.conv.kernel"), vec![f, w, k], Some((w * k, w * f)));
            let conv_b = add(format!("{b}.conv.bias"), vec![f], None);
            let gru = (0..cfg.layers)
                .map(|layer| {
                    let input = cfg.gru_input(layer);
                    ["fwd", "bwd"].map(|dir| {
                        let p = format!("{b}.gru{layer}.{dir}");
                        DirIdx {
                            w: GATES.map(|g| add(format!("{p}.w_{g}"), vec![h, input], Some((input, h)))),
                            u: GATES.map(|g| add(format!("{p}.u_{g}"), vec![h, h], Some((h, h)))),
                            b: GATES.map(|g| add(format!("{p}.b_{g}"), vec![h], None)),
                        }
                    })
                })
                .collect();
            BranchIdx { conv_k, conv_b, gru }
        };
        let branches = [branch(BRANCH_NAMES[0], &mut add), branch(BRANCH_NAMES[1], &mut add)];
        let concat = 2 * cfg.branch_features();
        let head = HeadIdx {
            w1: add("head.dense1.w".into(), vec![cfg.dense, concat], Some((concat, cfg.dense))),
            b1: add("head.dense1.b".into(), vec![cfg.dense], None),
            w2: add("head.dense2.w".into(), vec![2, cfg.dense], Some((cfg.dense, 2))),
            b2: add("head.dense2.b".into(), vec![2], None),
        };
        Ok(RankModel { cfg, names, params, branches, head })
    }

    /// Rebuilds a model from named tensors, e.g. read from a checkpoint.
    pub fn from_named(cfg: ModelConfig, tensors: Vec<(String, Tensor<F>)>) -> Result<Self, NeuralError> {
        let mut m = Self::new(cfg, 0)?;
        if tensors.len() != m.params.len() {
            return Err(NeuralError::Shape(format!("expected {} tensors, got {}", m.params.len(), tensors.len())));
        }
        for (i, (name, t)) in tensors.into_iter().enumerate() {
            if name != m.names[i] || t.shape() != m.params[i].shape() {
                return Err(NeuralError::Shape(format!(
                    "tensor {i}: expected {} {:?}, got {name} {:?}",
                    m.names[i],
                    m.params[i].shape(),
                    t.shape()
                )));
            }
            t.check_finite(&name)?;
            m.params[i] = t;
        }
        Ok(m)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[Tensor<F>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<F>] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    /// Zeroes the output layer so that every input maps to (0.5, 0.5).
    pub fn zero_output_layer(&mut self) {
        for i in [self.head.w2, self.head.b2] {
            self.params[i].data_mut().iter_mut().for_each(|v| *v = F::zero());
        }
    }

    pub fn cast<G: Float + Send + Sync>(&self) -> RankModel<G> {
        RankModel {
            cfg: self.cfg.clone(),
            names: self.names.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
            branches: self.branches.clone(),
            head: self.head.clone(),
        }
    }

    fn p(&self, i: usize) -> &[F] {
        self.params[i].data()
    }

    fn dir(&self, d: &DirIdx, input: usize) -> GruWeights<'_, F> {
        GruWeights {
            input,
            hidden: self.cfg.hidden,
            w_z: self.p(d.w[0]),
            w_r: self.p(d.w[1]),
            w_h: self.p(d.w[2]),
            u_z: self.p(d.u[0]),
            u_r: self.p(d.u[1]),
            u_h: self.p(d.u[2]),
            b_z: self.p(d.b[0]),
            b_r: self.p(d.b[1]),
            b_h: self.p(d.b[2]),
        }
    }

    fn check_input(&self, x: &Tensor<F>, what: &str) -> Result<(), NeuralError> {
        if x.shape().len() != 2 || x.rows() == 0 || x.cols() != self.cfg.embed_dim {
            return Err(NeuralError::Shape(format!(
                "{what} input must be l×{} with l ≥ 1, got {:?}",
                self.cfg.embed_dim,
                x.shape()
            )));
        }
        x.check_finite(what)
    }

    fn branch_forward(&self, b: &BranchIdx, x: &Tensor<F>) -> BranchTrace<F> {
        let cfg = &self.cfg;
        let l = x.rows();
        let conv = if cfg.mode.uses_conv() {
            layers::conv1d(x.data(), l, cfg.embed_dim, self.p(b.conv_k), self.p(b.conv_b), cfg.filters, cfg.kernel_width)
        } else {
            Vec::new()
        };
        let mut gru_io = Vec::new();
        let mut gru = Vec::new();
        if cfg.mode.uses_gru() {
            let mut input = if cfg.mode.uses_conv() { conv.clone() } else { x.data().to_vec() };
            for (layer, dirs) in b.gru.iter().enumerate() {
                let n = cfg.gru_input(layer);
                let fwd = layers::gru_forward(&self.dir(&dirs[0], n), &input, l, false);
                let bwd = layers::gru_forward(&self.dir(&dirs[1], n), &input, l, true);
                let h = cfg.hidden;
                let mut out = vec![F::zero(); l * 2 * h];
                for t in 0..l {
                    out[t * 2 * h..t * 2 * h + h].copy_from_slice(&fwd.h[t * h..(t + 1) * h]);
                    out[t * 2 * h + h..(t + 1) * 2 * h].copy_from_slice(&bwd.h[t * h..(t + 1) * h]);
                }
                gru_io.push(std::mem::replace(&mut input, out));
                gru.push([fwd, bwd]);
            }
            gru_io.push(input);
        }
        let top = if cfg.mode.uses_gru() { gru_io.last().unwrap() } else { &conv };
        let (pooled, arg) = layers::global_max_pool(top, l, cfg.branch_features());
        BranchTrace { l, conv, gru_io, gru, pooled, arg }
    }

    fn run(&self, slice: &Tensor<F>, gadget: &Tensor<F>, dropout_seed: Option<u64>) -> Result<Trace<F>, NeuralError> {
        self.check_input(slice, "slice")?;
        self.check_input(gadget, "gadget")?;
        let branches = [self.branch_forward(&self.branches[0], slice), self.branch_forward(&self.branches[1], gadget)];
        let concat: Vec<F> = branches.iter().flat_map(|b| b.pooled.iter().copied()).collect();
        let d = self.cfg.dense;
        let hidden: Vec<F> = layers::dense(self.p(self.head.w1), self.p(self.head.b1), &concat, d, concat.len())
            .into_iter()
            .map(|v| v.max(F::zero()))
            .collect();
        let mask = match dropout_seed {
            Some(seed) if self.cfg.dropout > 0.0 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let keep = 1.0 - self.cfg.dropout;
                Some((0..d).map(|_| if rng.gen_bool(keep) { c(1.0 / keep) } else { F::zero() }).collect::<Vec<F>>())
            }
            _ => None,
        };
        let dropped = match &mask {
            Some(m) => hidden.iter().zip(m).map(|(a, b)| *a * *b).collect(),
            None => hidden.clone(),
        };
        let logits = layers::dense(self.p(self.head.w2), self.p(self.head.b2), &dropped, 2, d);
        let (probs, _) = layers::softmax_xent(&logits, 0);
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(NeuralError::NonFinite("output probabilities".into()));
        }
        Ok(Trace { branches, concat, hidden, mask, dropped, probs })
    }

    /// `(p_FP, p_TP)` in inference mode.
    pub fn forward(&self, slice: &Tensor<F>, gadget: &Tensor<F>) -> Result<[F; 2], NeuralError> {
        self.forward_with(slice, gadget, None)
    }

    /// Forward pass; `dropout_seed` switches training-mode dropout on with a
    /// mask drawn from that seed.
    pub fn forward_with(&self, slice: &Tensor<F>, gadget: &Tensor<F>, dropout_seed: Option<u64>) -> Result<[F; 2], NeuralError> {
        let t = self.run(slice, gadget, dropout_seed)?;
        Ok([t.probs[0], t.probs[1]])
    }

    /// Loss and gradient for one sample.
    pub fn sample_grad(&self, s: &Sample<F>, dropout_seed: Option<u64>) -> Result<(F, Gradients<F>, [F; 2]), NeuralError> {
        if s.label > 1 {
            return Err(NeuralError::Shape(format!("label {} is not 0 or 1", s.label)));
        }
        let tr = self.run(&s.slice, &s.gadget, dropout_seed)?;
        let cfg = &self.cfg;
        let mut g = Gradients::zeros_like(&self.params);
        let d = cfg.dense;
        let logits = layers::dense(self.p(self.head.w2), self.p(self.head.b2), &tr.dropped, 2, d);
        let (probs, loss) = layers::softmax_xent(&logits, s.label);
        let dlogits: Vec<F> = (0..2).map(|i| probs[i] - if i == s.label { F::one() } else { F::zero() }).collect();

        let mut ddropped = vec![F::zero(); d];
        {
            let (gw2, gb2) = two(&mut g.tensors, self.head.w2, self.head.b2);
            layers::dense_backward(self.p(self.head.w2), &tr.dropped, &dlogits, 2, d, gw2, gb2, Some(&mut ddropped));
        }
        let dhidden: Vec<F> = (0..d)
            .map(|i| {
                let m = tr.mask.as_ref().map_or(F::one(), |m| m[i]);
                if tr.hidden[i] > F::zero() {
                    ddropped[i] * m
                } else {
                    F::zero()
                }
            })
            .collect();
        let mut dconcat = vec![F::zero(); tr.concat.len()];
        {
            let (gw1, gb1) = two(&mut g.tensors, self.head.w1, self.head.b1);
            layers::dense_backward(self.p(self.head.w1), &tr.concat, &dhidden, d, tr.concat.len(), gw1, gb1, Some(&mut dconcat));
        }
        let feat = cfg.branch_features();
        for (bi, (b, bt)) in self.branches.iter().zip(&tr.branches).enumerate() {
            let x = if bi == 0 { &s.slice } else { &s.gadget };
            self.branch_backward(b, bt, x, &dconcat[bi * feat..(bi + 1) * feat], &mut g);
        }
        Ok((loss, g, [tr.probs[0], tr.probs[1]]))
    }

    fn branch_backward(&self, b: &BranchIdx, bt: &BranchTrace<F>, x: &Tensor<F>, dpooled: &[F], g: &mut Gradients<F>) {
        let cfg = &self.cfg;
        let l = bt.l;
        let feat = cfg.branch_features();
        let mut dtop = vec![F::zero(); l * feat];
        layers::global_max_pool_backward(&bt.arg, dpooled, feat, &mut dtop);
        let dconv = if cfg.mode.uses_gru() {
            let h = cfg.hidden;
            let mut dout = dtop;
            for layer in (0..cfg.layers).rev() {
                let n = cfg.gru_input(layer);
                let input = &bt.gru_io[layer];
                let need_dx = layer > 0 || cfg.mode.uses_conv();
                let mut din = vec![F::zero(); if need_dx { l * n } else { 0 }];
                for dir in 0..2 {
                    let mut dh = vec![F::zero(); l * h];
                    for t in 0..l {
                        dh[t * h..(t + 1) * h].copy_from_slice(&dout[t * 2 * h + dir * h..t * 2 * h + (dir + 1) * h]);
                    }
                    let idx = &b.gru[layer][dir];
                    let w = self.dir(idx, n);
                    let mut grads = gru_grads(&mut g.tensors, idx);
                    layers::gru_backward(&w, input, l, &bt.gru[layer][dir], &dh, &mut grads, need_dx.then_some(&mut din[..]));
                }
                dout = din;
            }
            dout
        } else {
            dtop
        };
        if cfg.mode.uses_conv() {
            let (gk, gb) = two(&mut g.tensors, b.conv_k, b.conv_b);
            layers::conv1d_backward(
                x.data(),
                l,
                cfg.embed_dim,
                self.p(b.conv_k),
                cfg.filters,
                cfg.kernel_width,
                &bt.conv,
                &dconv,
                gk,
                gb,
                None,
            );
        }
    }

    /// Mean cross-entropy and mean gradient over `batch`.
    pub fn loss_and_grad<S>(&self, batch: &[S], dropout_seeds: Option<&[u64]>) -> Result<(F, Gradients<F>), NeuralError>
    where
        S: Borrow<Sample<F>> + Sync,
    {
        let (loss, mut g, _) = self.accumulate(batch, dropout_seeds)?;
        let n: F = c(batch.len() as f64);
        g.scale(F::one() / n);
        Ok((loss / n, g))
    }

    /// Summed loss and gradient plus the number of correct predictions.
    /// Per-sample work runs in parallel; the reduction is sequential in batch
    /// order, so the result does not depend on the thread count.
    pub(crate) fn accumulate<S>(&self, batch: &[S], dropout_seeds: Option<&[u64]>) -> Result<(F, Gradients<F>, usize), NeuralError>
    where
        S: Borrow<Sample<F>> + Sync,
    {
        use rayon::prelude::*;
        if batch.is_empty() {
            return Err(NeuralError::EmptyDataset);
        }
        let results: Vec<_> = batch
            .par_iter()
            .enumerate()
            .map(|(i, s)| self.sample_grad(s.borrow(), dropout_seeds.map(|d| d[i])))
            .collect();
        let mut total = Gradients::zeros_like(&self.params);
        let mut loss = F::zero();
        let mut correct = 0;
        for (r, s) in results.into_iter().zip(batch) {
            let (l, g, p) = r?;
            loss = loss + l;
            total.add(&g);
            if usize::from(p[1] > p[0]) == s.borrow().label {
                correct += 1;
            }
        }
        if !loss.is_finite() || !total.is_finite() {
            return Err(NeuralError::NonFinite("loss or gradient".into()));
        }
        Ok((loss, total, correct))
    }
}

fn two<F>(v: &mut [Vec<F>], a: usize, b: usize) -> (&mut [F], &mut [F]) {
    assert!(a < b);
    let (lo, hi) = v.split_at_mut(b);
    (&mut lo[a], &mut hi[0])
}

fn gru_grads<'a, F>(v: &'a mut [Vec<F>], d: &DirIdx) -> GruGrads<'a, F> {
    // The nine tensors of one direction are allocated contiguously.
    let first = d.w[0];
    debug_assert_eq!(d.b[2], first + 8);
    let [w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h] = &mut v[first..first + 9] else {
        unreachable!()
    };
    GruGrads { w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h }
}
