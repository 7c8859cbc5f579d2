//! Single-sample layer kernels with explicit backward passes. Matrices are
//! row-major slices; gradient outputs are accumulated into, never overwritten.

use num_traits::Float;

pub(crate) fn c<F: Float>(x: f64) -> F {
    F::from(x).unwrap()
}

pub fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `y += W x` for `W` of shape `rows × cols`.
/// Four independent partial sums so the loop vectorizes.
fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    let mut acc = [F::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] = acc[i] + x[i] * y[i];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s = s + *x * *y;
    }
    s
}

fn matvec_acc<F: Float>(w: &[F], x: &[F], rows: usize, cols: usize, y: &mut [F]) {
    for (r, out) in y.iter_mut().enumerate().take(rows) {
        *out = *out + dot(&w[r * cols..(r + 1) * cols], &x[..cols]);
    }
}

/// `dx += Wᵀ dy`, `dW += dy ⊗ x`.
fn matvec_back<F: Float>(w: &[F], x: &[F], dy: &[F], rows: usize, cols: usize, dw: &mut [F], dx: Option<&mut [F]>) {
    for r in 0..rows {
        let g = dy[r];
        if g == F::zero() {
            continue;
        }
        let row = &mut dw[r * cols..(r + 1) * cols];
        for (d, xv) in row.iter_mut().zip(x) {
            *d = *d + g * *xv;
        }
    }
    if let Some(dx) = dx {
        for r in 0..rows {
            let g = dy[r];
            if g == F::zero() {
                continue;
            }
            let row = &w[r * cols..(r + 1) * cols];
            for (d, wv) in dx.iter_mut().zip(row) {
                *d = *d + g * *wv;
            }
        }
    }
}

/// Same-padded 1-D convolution over time followed by ReLU.
///
/// `x` is `l × k`, `kernel` is `f × w × k` with odd `w`, `bias` has `f`
/// entries; the result is `l × f`.
pub fn conv1d<F: Float>(x: &[F], l: usize, k: usize, kernel: &[F], bias: &[F], f: usize, w: usize) -> Vec<F> {
    let half = w / 2;
    let mut out = vec![F::zero(); l * f];
    for t in 0..l {
        for j in 0..f {
            let mut s = bias[j];
            for d in 0..w {
                let Some(src) = (t + d).checked_sub(half).filter(|&s| s < l) else {
                    continue;
                };
                let xr = &x[src * k..(src + 1) * k];
                let kr = &kernel[(j * w + d) * k..(j * w + d + 1) * k];
                s = s + dot(xr, kr);
            }
            out[t * f + j] = s.max(F::zero());
        }
    }
    out
}

/// Backward pass of [`conv1d`] given its output `y` and upstream `dy`.
#[allow(clippy::too_many_arguments)]
pub fn conv1d_backward<F: Float>(
    x: &[F],
    l: usize,
    k: usize,
    kernel: &[F],
    f: usize,
    w: usize,
    y: &[F],
    dy: &[F],
    dkernel: &mut [F],
    dbias: &mut [F],
    mut dx: Option<&mut [F]>,
) {
    let half = w / 2;
    for t in 0..l {
        for j in 0..f {
            if y[t * f + j] <= F::zero() {
                continue;
            }
            let g = dy[t * f + j];
            dbias[j] = dbias[j] + g;
            for d in 0..w {
                let Some(src) = (t + d).checked_sub(half).filter(|&s| s < l) else {
                    continue;
                };
                let base = (j * w + d) * k;
                for ch in 0..k {
                    dkernel[base + ch] = dkernel[base + ch] + g * x[src * k + ch];
                }
                if let Some(dx) = dx.as_deref_mut() {
                    for ch in 0..k {
                        dx[src * k + ch] = dx[src * k + ch] + g * kernel[base + ch];
                    }
                }
            }
        }
    }
}

/// Parameters of one GRU direction. `w_*` are `h × input`, `u_*` are `h × h`.
#[derive(Debug, Clone, Copy)]
pub struct GruWeights<'a, F> {
    pub input: usize,
    pub hidden: usize,
    pub w_z: &'a [F],
    pub w_r: &'a [F],
    pub w_h: &'a [F],
    pub u_z: &'a [F],
    pub u_r: &'a [F],
    pub u_h: &'a [F],
    pub b_z: &'a [F],
    pub b_r: &'a [F],
    pub b_h: &'a [F],
}

/// Gradient buffers matching [`GruWeights`].
#[derive(Debug)]
pub struct GruGrads<'a, F> {
    pub w_z: &'a mut [F],
    pub w_r: &'a mut [F],
    pub w_h: &'a mut [F],
    pub u_z: &'a mut [F],
    pub u_r: &'a mut [F],
    pub u_h: &'a mut [F],
    pub b_z: &'a mut [F],
    pub b_r: &'a mut [F],
    pub b_h: &'a mut [F],
}

/// Activations of one direction over a sequence, indexed by time step.
#[derive(Debug, Clone)]
pub struct GruTrace<F> {
    pub reverse: bool,
    /// `l × h` states.
    pub h: Vec<F>,
    z: Vec<F>,
    r: Vec<F>,
    cand: Vec<F>,
}

fn order(l: usize, reverse: bool) -> impl Iterator<Item = usize> {
    (0..l).map(move |i| if reverse { l - 1 - i } else { i })
}

/// Runs one GRU direction from a zero state. With `reverse`, time steps are
/// consumed from last to first; states stay indexed by time step.
pub fn gru_forward<F: Float>(p: &GruWeights<F>, x: &[F], l: usize, reverse: bool) -> GruTrace<F> {
    let (n, h) = (p.input, p.hidden);
    let mut tr = GruTrace {
        reverse,
        h: vec![F::zero(); l * h],
        z: vec![F::zero(); l * h],
        r: vec![F::zero(); l * h],
        cand: vec![F::zero(); l * h],
    };
    let mut prev = vec![F::zero(); h];
    let mut az = vec![F::zero(); h];
    let mut ar = vec![F::zero(); h];
    let mut ah = vec![F::zero(); h];
    let mut rh = vec![F::zero(); h];
    for t in order(l, reverse) {
        let xt = &x[t * n..(t + 1) * n];
        az.copy_from_slice(p.b_z);
        ar.copy_from_slice(p.b_r);
        ah.copy_from_slice(p.b_h);
        matvec_acc(p.w_z, xt, h, n, &mut az);
        matvec_acc(p.u_z, &prev, h, h, &mut az);
        matvec_acc(p.w_r, xt, h, n, &mut ar);
        matvec_acc(p.u_r, &prev, h, h, &mut ar);
        for i in 0..h {
            tr.z[t * h + i] = sigmoid(az[i]);
            tr.r[t * h + i] = sigmoid(ar[i]);
            rh[i] = tr.r[t * h + i] * prev[i];
        }
        matvec_acc(p.w_h, xt, h, n, &mut ah);
        matvec_acc(p.u_h, &rh, h, h, &mut ah);
        for i in 0..h {
            let z = tr.z[t * h + i];
            let cand = ah[i].tanh();
            tr.cand[t * h + i] = cand;
            let next = (F::one() - z) * prev[i] + z * cand;
            tr.h[t * h + i] = next;
            prev[i] = next;
        }
    }
    tr
}

/// Backpropagation through time for one direction. `dh` is the upstream
/// gradient of every state (`l × h`); `dx` receives the input gradient.
pub fn gru_backward<F: Float>(
    p: &GruWeights<F>,
    x: &[F],
    l: usize,
    tr: &GruTrace<F>,
    dh: &[F],
    g: &mut GruGrads<F>,
    mut dx: Option<&mut [F]>,
) {
    let (n, h) = (p.input, p.hidden);
    let steps: Vec<usize> = order(l, tr.reverse).collect();
    let mut carry = vec![F::zero(); h];
    let mut daz = vec![F::zero(); h];
    let mut dar = vec![F::zero(); h];
    let mut dah = vec![F::zero(); h];
    let mut drh = vec![F::zero(); h];
    let mut rh = vec![F::zero(); h];
    let mut dprev = vec![F::zero(); h];
    let zero = vec![F::zero(); h];
    for (pos, &t) in steps.iter().enumerate().rev() {
        let prev: &[F] = if pos == 0 {
            &zero
        } else {
            let s = steps[pos - 1];
            &tr.h[s * h..(s + 1) * h]
        };
        let xt = &x[t * n..(t + 1) * n];
        for i in 0..h {
            let d = dh[t * h + i] + carry[i];
            let z = tr.z[t * h + i];
            let r = tr.r[t * h + i];
            let cand = tr.cand[t * h + i];
            dprev[i] = d * (F::one() - z);
            dah[i] = d * z * (F::one() - cand * cand);
            daz[i] = d * (cand - prev[i]) * z * (F::one() - z);
            rh[i] = r * prev[i];
            drh[i] = F::zero();
        }
        for v in g.b_h.iter_mut().zip(&dah) {
            *v.0 = *v.0 + *v.1;
        }
        matvec_back(p.u_h, &rh, &dah, h, h, g.u_h, Some(&mut drh));
        for i in 0..h {
            let r = tr.r[t * h + i];
            dprev[i] = dprev[i] + drh[i] * r;
            dar[i] = drh[i] * prev[i] * r * (F::one() - r);
        }
        for i in 0..h {
            g.b_z[i] = g.b_z[i] + daz[i];
            g.b_r[i] = g.b_r[i] + dar[i];
        }
        matvec_back(p.u_z, prev, &daz, h, h, g.u_z, Some(&mut dprev));
        matvec_back(p.u_r, prev, &dar, h, h, g.u_r, Some(&mut dprev));
        let dxt = dx.as_deref_mut().map(|d| &mut d[t * n..(t + 1) * n]);
        match dxt {
            Some(dxt) => {
                matvec_back(p.w_z, xt, &daz, h, n, g.w_z, Some(&mut *dxt));
                matvec_back(p.w_r, xt, &dar, h, n, g.w_r, Some(&mut *dxt));
                matvec_back(p.w_h, xt, &dah, h, n, g.w_h, Some(dxt));
            }
            None => {
                matvec_back(p.w_z, xt, &daz, h, n, g.w_z, None);
                matvec_back(p.w_r, xt, &dar, h, n, g.w_r, None);
                matvec_back(p.w_h, xt, &dah, h, n, g.w_h, None);
            }
        }
        carry.copy_from_slice(&dprev);
    }
}

/// Per-channel maximum over time and the first row attaining it.
pub fn global_max_pool<F: Float>(x: &[F], l: usize, ch: usize) -> (Vec<F>, Vec<usize>) {
    assert!(l >= 1, "global max pooling needs at least one row");
    let mut out = x[..ch].to_vec();
    let mut arg = vec![0; ch];
    for t in 1..l {
        for j in 0..ch {
            if x[t * ch + j] > out[j] {
                out[j] = x[t * ch + j];
                arg[j] = t;
            }
        }
    }
    (out, arg)
}

pub fn global_max_pool_backward<F: Float>(arg: &[usize], dy: &[F], ch: usize, dx: &mut [F]) {
    for j in 0..ch {
        dx[arg[j] * ch + j] = dx[arg[j] * ch + j] + dy[j];
    }
}

/// `W x + b` for `W` of shape `out × input`.
pub fn dense<F: Float>(w: &[F], b: &[F], x: &[F], out: usize, input: usize) -> Vec<F> {
    let mut y = b.to_vec();
    matvec_acc(w, x, out, input, &mut y);
    y
}

pub fn dense_backward<F: Float>(
    w: &[F],
    x: &[F],
    dy: &[F],
    out: usize,
    input: usize,
    dw: &mut [F],
    db: &mut [F],
    dx: Option<&mut [F]>,
) {
    for (d, g) in db.iter_mut().zip(dy) {
        *d = *d + *g;
    }
    matvec_back(w, x, dy, out, input, dw, dx);
}

/// Softmax of `logits` and the cross-entropy against class `label`, through
/// log-sum-exp.
pub fn softmax_xent<F: Float>(logits: &[F], label: usize) -> (Vec<F>, F) {
    let m = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let sum: F = logits.iter().map(|&z| (z - m).exp()).fold(F::zero(), |a, b| a + b);
    let lse = m + sum.ln();
    let probs = logits.iter().map(|&z| (z - lse).exp()).collect();
    (probs, lse - logits[label])
}
