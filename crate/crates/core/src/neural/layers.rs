//! Network layers with explicit forward and backward passes.
//!
//! Convolutions use zero padding of half the kernel width; with stride 1
//! the output width equals the input width. Inner loops run over
//! contiguous output or input rows so the scalar code vectorizes.

use super::tensor::{Scalar, Tensor};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn dims4<T: Scalar>(x: &Tensor<T>) -> (usize, usize, usize, usize) {
    let s = x.shape();
    assert_eq!(s.len(), 4, "expected a 4-d tensor, got shape {s:?}");
    (s[0], s[1], s[2], s[3])
}

/// Output range `[start, end)` such that `out * stride + off` stays within
/// `[0, limit)`.
fn tap_range(out_len: usize, limit: usize, stride: usize, off: isize) -> (usize, usize) {
    let start = if off >= 0 {
        0
    } else {
        let need = (-off) as usize;
        need.div_ceil(stride)
    };
    let max_in = limit as isize - 1 - off;
    if max_in < 0 {
        return (0, 0);
    }
    let end = (max_in as usize / stride + 1).min(out_len);
    (start.min(end), end)
}

fn he_normal<T: Scalar, R: Rng>(len: usize, fan_in: usize, rng: &mut R) -> Vec<T> {
    let std = (2.0 / fan_in as f64).sqrt();
    let normal = Normal::new(0.0, std).unwrap();
    (0..len).map(|_| T::from_f64(normal.sample(rng))).collect()
}

/// 2-d convolution with square kernel, zero padding `k / 2`, and a
/// configurable stride. Weights are laid out `[out_ch][in_ch][k][k]`.
#[derive(Debug, Clone)]
pub struct Conv2d<T> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new<R: Rng>(in_ch: usize, out_ch: usize, k: usize, stride: usize, rng: &mut R) -> Self {
        let fan_in = in_ch * k * k;
        Self {
            in_ch,
            out_ch,
            k,
            stride,
            pad: k / 2,
            weights: he_normal(out_ch * in_ch * k * k, fan_in, rng),
            bias: vec![T::zero(); out_ch],
        }
    }

    pub fn out_size(&self, input: usize) -> usize {
        (input + 2 * self.pad - self.k) / self.stride + 1
    }

    fn forward(&self, x: &Tensor<T>) -> Tensor<T> {
        let (batch, ic, h, w) = dims4(x);
        assert_eq!(ic, self.in_ch);
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        let mut y = Tensor::zeros(&[batch, self.out_ch, oh, ow]);
        let s = self.stride;
        for b in 0..batch {
            let x_row = x.row(b);
            let y_row = y.row_mut(b);
            for oc in 0..self.out_ch {
                let y_plane = &mut y_row[oc * oh * ow..(oc + 1) * oh * ow];
                y_plane.fill(self.bias[oc]);
                for ci in 0..ic {
                    let x_plane = &x_row[ci * h * w..(ci + 1) * h * w];
                    for u in 0..self.k {
                        let row_off = u as isize - self.pad as isize;
                        let (oi_lo, oi_hi) = tap_range(oh, h, s, row_off);
                        for v in 0..self.k {
                            let col_off = v as isize - self.pad as isize;
                            let wv = self.weights[((oc * ic + ci) * self.k + u) * self.k + v];
                            let (oj_lo, oj_hi) = tap_range(ow, w, s, col_off);
                            if oj_lo >= oj_hi {
                                continue;
                            }
                            for oi in oi_lo..oi_hi {
                                let ii = (oi * s) as isize + row_off;
                                let x_base = ii as usize * w;
                                let y_base = oi * ow;
                                if s == 1 {
                                    let ij0 = (oj_lo as isize + col_off) as usize;
                                    let xs = &x_plane[x_base + ij0..x_base + ij0 + (oj_hi - oj_lo)];
                                    let ys = &mut y_plane[y_base + oj_lo..y_base + oj_hi];
                                    for (yy, &xx) in ys.iter_mut().zip(xs) {
                                        *yy = *yy + wv * xx;
                                    }
                                } else {
                                    for oj in oj_lo..oj_hi {
                                        let ij = (oj * s) as isize + col_off;
                                        y_plane[y_base + oj] = y_plane[y_base + oj]
                                            + wv * x_plane[x_base + ij as usize];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        y
    }

    fn backward(&self, x: &Tensor<T>, gy: &Tensor<T>, grads: &mut [Vec<T>]) -> Tensor<T> {
        let (batch, ic, h, w) = dims4(x);
        let (_, _, oh, ow) = dims4(gy);
        let s = self.stride;
        let mut gx = Tensor::zeros(&[batch, ic, h, w]);
        let (gw, gb) = {
            let (a, b) = grads.split_at_mut(1);
            (&mut a[0], &mut b[0])
        };
        for b in 0..batch {
            let x_row = x.row(b);
            let gy_row = gy.row(b);
            let gx_row = gx.row_mut(b);
            for oc in 0..self.out_ch {
                let gy_plane = &gy_row[oc * oh * ow..(oc + 1) * oh * ow];
                let mut bias_acc = T::zero();
                for &g in gy_plane {
                    bias_acc = bias_acc + g;
                }
                gb[oc] = gb[oc] + bias_acc;
                for ci in 0..ic {
                    let x_plane = &x_row[ci * h * w..(ci + 1) * h * w];
                    let gx_plane = &mut gx_row[ci * h * w..(ci + 1) * h * w];
                    for u in 0..self.k {
                        let row_off = u as isize - self.pad as isize;
                        let (oi_lo, oi_hi) = tap_range(oh, h, s, row_off);
                        for v in 0..self.k {
                            let col_off = v as isize - self.pad as isize;
                            let widx = ((oc * ic + ci) * self.k + u) * self.k + v;
                            let wv = self.weights[widx];
                            let (oj_lo, oj_hi) = tap_range(ow, w, s, col_off);
                            if oj_lo >= oj_hi {
                                continue;
                            }
                            let mut w_acc = T::zero();
                            for oi in oi_lo..oi_hi {
                                let ii = (oi * s) as isize + row_off;
                                let x_base = ii as usize * w;
                                let y_base = oi * ow;
                                if s == 1 {
                                    let ij0 = (oj_lo as isize + col_off) as usize;
                                    let xs = &x_plane[x_base + ij0..x_base + ij0 + (oj_hi - oj_lo)];
                                    let gxs = &mut gx_plane
                                        [x_base + ij0..x_base + ij0 + (oj_hi - oj_lo)];
                                    let gys = &gy_plane[y_base + oj_lo..y_base + oj_hi];
                                    for ((gg, &xx), &gyv) in gxs.iter_mut().zip(xs).zip(gys) {
                                        *gg = *gg + wv * gyv;
                                        w_acc = w_acc + xx * gyv;
                                    }
                                } else {
                                    for oj in oj_lo..oj_hi {
                                        let ij = ((oj * s) as isize + col_off) as usize;
                                        let gyv = gy_plane[y_base + oj];
                                        gx_plane[x_base + ij] = gx_plane[x_base + ij] + wv * gyv;
                                        w_acc = w_acc + x_plane[x_base + ij] * gyv;
                                    }
                                }
                            }
                            gw[widx] = gw[widx] + w_acc;
                        }
                    }
                }
            }
        }
        gx
    }
}

/// Transposed 2-d convolution, stride 1, zero padding `k / 2` (same-size
/// output). Weights are laid out `[in_ch][out_ch][k][k]`.
#[derive(Debug, Clone)]
pub struct ConvTranspose2d<T> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub k: usize,
    pub pad: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvTranspose2d<T> {
    pub fn new<R: Rng>(in_ch: usize, out_ch: usize, k: usize, rng: &mut R) -> Self {
        let fan_in = in_ch * k * k;
        Self {
            in_ch,
            out_ch,
            k,
            pad: k / 2,
            weights: he_normal(in_ch * out_ch * k * k, fan_in, rng),
            bias: vec![T::zero(); out_ch],
        }
    }

    pub fn out_size(&self, input: usize) -> usize {
        input + self.k - 1 - 2 * self.pad
    }

    fn forward(&self, x: &Tensor<T>) -> Tensor<T> {
        let (batch, ic, h, w) = dims4(x);
        assert_eq!(ic, self.in_ch);
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        let mut y = Tensor::zeros(&[batch, self.out_ch, oh, ow]);
        for b in 0..batch {
            let x_row = x.row(b);
            let y_row = y.row_mut(b);
            for oc in 0..self.out_ch {
                let y_plane = &mut y_row[oc * oh * ow..(oc + 1) * oh * ow];
                y_plane.fill(self.bias[oc]);
                for ci in 0..ic {
                    let x_plane = &x_row[ci * h * w..(ci + 1) * h * w];
                    for u in 0..self.k {
                        let row_off = u as isize - self.pad as isize;
                        // Input rows whose scattered row i + row_off is valid.
                        let (i_lo, i_hi) = tap_range(h, oh, 1, row_off);
                        for v in 0..self.k {
                            let col_off = v as isize - self.pad as isize;
                            let wv = self.weights[((ci * self.out_ch + oc) * self.k + u)
                                * self.k
                                + v];
                            let (j_lo, j_hi) = tap_range(w, ow, 1, col_off);
                            if j_lo >= j_hi {
                                continue;
                            }
                            for i in i_lo..i_hi {
                                let m = (i as isize + row_off) as usize;
                                let l0 = (j_lo as isize + col_off) as usize;
                                let xs = &x_plane[i * w + j_lo..i * w + j_hi];
                                let ys = &mut y_plane[m * ow + l0..m * ow + l0 + (j_hi - j_lo)];
                                for (yy, &xx) in ys.iter_mut().zip(xs) {
                                    *yy = *yy + wv * xx;
                                }
                            }
                        }
                    }
                }
            }
        }
        y
    }

    fn backward(&self, x: &Tensor<T>, gy: &Tensor<T>, grads: &mut [Vec<T>]) -> Tensor<T> {
        let (batch, ic, h, w) = dims4(x);
        let (_, _, oh, ow) = dims4(gy);
        let mut gx = Tensor::zeros(&[batch, ic, h, w]);
        let (gw, gb) = {
            let (a, b) = grads.split_at_mut(1);
            (&mut a[0], &mut b[0])
        };
        for b in 0..batch {
            let x_row = x.row(b);
            let gy_row = gy.row(b);
            let gx_row = gx.row_mut(b);
            for oc in 0..self.out_ch {
                let gy_plane = &gy_row[oc * oh * ow..(oc + 1) * oh * ow];
                let mut bias_acc = T::zero();
                for &g in gy_plane {
                    bias_acc = bias_acc + g;
                }
                gb[oc] = gb[oc] + bias_acc;
                for ci in 0..ic {
                    let x_plane = &x_row[ci * h * w..(ci + 1) * h * w];
                    let gx_plane = &mut gx_row[ci * h * w..(ci + 1) * h * w];
                    for u in 0..self.k {
                        let row_off = u as isize - self.pad as isize;
                        let (i_lo, i_hi) = tap_range(h, oh, 1, row_off);
                        for v in 0..self.k {
                            let col_off = v as isize - self.pad as isize;
                            let widx =
                                ((ci * self.out_ch + oc) * self.k + u) * self.k + v;
                            let wv = self.weights[widx];
                            let (j_lo, j_hi) = tap_range(w, ow, 1, col_off);
                            if j_lo >= j_hi {
                                continue;
                            }
                            let mut w_acc = T::zero();
                            for i in i_lo..i_hi {
                                let m = (i as isize + row_off) as usize;
                                let l0 = (j_lo as isize + col_off) as usize;
                                let xs = &x_plane[i * w + j_lo..i * w + j_hi];
                                let gxs = &mut gx_plane[i * w + j_lo..i * w + j_hi];
                                let gys = &gy_plane[m * ow + l0..m * ow + l0 + (j_hi - j_lo)];
                                for ((gg, &xx), &gyv) in gxs.iter_mut().zip(xs).zip(gys) {
                                    *gg = *gg + wv * gyv;
                                    w_acc = w_acc + xx * gyv;
                                }
                            }
                            gw[widx] = gw[widx] + w_acc;
                        }
                    }
                }
            }
        }
        gx
    }
}

/// Fully connected layer. Weights are laid out `[in][out]`, one contiguous
/// output row per input element, so forward runs as repeated row updates
/// with the weight row hot in cache across a batch.
#[derive(Debug, Clone)]
pub struct Dense<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn new<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: he_normal(in_dim * out_dim, in_dim, rng),
            bias: vec![T::zero(); out_dim],
        }
    }

    fn forward(&self, x: &Tensor<T>) -> Tensor<T> {
        let batch = x.batch();
        assert_eq!(x.row_len(), self.in_dim, "dense input width mismatch");
        let mut y = Tensor::zeros(&[batch, self.out_dim]);
        for b in 0..batch {
            y.row_mut(b).copy_from_slice(&self.bias);
        }
        let out = self.out_dim;
        let ydata = y.data_mut();
        for i in 0..self.in_dim {
            let w_row = &self.weights[i * out..(i + 1) * out];
            for b in 0..batch {
                let xi = x.row(b)[i];
                if xi == T::zero() {
                    continue;
                }
                let y_row = &mut ydata[b * out..(b + 1) * out];
                for (yy, &ww) in y_row.iter_mut().zip(w_row) {
                    *yy = *yy + xi * ww;
                }
            }
        }
        y
    }

    fn backward(&self, x: &Tensor<T>, gy: &Tensor<T>, grads: &mut [Vec<T>]) -> Tensor<T> {
        let batch = x.batch();
        let out = self.out_dim;
        let mut gx = Tensor::zeros(&[batch, self.in_dim]);
        let (gw, gb) = {
            let (a, b) = grads.split_at_mut(1);
            (&mut a[0], &mut b[0])
        };
        for b in 0..batch {
            let gy_row = gy.row(b);
            for (slot, &g) in gb.iter_mut().zip(gy_row) {
                *slot = *slot + g;
            }
        }
        let gxdata = gx.data_mut();
        for i in 0..self.in_dim {
            let w_row = &self.weights[i * out..(i + 1) * out];
            let gw_row = &mut gw[i * out..(i + 1) * out];
            for b in 0..batch {
                let gy_row = gy.row(b);
                // Input gradient: dot of the weight row with the output grad.
                let mut acc = T::zero();
                for (&ww, &g) in w_row.iter().zip(gy_row) {
                    acc = acc + ww * g;
                }
                gxdata[b * self.in_dim + i] = acc;
                // Weight gradient: outer-product row update.
                let xi = x.row(b)[i];
                if xi != T::zero() {
                    for (slot, &g) in gw_row.iter_mut().zip(gy_row) {
                        *slot = *slot + xi * g;
                    }
                }
            }
        }
        gx
    }
}

/// Elementwise rectifier.
#[derive(Debug, Clone, Default)]
pub struct Relu;

impl Relu {
    fn forward<T: Scalar>(&self, x: &Tensor<T>) -> Tensor<T> {
        let mut y = x.clone();
        for v in y.data_mut() {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        y
    }

    fn backward<T: Scalar>(&self, x: &Tensor<T>, gy: &Tensor<T>) -> Tensor<T> {
        let mut gx = gy.clone();
        for (g, &v) in gx.data_mut().iter_mut().zip(x.data()) {
            if v <= T::zero() {
                *g = T::zero();
            }
        }
        gx
    }
}

/// Softmax over each sample's entire output vector.
#[derive(Debug, Clone, Default)]
pub struct Softmax;

impl Softmax {
    fn forward<T: Scalar>(&self, x: &Tensor<T>) -> Tensor<T> {
        let mut y = x.clone();
        let batch = y.batch();
        for b in 0..batch {
            let row = y.row_mut(b);
            let mut max = row[0];
            for &v in row.iter() {
                if v > max {
                    max = v;
                }
            }
            let mut sum = T::zero();
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum = sum + *v;
            }
            for v in row.iter_mut() {
                *v = *v / sum;
            }
        }
        y
    }

    fn backward<T: Scalar>(&self, y: &Tensor<T>, gy: &Tensor<T>) -> Tensor<T> {
        let mut gx = gy.clone();
        let batch = gx.batch();
        for b in 0..batch {
            let p = y.row(b);
            let g = gx.row_mut(b);
            let mut dot = T::zero();
            for (&pv, &gv) in p.iter().zip(g.iter()) {
                dot = dot + pv * gv;
            }
            for (slot, &pv) in g.iter_mut().zip(p) {
                *slot = pv * (*slot - dot);
            }
        }
        gx
    }
}

/// Pure shape change between fixed per-sample shapes.
#[derive(Debug, Clone)]
pub struct Reshape {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

impl Reshape {
    pub fn new(from: Vec<usize>, to: Vec<usize>) -> Self {
        assert_eq!(
            from.iter().product::<usize>(),
            to.iter().product::<usize>(),
            "reshape must preserve element count"
        );
        Self { from, to }
    }

    fn shape_with_batch(batch: usize, dims: &[usize]) -> Vec<usize> {
        let mut s = Vec::with_capacity(dims.len() + 1);
        s.push(batch);
        s.extend_from_slice(dims);
        s
    }
}

/// A layer of either architecture.
#[derive(Debug, Clone)]
pub enum LayerKind<T> {
    Conv(Conv2d<T>),
    ConvT(ConvTranspose2d<T>),
    Dense(Dense<T>),
    Relu(Relu),
    Softmax(Softmax),
    Reshape(Reshape),
}

impl<T: Scalar> LayerKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Conv(_) => "conv",
            LayerKind::ConvT(_) => "conv_transpose",
            LayerKind::Dense(_) => "dense",
            LayerKind::Relu(_) => "relu",
            LayerKind::Softmax(_) => "softmax",
            LayerKind::Reshape(_) => "reshape",
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Tensor<T> {
        match self {
            LayerKind::Conv(l) => l.forward(x),
            LayerKind::ConvT(l) => l.forward(x),
            LayerKind::Dense(l) => l.forward(x),
            LayerKind::Relu(l) => l.forward(x),
            LayerKind::Softmax(l) => l.forward(x),
            LayerKind::Reshape(l) => {
                let shape = Reshape::shape_with_batch(x.batch(), &l.to);
                x.clone().reshaped(&shape).expect("reshape element count")
            }
        }
    }

    /// Propagate `gy` through the layer, accumulating parameter gradients
    /// into `grads` (one flat buffer per parameter array).
    pub fn backward(
        &self,
        x: &Tensor<T>,
        y: &Tensor<T>,
        gy: &Tensor<T>,
        grads: &mut [Vec<T>],
    ) -> Tensor<T> {
        match self {
            LayerKind::Conv(l) => l.backward(x, gy, grads),
            LayerKind::ConvT(l) => l.backward(x, gy, grads),
            LayerKind::Dense(l) => l.backward(x, gy, grads),
            LayerKind::Relu(l) => l.backward(x, gy),
            LayerKind::Softmax(l) => l.backward(y, gy),
            LayerKind::Reshape(l) => {
                let shape = Reshape::shape_with_batch(gy.batch(), &l.from);
                gy.clone().reshaped(&shape).expect("reshape element count")
            }
        }
    }

    pub fn params(&self) -> Vec<&[T]> {
        match self {
            LayerKind::Conv(l) => vec![&l.weights, &l.bias],
            LayerKind::ConvT(l) => vec![&l.weights, &l.bias],
            LayerKind::Dense(l) => vec![&l.weights, &l.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<T>> {
        match self {
            LayerKind::Conv(l) => vec![&mut l.weights, &mut l.bias],
            LayerKind::ConvT(l) => vec![&mut l.weights, &mut l.bias],
            LayerKind::Dense(l) => vec![&mut l.weights, &mut l.bias],
            _ => Vec::new(),
        }
    }
}
