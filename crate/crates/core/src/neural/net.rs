//! The two network architectures and their forward/backward plumbing.

use super::layers::{Conv2d, ConvTranspose2d, Dense, LayerKind, Relu, Reshape, Softmax};
use super::tensor::{Scalar, Tensor};
use crate::grid::{Belief, GridSpec};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Architecture identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    /// Belief to planar information map: conv(16), conv(16), dense to
    /// `n*n`, transposed conv to one channel, softmax.
    MapR2,
    /// Belief to position-plus-heading map: strided conv(16), strided
    /// conv(32), dense to `n*n*8`, transposed conv to `H` channels,
    /// softmax.
    MapSe2,
    /// Belief to coefficient vector: conv(8), conv(16), dense 256, linear
    /// dense to the coefficient count.
    Coeff,
}

impl Arch {
    pub fn id(self) -> &'static str {
        match self {
            Arch::MapR2 => "map_r2",
            Arch::MapSe2 => "map_se2",
            Arch::Coeff => "coeff",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "map_r2" => Ok(Arch::MapR2),
            "map_se2" => Ok(Arch::MapSe2),
            "coeff" => Ok(Arch::Coeff),
            other => Err(Error::UnknownArchitecture(other.to_string())),
        }
    }
}

/// A layered network bound to a grid size.
#[derive(Debug, Clone)]
pub struct Network<T> {
    arch: Arch,
    input_n: usize,
    output_len: usize,
    layers: Vec<LayerKind<T>>,
}

/// Per-layer, per-parameter gradient buffers.
pub type Grads<T> = Vec<Vec<Vec<T>>>;

impl<T: Scalar> Network<T> {
    /// Map network for the planar (bearing) modality.
    ///
    /// The dense layer feeding the transposed convolution is linear: a
    /// rectifier there clamps per-cell logits at zero and the clamped
    /// cells stop learning, which caps how closely the softmax output can
    /// match a target map.
    pub fn map_r2(grid: &GridSpec, seed: u64) -> Self {
        let n = grid.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv1 = Conv2d::new(1, 16, 3, 1, &mut rng);
        let conv2 = Conv2d::new(16, 16, 3, 1, &mut rng);
        let dense = Dense::new(16 * n * n, n * n, &mut rng);
        let deconv = ConvTranspose2d::new(1, 1, 3, &mut rng);
        let layers = vec![
            LayerKind::Conv(conv1),
            LayerKind::Relu(Relu),
            LayerKind::Conv(conv2),
            LayerKind::Relu(Relu),
            LayerKind::Reshape(Reshape::new(vec![16, n, n], vec![16 * n * n])),
            LayerKind::Dense(dense),
            LayerKind::Reshape(Reshape::new(vec![n * n], vec![1, n, n])),
            LayerKind::ConvT(deconv),
            LayerKind::Softmax(Softmax),
        ];
        Self { arch: Arch::MapR2, input_n: n, output_len: n * n, layers }
    }

    /// Map network for the position-plus-heading (FOV) modality. The two
    /// convolutions stride by 2 so the dense layer sees a reduced spatial
    /// field; the dense layer (linear, as in the planar network) lifts
    /// back to `n x n` at 8 channels and the transposed convolution
    /// expands to one channel per heading bin.
    pub fn map_se2(grid: &GridSpec, seed: u64) -> Self {
        let n = grid.n();
        let bins = grid.heading_bins();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv1 = Conv2d::new(1, 16, 3, 2, &mut rng);
        let h1 = conv1.out_size(n);
        let conv2 = Conv2d::new(16, 32, 3, 2, &mut rng);
        let h2 = conv2.out_size(h1);
        let dense = Dense::new(32 * h2 * h2, n * n * 8, &mut rng);
        let deconv = ConvTranspose2d::new(8, bins, 3, &mut rng);
        let layers = vec![
            LayerKind::Conv(conv1),
            LayerKind::Relu(Relu),
            LayerKind::Conv(conv2),
            LayerKind::Relu(Relu),
            LayerKind::Reshape(Reshape::new(vec![32, h2, h2], vec![32 * h2 * h2])),
            LayerKind::Dense(dense),
            LayerKind::Reshape(Reshape::new(vec![n * n * 8], vec![8, n, n])),
            LayerKind::ConvT(deconv),
            LayerKind::Softmax(Softmax),
        ];
        Self { arch: Arch::MapSe2, input_n: n, output_len: n * n * bins, layers }
    }

    /// Coefficient network; `coeff_len` outputs, linear.
    pub fn coeff(grid: &GridSpec, coeff_len: usize, seed: u64) -> Self {
        let n = grid.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv1 = Conv2d::new(1, 8, 3, 1, &mut rng);
        let conv2 = Conv2d::new(8, 16, 3, 1, &mut rng);
        let dense1 = Dense::new(16 * n * n, 256, &mut rng);
        let dense2 = Dense::new(256, coeff_len, &mut rng);
        let layers = vec![
            LayerKind::Conv(conv1),
            LayerKind::Relu(Relu),
            LayerKind::Conv(conv2),
            LayerKind::Relu(Relu),
            LayerKind::Reshape(Reshape::new(vec![16, n, n], vec![16 * n * n])),
            LayerKind::Dense(dense1),
            LayerKind::Relu(Relu),
            LayerKind::Dense(dense2),
        ];
        Self { arch: Arch::Coeff, input_n: n, output_len: coeff_len, layers }
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn input_n(&self) -> usize {
        self.input_n
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn layers(&self) -> &[LayerKind<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerKind<T>] {
        &mut self.layers
    }

    /// Whether the final layer constrains the output to a distribution.
    pub fn output_is_distribution(&self) -> bool {
        matches!(self.layers.last(), Some(LayerKind::Softmax(_)))
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.params().iter().map(|p| p.len()).sum::<usize>())
            .sum()
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let s = x.shape();
        if s.len() != 4 || s[1] != 1 || s[2] != self.input_n || s[3] != self.input_n {
            return Err(Error::ShapeMismatch {
                expected: format!("[batch, 1, {0}, {0}] input", self.input_n),
                actual: format!("{s:?}"),
            });
        }
        Ok(())
    }

    /// Inference pass.
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward(&cur);
        }
        Ok(cur)
    }

    /// Single-belief inference.
    pub fn forward_belief(&self, belief: &Belief) -> Result<Tensor<T>> {
        if belief.n() != self.input_n {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} belief", self.input_n),
                actual: format!("{0}x{0}", belief.n()),
            });
        }
        let data: Vec<T> = belief.weights().iter().map(|&w| T::from_f64(w)).collect();
        let x = Tensor::from_vec(&[1, 1, self.input_n, self.input_n], data)?;
        self.forward(&x)
    }

    /// Training pass: returns the activation stack, `stack[0]` the input
    /// and `stack.last()` the output.
    pub fn forward_cached(&self, x: &Tensor<T>) -> Result<Vec<Tensor<T>>> {
        self.check_input(x)?;
        let mut stack = Vec::with_capacity(self.layers.len() + 1);
        stack.push(x.clone());
        for layer in &self.layers {
            let next = layer.forward(stack.last().unwrap());
            stack.push(next);
        }
        Ok(stack)
    }

    /// Zeroed gradient buffers matching the parameter layout.
    pub fn zero_grads(&self) -> Grads<T> {
        self.layers
            .iter()
            .map(|l| l.params().iter().map(|p| vec![T::zero(); p.len()]).collect())
            .collect()
    }

    /// Backpropagate `grad_out` through the stack produced by
    /// [`Network::forward_cached`], accumulating parameter gradients.
    pub fn backward(&self, stack: &[Tensor<T>], grad_out: Tensor<T>, grads: &mut Grads<T>) {
        debug_assert_eq!(stack.len(), self.layers.len() + 1);
        let mut grad = grad_out;
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            grad = layer.backward(&stack[idx], &stack[idx + 1], &grad, &mut grads[idx]);
        }
    }

    /// Flat views of every parameter array, in layer order.
    pub fn param_slices(&self) -> Vec<&[T]> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut Vec<T>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Convert the scalar type, rounding through `f64`.
    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                LayerKind::Conv(c) => LayerKind::Conv(Conv2d {
                    in_ch: c.in_ch,
                    out_ch: c.out_ch,
                    k: c.k,
                    stride: c.stride,
                    pad: c.pad,
                    weights: cast_vec(&c.weights),
                    bias: cast_vec(&c.bias),
                }),
                LayerKind::ConvT(c) => LayerKind::ConvT(ConvTranspose2d {
                    in_ch: c.in_ch,
                    out_ch: c.out_ch,
                    k: c.k,
                    pad: c.pad,
                    weights: cast_vec(&c.weights),
                    bias: cast_vec(&c.bias),
                }),
                LayerKind::Dense(d) => LayerKind::Dense(Dense {
                    in_dim: d.in_dim,
                    out_dim: d.out_dim,
                    weights: cast_vec(&d.weights),
                    bias: cast_vec(&d.bias),
                }),
                LayerKind::Relu(_) => LayerKind::Relu(Relu),
                LayerKind::Softmax(_) => LayerKind::Softmax(Softmax),
                LayerKind::Reshape(r) => {
                    LayerKind::Reshape(Reshape::new(r.from.clone(), r.to.clone()))
                }
            })
            .collect();
        Network {
            arch: self.arch,
            input_n: self.input_n,
            output_len: self.output_len,
            layers,
        }
    }
}

fn cast_vec<T: Scalar, U: Scalar>(v: &[T]) -> Vec<U> {
    v.iter().map(|&x| U::from_f64(x.as_f64())).collect()
}

/// Reorder a map-network output (`[heading][i][j]` channel-major) into the
/// map layout (`[(i, j)][heading]`, heading innermost). Identity for the
/// planar architecture.
pub fn channels_to_heading_major(values: &[f64], n: usize, bins: usize) -> Vec<f64> {
    if bins <= 1 {
        return values.to_vec();
    }
    let cells = n * n;
    let mut out = vec![0.0; cells * bins];
    for h in 0..bins {
        for cell in 0..cells {
            out[cell * bins + h] = values[h * cells + cell];
        }
    }
    out
}

/// Inverse of [`channels_to_heading_major`], used to build training targets
/// in the network's output layout.
pub fn heading_major_to_channels(values: &[f64], n: usize, bins: usize) -> Vec<f64> {
    if bins <= 1 {
        return values.to_vec();
    }
    let cells = n * n;
    let mut out = vec![0.0; cells * bins];
    for cell in 0..cells {
        for h in 0..bins {
            out[h * cells + cell] = values[cell * bins + h];
        }
    }
    out
}
