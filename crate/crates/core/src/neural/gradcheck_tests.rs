//! Gradient checks: analytic backward passes against 64-bit central
//! finite differences, for each layer in isolation and for both full
//! architectures.

use super::layers::{Conv2d, ConvTranspose2d, Dense, LayerKind, Relu, Reshape, Softmax};
use super::losses::{kl_loss, kl_loss_grad, mae_loss, mae_loss_grad};
use super::net::Network;
use super::tensor::Tensor;
use crate::grid::GridSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL_TOL: f64 = 1e-4;
const FD_EPS: f64 = 1e-6;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let len: usize = shape.iter().product();
    // Values bounded away from zero so rectifier kinks stay clear of the
    // finite-difference window.
    let data: Vec<f64> = (0..len)
        .map(|_| {
            let v: f64 = rng.gen::<f64>() * 1.8 + 0.2;
            if rng.gen::<bool>() {
                v
            } else {
                -v
            }
        })
        .collect();
    Tensor::from_vec(shape, data).unwrap()
}

/// Scalar readout loss: sum of the output weighted by a fixed random
/// projection, which exercises every output path with a nontrivial
/// gradient.
fn readout(y: &Tensor<f64>, r: &[f64]) -> f64 {
    y.data().iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Check d(readout)/d(params) and d(readout)/d(input) for one layer.
fn check_layer(layer: &mut LayerKind<f64>, in_shape: &[usize], seed: u64, points: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_tensor(in_shape, &mut rng);
    let y = layer.forward(&x);
    let r: Vec<f64> = (0..y.len()).map(|_| rng.gen::<f64>() - 0.5).collect();

    let gy = Tensor::from_vec(y.shape(), r.clone()).unwrap();
    let mut grads: Vec<Vec<f64>> =
        layer.params().iter().map(|p| vec![0.0; p.len()]).collect();
    let gx = layer.backward(&x, &y, &gy, &mut grads);

    // Parameter gradients.
    let param_count = layer.params().len();
    for pi in 0..param_count {
        let plen = layer.params()[pi].len();
        for t in 0..points.min(plen) {
            let idx = if plen <= points { t } else { rng.gen_range(0..plen) };
            let orig = layer.params()[pi][idx];
            layer.params_mut()[pi][idx] = orig + FD_EPS;
            let hi = readout(&layer.forward(&x), &r);
            layer.params_mut()[pi][idx] = orig - FD_EPS;
            let lo = readout(&layer.forward(&x), &r);
            layer.params_mut()[pi][idx] = orig;
            let fd = (hi - lo) / (2.0 * FD_EPS);
            let an = grads[pi][idx];
            assert!(
                rel_err(fd, an) < REL_TOL,
                "{} param {pi} idx {idx}: fd {fd:.6e} analytic {an:.6e}",
                layer.name()
            );
        }
    }

    // Input gradients.
    let mut x_pert = x.clone();
    for t in 0..points.min(x.len()) {
        let idx = if x.len() <= points { t } else { rng.gen_range(0..x.len()) };
        let orig = x.data()[idx];
        x_pert.data_mut()[idx] = orig + FD_EPS;
        let hi = readout(&layer.forward(&x_pert), &r);
        x_pert.data_mut()[idx] = orig - FD_EPS;
        let lo = readout(&layer.forward(&x_pert), &r);
        x_pert.data_mut()[idx] = orig;
        let fd = (hi - lo) / (2.0 * FD_EPS);
        let an = gx.data()[idx];
        assert!(
            rel_err(fd, an) < REL_TOL,
            "{} input idx {idx}: fd {fd:.6e} analytic {an:.6e}",
            layer.name()
        );
    }
}

#[test]
fn conv_layer_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut layer = LayerKind::Conv(Conv2d::<f64>::new(3, 4, 3, 1, &mut rng));
    check_layer(&mut layer, &[2, 3, 5, 5], 1, 10);
}

#[test]
fn strided_conv_layer_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut layer = LayerKind::Conv(Conv2d::<f64>::new(2, 3, 3, 2, &mut rng));
    check_layer(&mut layer, &[2, 2, 7, 7], 2, 10);
}

#[test]
fn transposed_conv_layer_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut layer = LayerKind::ConvT(ConvTranspose2d::<f64>::new(3, 4, 3, &mut rng));
    check_layer(&mut layer, &[2, 3, 5, 5], 3, 10);
}

#[test]
fn dense_layer_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut layer = LayerKind::Dense(Dense::<f64>::new(12, 7, &mut rng));
    check_layer(&mut layer, &[3, 12], 4, 10);
}

#[test]
fn relu_layer_gradients() {
    let mut layer = LayerKind::Relu(Relu);
    check_layer(&mut layer, &[2, 3, 4, 4], 5, 10);
}

#[test]
fn softmax_layer_gradients() {
    let mut layer = LayerKind::Softmax(Softmax);
    check_layer(&mut layer, &[2, 9], 6, 10);
}

#[test]
fn reshape_layer_gradients() {
    let mut layer = LayerKind::Reshape(Reshape::new(vec![3, 4, 4], vec![48]));
    check_layer(&mut layer, &[2, 3, 4, 4], 7, 10);
}

fn normalized_input(n: usize, seed: u64) -> Tensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    Tensor::from_vec(&[1, 1, n, n], raw.iter().map(|v| v / sum).collect()).unwrap()
}

fn check_network(net: &mut Network<f64>, x: &Tensor<f64>, target: &[f64], kl: bool, points: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(999);
    let loss_of = |net: &Network<f64>, x: &Tensor<f64>| -> f64 {
        let y = net.forward(x).unwrap();
        if kl {
            kl_loss(y.data(), target).unwrap()
        } else {
            mae_loss(y.data(), target).unwrap()
        }
    };
    let stack = net.forward_cached(x).unwrap();
    let y = stack.last().unwrap();
    let mut grad_out = Tensor::zeros(y.shape());
    if kl {
        kl_loss_grad(y.data(), target, 1.0, grad_out.data_mut());
    } else {
        mae_loss_grad(y.data(), target, 1.0, grad_out.data_mut());
    }
    let mut grads = net.zero_grads();
    net.backward(&stack, grad_out, &mut grads);

    let layer_count = net.layers().len();
    let mut checked = 0;
    while checked < points {
        let li = rng.gen_range(0..layer_count);
        let param_count = net.layers()[li].params().len();
        if param_count == 0 {
            continue;
        }
        let pi = rng.gen_range(0..param_count);
        let plen = net.layers()[li].params()[pi].len();
        let idx = rng.gen_range(0..plen);
        let orig = net.layers()[li].params()[pi][idx];
        net.layers_mut()[li].params_mut()[pi][idx] = orig + FD_EPS;
        let hi = loss_of(net, x);
        net.layers_mut()[li].params_mut()[pi][idx] = orig - FD_EPS;
        let lo = loss_of(net, x);
        net.layers_mut()[li].params_mut()[pi][idx] = orig;
        let fd = (hi - lo) / (2.0 * FD_EPS);
        let an = grads[li][pi][idx];
        // Skip points where the finite difference itself is numerically
        // degenerate (both sides identical to machine precision).
        if fd == 0.0 && an.abs() < 1e-10 {
            checked += 1;
            continue;
        }
        assert!(
            rel_err(fd, an) < REL_TOL,
            "layer {li} param {pi} idx {idx}: fd {fd:.6e} analytic {an:.6e}"
        );
        checked += 1;
    }
}

#[test]
fn full_map_r2_architecture_gradients() {
    let g = GridSpec::new(200.0, 6, 1).unwrap();
    let mut net = Network::<f64>::map_r2(&g, 31);
    let x = normalized_input(6, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let raw: Vec<f64> = (0..36).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    let target: Vec<f64> = raw.iter().map(|v| v / s).collect();
    check_network(&mut net, &x, &target, true, 10);
}

#[test]
fn full_map_se2_architecture_gradients() {
    let g = GridSpec::new(200.0, 6, 4).unwrap();
    let mut net = Network::<f64>::map_se2(&g, 33);
    let x = normalized_input(6, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let raw: Vec<f64> = (0..36 * 4).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    let target: Vec<f64> = raw.iter().map(|v| v / s).collect();
    check_network(&mut net, &x, &target, true, 10);
}

#[test]
fn full_coeff_architecture_gradients() {
    let g = GridSpec::new(200.0, 6, 1).unwrap();
    let mut net = Network::<f64>::coeff(&g, 16, 35);
    let x = normalized_input(6, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let target: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() - 0.5).collect();
    check_network(&mut net, &x, &target, false, 10);
}
