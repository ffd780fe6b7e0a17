//! From-scratch CNN stack: tensors, layers, losses, the Adam optimizer,
//! the training loop, and weights serialization.
//!
//! Two architectures are provided. The map network turns an `n x n` belief
//! into an information map (softmax over the whole output, so it is a
//! distribution); the coefficient network turns a belief into the Fourier
//! coefficient vector of that map (linear output). All deployment math is
//! 32-bit; every layer is generic over the scalar so tests can run the
//! same code in 64-bit against finite-difference oracles.

#[cfg(test)]
mod gradcheck_tests;
mod layers;
mod losses;
mod net;
mod tensor;
mod train;
mod weights;

pub use layers::{Conv2d, ConvTranspose2d, Dense, LayerKind, Relu, Reshape, Softmax};
pub use losses::{kl_loss, kl_loss_grad, mae_loss, mae_loss_grad, LossKind};
pub use net::{channels_to_heading_major, heading_major_to_channels, Arch, Network};
pub use tensor::{Scalar, Tensor};
pub use train::{train, EpochLoss, TrainConfig, TrainReport, TrainingSet};
pub use weights::{load_weights, save_weights, write_loss_history, TrainedMeta, WeightsHeader};
