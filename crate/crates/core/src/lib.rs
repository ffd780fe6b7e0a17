//! Information maps for mobile-sensor target localization, and convolutional
//! networks that approximate them in real time.
//!
//! A mobile sensor searches a square field for a stationary target while
//! maintaining a histogram-filter belief over a discrete grid. From the
//! belief, an information map scores how valuable a measurement would be at
//! every reachable sensor state — mutual information for the bearing and
//! field-of-view sensor modalities, or a Fisher-information determinant for
//! bearing. The maps (and their Fourier coefficients, as consumed by
//! spectral coverage controllers) are expensive to recompute after every
//! measurement, so this crate also trains small CNNs that predict maps and
//! coefficients directly from beliefs, and benchmarks the fidelity and
//! speed of the learned approximation against the exact computation.
//!
//! Modules:
//!
//! - [`grid`]: field geometry, discretization, angles, and beliefs.
//! - [`sensors`]: bearing and FOV likelihood models plus dense lookup tables.
//! - [`filter`]: measurement-only histogram Bayes filter and belief entropy.
//! - [`infomap`]: exact mutual-information and Fisher-information maps.
//! - [`spectral`]: Fourier decomposition/reconstruction and the ergodic metric.
//! - [`neural`]: from-scratch CNN stack (layers, losses, Adam, training, weights IO).
//! - [`sim`]: greedy information-gathering episodes and dataset generation.
//! - [`eval`]: KL-divergence quality reports, wall-clock benchmarks, rendering.

pub mod eval;
pub mod filter;
pub mod grid;
pub mod infomap;
mod io;
pub mod neural;
pub mod sensors;
pub mod sim;
pub mod spectral;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sensor modality: which likelihood model drives filtering and maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    /// Bearing-only sensor; state space is planar position.
    Bearing,
    /// Front/rear antenna-comparison sensor; state space is position plus heading.
    Fov,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Bearing => "bearing",
            Modality::Fov => "fov",
        }
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bearing" => Ok(Modality::Bearing),
            "fov" => Ok(Modality::Fov),
            other => Err(Error::InvalidConfig(format!("unknown modality {other:?}"))),
        }
    }
}

/// Information metric used to build maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mutual,
    Fisher,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mutual => "mutual",
            Metric::Fisher => "fisher",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mutual" => Ok(Metric::Mutual),
            "fisher" => Ok(Metric::Fisher),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cell ({i}, {j}) out of range for an {n}x{n} grid")]
    CellOutOfRange { i: usize, j: usize, n: usize },
    #[error("heading bin {bin} out of range for {bins} bins")]
    HeadingOutOfRange { bin: usize, bins: usize },
    #[error("measurement {z} is outside the sensor's discrete domain")]
    MeasurementOutsideDomain { z: f64 },
    #[error("likelihood table needs {required} bytes; budget is {budget}")]
    TableBudgetExceeded { required: u64, budget: u64 },
    #[error("likelihood table does not match this grid/sensor")]
    TableMismatch,
    #[error("posterior mass is exactly zero: measurement model violation")]
    ZeroPosterior,
    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },
    #[error("coefficient vectors use different index sets")]
    IndexSetMismatch,
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("empty action set")]
    EmptyActionSet,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}; training aborted")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown architecture id {0:?}")]
    UnknownArchitecture(String),
    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
