//! Measurement-only histogram Bayes filter over target cells.
//!
//! The target is stationary, so there is no prediction step: each update
//! multiplies the belief by the measurement likelihood and renormalizes.

use crate::grid::{Belief, GridSpec};
use crate::sensors::SensorModel;
use crate::{Error, Result};

/// Posterior after observing measurement index `z` from `pose`.
///
/// The posterior is proportional to `prior * P(z | pose, theta)` and is
/// renormalized to sum to one. Both sensor models assign strictly positive
/// likelihood to every measurement, so a posterior of exactly zero mass
/// signals a broken model and is reported as an error.
pub fn update<S: SensorModel>(
    belief: &Belief,
    sensor: &S,
    grid: &GridSpec,
    pose: S::Pose,
    z: usize,
) -> Result<Belief> {
    if z >= sensor.z_count() {
        return Err(Error::MeasurementOutsideDomain { z: z as f64 });
    }
    if belief.n() != grid.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} belief", grid.n()),
            actual: format!("{0}x{0}", belief.n()),
        });
    }
    let mut row = vec![0.0; sensor.z_count()];
    let mut posterior = Vec::with_capacity(belief.weights().len());
    for (flat, &prior) in belief.weights().iter().enumerate() {
        if prior == 0.0 {
            posterior.push(0.0);
            continue;
        }
        sensor.likelihood_row(grid, pose, grid.cell_at(flat), &mut row);
        posterior.push(prior * row[z]);
    }
    Belief::from_unnormalized(belief.n(), posterior)
}

/// Shannon entropy of the belief in nats, with `0 ln 0 := 0`.
pub fn entropy(belief: &Belief) -> f64 {
    entropy_of(belief.weights())
}

/// Entropy of any nonnegative weight slice, in nats.
pub(crate) fn entropy_of(weights: &[f64]) -> f64 {
    let mut h = 0.0;
    for &w in weights {
        if w > 0.0 {
            h -= w * w.ln();
        }
    }
    h
}
