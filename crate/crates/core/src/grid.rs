//! Geometry of the square search field: grid discretization, sensor poses,
//! angle arithmetic, and the belief held over target cells.
//!
//! Conventions used throughout the crate:
//!
//! - Coordinates are (north, east) in meters, origin at the field corner.
//! - Angles are degrees, measured east of north, normalized to [0, 360).
//! - Grid cells are indexed `(i, j)` = (north index, east index), both
//!   0-based, and flattened row-major as `i * n + j`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance for checking that a distribution sums to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Square field discretized into `n x n` cells with `heading_bins` headings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    side_length: f64,
    n: usize,
    heading_bins: usize,
}

impl GridSpec {
    pub fn new(side_length: f64, n: usize, heading_bins: usize) -> Result<Self> {
        if !(side_length > 0.0) || !side_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "side_length must be positive and finite, got {side_length}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("n must be >= 2, got {n}")));
        }
        if heading_bins < 1 {
            return Err(Error::InvalidGrid("heading_bins must be >= 1".into()));
        }
        Ok(Self { side_length, n, heading_bins })
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    /// Cells per spatial dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn heading_bins(&self) -> usize {
        self.heading_bins
    }

    pub fn cell_width(&self) -> f64 {
        self.side_length / self.n as f64
    }

    /// Number of target cells (and of planar sensor states), `n * n`.
    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }

    /// Number of position-plus-heading sensor states, `n * n * H`.
    pub fn num_se2_states(&self) -> usize {
        self.num_cells() * self.heading_bins
    }

    /// Midpoint of a cell, `((i + 0.5) w, (j + 0.5) w)`.
    pub fn cell_center(&self, cell: TargetCell) -> Result<(f64, f64)> {
        if cell.i >= self.n || cell.j >= self.n {
            return Err(Error::CellOutOfRange { i: cell.i, j: cell.j, n: self.n });
        }
        Ok(self.cell_center_unchecked(cell))
    }

    #[inline]
    pub(crate) fn cell_center_unchecked(&self, cell: TargetCell) -> (f64, f64) {
        let w = self.cell_width();
        ((cell.i as f64 + 0.5) * w, (cell.j as f64 + 0.5) * w)
    }

    /// Row-major flat index of a cell.
    #[inline]
    pub fn flat_index(&self, cell: TargetCell) -> usize {
        cell.i * self.n + cell.j
    }

    #[inline]
    pub fn cell_at(&self, flat: usize) -> TargetCell {
        TargetCell { i: flat / self.n, j: flat % self.n }
    }

    /// Heading angle of bin `h`, `h * (360 / H)` degrees.
    pub fn heading_angle(&self, bin: usize) -> Result<f64> {
        if bin >= self.heading_bins {
            return Err(Error::HeadingOutOfRange { bin, bins: self.heading_bins });
        }
        Ok(bin as f64 * 360.0 / self.heading_bins as f64)
    }

    /// Whether a planar position lies inside the field (borders included).
    pub fn contains(&self, north: f64, east: f64) -> bool {
        (0.0..=self.side_length).contains(&north) && (0.0..=self.side_length).contains(&east)
    }
}

impl Default for GridSpec {
    /// 200 m field, 28 cells per side, 36 heading bins.
    fn default() -> Self {
        Self { side_length: 200.0, n: 28, heading_bins: 36 }
    }
}

/// Grid cell a stationary target may occupy: `(north index, east index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetCell {
    pub i: usize,
    pub j: usize,
}

impl TargetCell {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Planar sensor pose in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseR2 {
    pub north: f64,
    pub east: f64,
}

impl PoseR2 {
    pub fn new(north: f64, east: f64) -> Self {
        Self { north, east }
    }
}

/// Sensor pose with heading, degrees in [0, 360).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSE2 {
    pub north: f64,
    pub east: f64,
    pub heading: f64,
}

impl PoseSE2 {
    pub fn new(north: f64, east: f64, heading: f64) -> Self {
        Self { north, east, heading: normalize_angle(heading) }
    }

    pub fn position(&self) -> PoseR2 {
        PoseR2 { north: self.north, east: self.east }
    }
}

/// Normalize an angle to [0, 360).
#[inline]
pub fn normalize_angle(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round back to 360.0 for inputs just below zero.
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Bearing to a target point, degrees east of north in [0, 360).
///
/// Returns `(degrees, coincident)`: when the target coincides with the
/// sensor position the bearing is undefined and the convention value 0.0 is
/// returned with the flag set. The sensor models translate a flagged result
/// into an uninformative measurement.
pub fn true_bearing(x: PoseR2, target: (f64, f64)) -> (f64, bool) {
    let dn = target.0 - x.north;
    let de = target.1 - x.east;
    if dn == 0.0 && de == 0.0 {
        return (0.0, true);
    }
    (normalize_angle(de.atan2(dn).to_degrees()), false)
}

/// Signed smallest rotation from `b` to `a`, degrees in (-180, 180].
#[inline]
pub fn wrap_angle_diff(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Histogram-filter posterior over target cells: an `n x n` nonnegative
/// grid summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    n: usize,
    weights: Vec<f64>,
}

impl Belief {
    pub fn uniform(n: usize) -> Self {
        let cells = n * n;
        Self { n, weights: vec![1.0 / cells as f64; cells] }
    }

    pub fn point_mass(n: usize, cell: TargetCell) -> Result<Self> {
        if cell.i >= n || cell.j >= n {
            return Err(Error::CellOutOfRange { i: cell.i, j: cell.j, n });
        }
        let mut weights = vec![0.0; n * n];
        weights[cell.i * n + cell.j] = 1.0;
        Ok(Self { n, weights })
    }

    /// Build from raw weights, validating nonnegativity and normalization.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weights", n * n),
                actual: format!("{}", weights.len()),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { n, weights })
    }

    /// Normalize raw nonnegative weights to sum to one.
    pub fn from_unnormalized(n: usize, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weights", n * n),
                actual: format!("{}", weights.len()),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::ZeroPosterior);
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, cell: TargetCell) -> f64 {
        self.weights[cell.i * self.n + cell.j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cell_centers_match_hand_values() {
        let g2 = GridSpec::new(200.0, 2, 1).unwrap();
        assert_eq!(g2.cell_center(TargetCell::new(0, 0)).unwrap(), (50.0, 50.0));
        assert_eq!(g2.cell_center(TargetCell::new(1, 1)).unwrap(), (150.0, 150.0));

        let g28 = GridSpec::new(200.0, 28, 36).unwrap();
        let (n, e) = g28.cell_center(TargetCell::new(0, 0)).unwrap();
        assert!((n - 100.0 / 28.0).abs() < 1e-12);
        assert!((e - 100.0 / 28.0).abs() < 1e-12);
    }

    #[test]
    fn cell_center_rejects_out_of_range() {
        let g = GridSpec::new(200.0, 4, 1).unwrap();
        assert!(g.cell_center(TargetCell::new(4, 0)).is_err());
        assert!(g.cell_center(TargetCell::new(0, 4)).is_err());
    }

    #[test]
    fn cell_center_is_injective() {
        let g = GridSpec::new(200.0, 6, 1).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..6 {
            for j in 0..6 {
                let (n, e) = g.cell_center(TargetCell::new(i, j)).unwrap();
                assert!(seen.insert((n.to_bits(), e.to_bits())));
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 28, 36).is_err());
        assert!(GridSpec::new(-5.0, 28, 36).is_err());
        assert!(GridSpec::new(200.0, 1, 36).is_err());
        assert!(GridSpec::new(200.0, 28, 0).is_err());
        assert!(GridSpec::new(200.0, 2, 1).is_ok());
    }

    #[test]
    fn heading_angles() {
        let g = GridSpec::default();
        assert_eq!(g.heading_angle(0).unwrap(), 0.0);
        assert_eq!(g.heading_angle(9).unwrap(), 90.0);
        assert_eq!(g.heading_angle(35).unwrap(), 350.0);
        assert!(g.heading_angle(36).is_err());
    }

    #[test]
    fn bearing_cardinal_directions() {
        let x = PoseR2::new(0.0, 0.0);
        assert_eq!(true_bearing(x, (0.0, 1.0)), (90.0, false));
        assert_eq!(true_bearing(x, (1.0, 0.0)), (0.0, false));
        assert_eq!(true_bearing(x, (-1.0, 0.0)), (180.0, false));
    }

    #[test]
    fn bearing_coincident_sets_flag() {
        let x = PoseR2::new(3.5, 7.25);
        assert_eq!(true_bearing(x, (3.5, 7.25)), (0.0, true));
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle_diff(10.0, 350.0), 20.0);
        assert_eq!(wrap_angle_diff(0.0, 180.0), 180.0);
        assert_eq!(wrap_angle_diff(90.0, 90.0), 0.0);
    }

    #[test]
    fn belief_constructors() {
        let b = Belief::uniform(4);
        assert!((b.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let p = Belief::point_mass(4, TargetCell::new(2, 3)).unwrap();
        assert_eq!(p.weight(TargetCell::new(2, 3)), 1.0);
        assert!(Belief::point_mass(4, TargetCell::new(4, 0)).is_err());

        assert!(Belief::from_weights(2, vec![0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(Belief::from_weights(2, vec![0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(Belief::from_weights(2, vec![1.5, -0.5, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn bearing_reverses_under_180(
            xn in 0.0f64..200.0, xe in 0.0f64..200.0,
            tn in 0.0f64..200.0, te in 0.0f64..200.0,
        ) {
            prop_assume!(xn != tn || xe != te);
            let (fwd, c1) = true_bearing(PoseR2::new(xn, xe), (tn, te));
            let (back, c2) = true_bearing(PoseR2::new(tn, te), (xn, xe));
            prop_assert!(!c1 && !c2);
            let diff = wrap_angle_diff(fwd + 180.0, back);
            prop_assert!(diff.abs() < 1e-6, "fwd {fwd} back {back}");
        }

        #[test]
        fn wrap_is_antisymmetric(a in -720.0f64..720.0, b in -720.0f64..720.0) {
            let d = wrap_angle_diff(a, b);
            prop_assume!((d.abs() - 180.0).abs() > 1e-9);
            let r = wrap_angle_diff(b, a);
            prop_assert!((d + r).abs() < 1e-9);
        }

        #[test]
        fn wrap_stays_in_range(a in -1e4f64..1e4, b in -1e4f64..1e4) {
            let d = wrap_angle_diff(a, b);
            prop_assert!(d > -180.0 && d <= 180.0);
        }
    }
}
