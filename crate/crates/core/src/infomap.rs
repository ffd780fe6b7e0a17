//! Exact information maps: mutual information over the planar and
//! position-plus-heading state spaces, and the Fisher-information
//! determinant over the plane (bearing modality only).
//!
//! Mutual information at a sensor state is the difference between the
//! entropy of the predictive measurement distribution and the expected
//! conditional measurement entropy under the belief. Both terms sum over
//! the discrete measurement and target sets, so a full map is
//! `O(|X| |Theta| |Z|)`; the per-pair probabilities come from the dense
//! [`LikelihoodTable`] so no measurement-model calls happen inside map
//! generation.

use crate::grid::{Belief, GridSpec, PoseR2, TargetCell};
use crate::sensors::{LikelihoodTable, SensorModel};
use crate::{Error, Modality, Result};
use std::time::{Duration, Instant};

/// Scalar information field over planar sensor states.
#[derive(Debug, Clone)]
pub struct InfoMapR2 {
    n: usize,
    values: Vec<f64>,
    normalized: bool,
    degenerate: bool,
    /// Wall time spent generating the map, when produced by a generator.
    pub gen_time: Option<Duration>,
}

/// Scalar information field over position-plus-heading sensor states,
/// laid out `[(i * n + j) * H + h]` with the heading axis innermost.
#[derive(Debug, Clone)]
pub struct InfoMapSE2 {
    n: usize,
    heading_bins: usize,
    values: Vec<f64>,
    normalized: bool,
    degenerate: bool,
    pub gen_time: Option<Duration>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::Format(format!(
                "non-finite map value {value} at index {index}"
            )));
        }
    }
    Ok(())
}

/// Shared normalization: clamps negatives within -1e-9 of zero, rejects
/// anything more negative, divides by the sum, and degrades an all-zero
/// field to the uniform distribution (flagged).
fn normalize_values(values: &mut [f64]) -> Result<bool> {
    for (index, value) in values.iter_mut().enumerate() {
        if *value < 0.0 {
            if *value < -1e-9 {
                return Err(Error::NegativeWeight { index, value: *value });
            }
            *value = 0.0;
        }
    }
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        for v in values.iter_mut() {
            *v /= sum;
        }
        Ok(false)
    } else {
        let uniform = 1.0 / values.len() as f64;
        values.fill(uniform);
        Ok(true)
    }
}

impl InfoMapR2 {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", n * n),
                actual: format!("{}", values.len()),
            });
        }
        check_finite(&values)?;
        Ok(Self { n, values, normalized: false, degenerate: false, gen_time: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: TargetCell) -> f64 {
        self.values[cell.i * self.n + cell.j]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Whether normalization degraded an all-zero field to uniform.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Scale the map into a distribution. Already-normalized maps are
    /// returned unchanged; an all-zero map becomes uniform and is flagged.
    pub fn normalize(mut self) -> Result<Self> {
        if self.normalized {
            return Ok(self);
        }
        self.degenerate = normalize_values(&mut self.values)?;
        self.normalized = true;
        Ok(self)
    }
}

impl InfoMapSE2 {
    pub fn from_values(n: usize, heading_bins: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n * heading_bins {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", n * n * heading_bins),
                actual: format!("{}", values.len()),
            });
        }
        check_finite(&values)?;
        Ok(Self { n, heading_bins, values, normalized: false, degenerate: false, gen_time: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn heading_bins(&self) -> usize {
        self.heading_bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: TargetCell, heading_bin: usize) -> f64 {
        self.values[(cell.i * self.n + cell.j) * self.heading_bins + heading_bin]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn normalize(mut self) -> Result<Self> {
        if self.normalized {
            return Ok(self);
        }
        self.degenerate = normalize_values(&mut self.values)?;
        self.normalized = true;
        Ok(self)
    }

    /// The `n x n` slice at a fixed heading bin.
    pub fn heading_slice(&self, heading_bin: usize) -> Result<Vec<f64>> {
        if heading_bin >= self.heading_bins {
            return Err(Error::HeadingOutOfRange { bin: heading_bin, bins: self.heading_bins });
        }
        Ok((0..self.n * self.n)
            .map(|flat| self.values[flat * self.heading_bins + heading_bin])
            .collect())
    }
}

/// Mutual information between the next measurement and the target cell,
/// evaluated pointwise at one sensor state, in nats.
///
/// Computes the predictive measurement entropy minus the belief-weighted
/// conditional measurement entropy, both summed over the discrete
/// measurement and target sets. Tiny negative results from rounding are
/// clamped to zero.
pub fn mutual_info_at<S: SensorModel>(
    belief: &Belief,
    sensor: &S,
    grid: &GridSpec,
    pose: S::Pose,
) -> f64 {
    let z_count = sensor.z_count();
    let mut row = vec![0.0; z_count];
    let mut predictive = vec![0.0; z_count];
    let mut conditional = 0.0;
    for (flat, &w) in belief.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        sensor.likelihood_row(grid, pose, grid.cell_at(flat), &mut row);
        for (pz, &p) in predictive.iter_mut().zip(row.iter()) {
            *pz += p * w;
        }
        let mut row_entropy = 0.0;
        for &p in &row {
            if p > 0.0 {
                row_entropy -= p * p.ln();
            }
        }
        conditional += w * row_entropy;
    }
    let mut predictive_entropy = 0.0;
    for &pz in &predictive {
        if pz > 0.0 {
            predictive_entropy -= pz * pz.ln();
        }
    }
    (predictive_entropy - conditional).max(0.0)
}

/// Table-backed mutual information at one flat sensor-state index.
///
/// Matches [`mutual_info_at`] bit for bit: the table stores the same
/// likelihood values and both paths accumulate in the same order.
pub fn mutual_info_at_state(belief: &Belief, table: &LikelihoodTable, state: usize) -> f64 {
    let z_count = table.z_count();
    let theta_count = table.theta_count();
    let weights = belief.weights();
    debug_assert_eq!(weights.len(), theta_count);

    let mut predictive_entropy = 0.0;
    for z in 0..z_count {
        let row = table.row(state, z);
        let mut pz = 0.0;
        for (p, w) in row.iter().zip(weights) {
            pz += p * w;
        }
        if pz > 0.0 {
            predictive_entropy -= pz * pz.ln();
        }
    }

    let mut conditional = 0.0;
    for (theta, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut row_entropy = 0.0;
        for z in 0..z_count {
            let p = table.prob(state, z, theta);
            if p > 0.0 {
                row_entropy -= p * p.ln();
            }
        }
        conditional += w * row_entropy;
    }

    (predictive_entropy - conditional).max(0.0)
}

fn mi_values(belief: &Belief, table: &LikelihoodTable) -> Vec<f64> {
    (0..table.state_count())
        .map(|state| mutual_info_at_state(belief, table, state))
        .collect()
}

/// Mutual-information map over planar sensor states (bearing modality).
pub fn mi_map_r2<S: SensorModel>(
    belief: &Belief,
    sensor: &S,
    grid: &GridSpec,
    table: &LikelihoodTable,
) -> Result<InfoMapR2> {
    if sensor.modality() != Modality::Bearing || !table.matches(grid, Modality::Bearing) {
        return Err(Error::TableMismatch);
    }
    if belief.n() != grid.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} belief", grid.n()),
            actual: format!("{0}x{0}", belief.n()),
        });
    }
    let start = Instant::now();
    let values = mi_values(belief, table);
    let mut map = InfoMapR2::from_values(grid.n(), values)?;
    map.gen_time = Some(start.elapsed());
    Ok(map)
}

/// Mutual-information map over position-plus-heading sensor states
/// (FOV modality).
pub fn mi_map_se2<S: SensorModel>(
    belief: &Belief,
    sensor: &S,
    grid: &GridSpec,
    table: &LikelihoodTable,
) -> Result<InfoMapSE2> {
    if sensor.modality() != Modality::Fov || !table.matches(grid, Modality::Fov) {
        return Err(Error::TableMismatch);
    }
    if belief.n() != grid.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} belief", grid.n()),
            actual: format!("{0}x{0}", belief.n()),
        });
    }
    let start = Instant::now();
    let values = mi_values(belief, table);
    let mut map = InfoMapSE2::from_values(grid.n(), grid.heading_bins(), values)?;
    map.gen_time = Some(start.elapsed());
    Ok(map)
}

/// Fisher information matrix for one sensor/target pair under the bearing
/// model with constant Gaussian noise of standard deviation `sigma_rad`
/// (radians, for dimensional consistency with the bearing function).
///
/// The bearing gradient with respect to the target is
/// `[theta_e - x_e, x_n - theta_n] / ||theta - x||^2`; pairs closer than
/// `min_range` (half a cell width when called from [`fisher_map`]) are
/// treated as coincident and contribute the zero matrix.
pub fn fisher_matrix(
    x: PoseR2,
    theta_center: (f64, f64),
    sigma_rad: f64,
    min_range: f64,
) -> [[f64; 2]; 2] {
    let dn = theta_center.0 - x.north;
    let de = theta_center.1 - x.east;
    let r2 = dn * dn + de * de;
    if r2 < min_range * min_range {
        return [[0.0, 0.0], [0.0, 0.0]];
    }
    // gradient g = [de, -dn] / r2; matrix = g g^T / sigma^2
    let g0 = de / r2;
    let g1 = -dn / r2;
    let inv_s2 = 1.0 / (sigma_rad * sigma_rad);
    [
        [g0 * g0 * inv_s2, g0 * g1 * inv_s2],
        [g1 * g0 * inv_s2, g1 * g1 * inv_s2],
    ]
}

/// Fisher-information map: the determinant of the belief-weighted Fisher
/// matrix at every planar sensor state. Bearing modality only; `sigma_deg`
/// is converted to radians internally.
pub fn fisher_map(belief: &Belief, grid: &GridSpec, sigma_deg: f64) -> Result<InfoMapR2> {
    if belief.n() != grid.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} belief", grid.n()),
            actual: format!("{0}x{0}", belief.n()),
        });
    }
    if !(sigma_deg > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bearing noise sigma must be positive, got {sigma_deg}"
        )));
    }
    let start = Instant::now();
    let sigma_rad = sigma_deg.to_radians();
    let min_range = grid.cell_width() / 2.0;
    let weights = belief.weights();
    let mut values = Vec::with_capacity(grid.num_cells());
    for state in 0..grid.num_cells() {
        let (north, east) = grid.cell_center_unchecked(grid.cell_at(state));
        let x = PoseR2 { north, east };
        let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
        for (flat, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let center = grid.cell_center_unchecked(grid.cell_at(flat));
            let m = fisher_matrix(x, center, sigma_rad, min_range);
            m00 += w * m[0][0];
            m01 += w * m[0][1];
            m11 += w * m[1][1];
        }
        let det = m00 * m11 - m01 * m01;
        values.push(det.max(0.0));
    }
    let mut map = InfoMapR2::from_values(grid.n(), values)?;
    map.gen_time = Some(start.elapsed());
    Ok(map)
}
