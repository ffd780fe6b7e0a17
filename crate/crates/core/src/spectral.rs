//! Fourier decomposition and reconstruction of information maps and
//! trajectory distributions, and the spectral coverage (ergodic) metric.
//!
//! The planar basis is the separable cosine family
//! `F_k(x) = cos(k1 pi x_n / L) cos(k2 pi x_e / L) / h_k`; the
//! position-plus-heading basis multiplies in a cosine or sine harmonic of
//! the heading angle. Each `h_k` is computed numerically on the actual
//! lattice so that `sum_x F_k(x)^2 * mu = 1` with `mu` the cell measure,
//! which makes full-order round trips exact on the grid.
//!
//! Maps store probability mass per cell; coefficients are those of the
//! underlying density, so `phi_k = sum_x mass(x) F_k(x)` and a trajectory's
//! empirical distribution produces directly comparable coefficients.
//! Coefficient vectors are enumerated k1-major, then k2, then the heading
//! harmonic with cosine before sine.

use crate::grid::{GridSpec, PoseR2, PoseSE2};
use crate::infomap::{InfoMapR2, InfoMapSE2};
use crate::io::{read_format, write_format};
use crate::{Error, Modality, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Floor applied to reconstructed maps before renormalization; truncated
/// series go slightly negative and downstream KL needs a distribution.
pub const RECONSTRUCTION_FLOOR: f64 = 1e-12;

/// Identifier of the coefficient enumeration order used on disk.
pub const COEFF_ORDERING: &str = "k1_major_v1";

/// Planar multi-index, components in `0..=K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndexR2 {
    pub k1: usize,
    pub k2: usize,
}

/// Heading harmonic kind; sine is excluded for the zeroth harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadingKind {
    Cos,
    Sin,
}

/// Position-plus-heading multi-index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndexSE2 {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub kind: HeadingKind,
}

/// Ordered coefficients of a map or trajectory distribution under a fixed
/// multi-index enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    modality: Modality,
    max_order: usize,
    values: Vec<f64>,
}

/// Coefficient count for a modality and highest order.
pub fn coeff_len(modality: Modality, max_order: usize) -> usize {
    let k = max_order + 1;
    match modality {
        Modality::Bearing => k * k,
        Modality::Fov => k * k * (2 * max_order + 1),
    }
}

impl CoeffVector {
    pub fn new(modality: Modality, max_order: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != coeff_len(modality, max_order) {
            return Err(Error::ShapeMismatch {
                expected: format!("{} coefficients", coeff_len(modality, max_order)),
                actual: format!("{}", values.len()),
            });
        }
        Ok(Self { modality, max_order, values })
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Serialize as a JSON header plus little-endian 32-bit floats in
    /// enumeration order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = CoeffHeader {
            format_version: COEFF_FORMAT_VERSION,
            kind: "coeff_vector".into(),
            modality: self.modality,
            max_order: self.max_order,
            ordering: COEFF_ORDERING.into(),
            count: self.values.len(),
        };
        let blob: Vec<f32> = self.values.iter().map(|&v| v as f32).collect();
        write_format(path, &header, &[&blob])
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, mut blobs): (CoeffHeader, Vec<Vec<f32>>) = read_format(path)?;
        if header.format_version != COEFF_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: header.format_version,
                expected: COEFF_FORMAT_VERSION,
            });
        }
        if header.ordering != COEFF_ORDERING {
            return Err(Error::Format(format!(
                "unknown coefficient ordering {:?}",
                header.ordering
            )));
        }
        let expected = coeff_len(header.modality, header.max_order);
        if header.count != expected {
            return Err(Error::Format(format!(
                "coefficient count {} does not match index set ({expected})",
                header.count
            )));
        }
        if blobs.len() != 1 {
            return Err(Error::Format(format!(
                "expected one coefficient blob, found {}",
                blobs.len()
            )));
        }
        let blob = blobs.pop().unwrap();
        if blob.len() != expected {
            return Err(Error::Format(format!(
                "coefficient blob has {} entries, expected {expected}",
                blob.len()
            )));
        }
        Self::new(
            header.modality,
            header.max_order,
            blob.into_iter().map(f64::from).collect(),
        )
    }
}

const COEFF_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CoeffHeader {
    format_version: u32,
    kind: String,
    modality: Modality,
    max_order: usize,
    ordering: String,
    count: usize,
}

/// Sensor trajectory sampled at a uniform timestep.
#[derive(Debug, Clone)]
pub struct Trajectory<P> {
    pub states: Vec<P>,
    pub dt: f64,
}

impl<P> Trajectory<P> {
    pub fn new(states: Vec<P>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidConfig(format!("timestep must be positive, got {dt}")));
        }
        Ok(Self { states, dt })
    }

    pub fn duration(&self) -> f64 {
        self.states.len() as f64 * self.dt
    }
}

fn position_axis(n: usize, max_order: usize) -> Vec<f64> {
    let mut axis = vec![0.0; (max_order + 1) * n];
    for k in 0..=max_order {
        for i in 0..n {
            axis[k * n + i] = (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos();
        }
    }
    axis
}

fn axis_square_sums(axis: &[f64], n: usize, max_order: usize) -> Vec<f64> {
    (0..=max_order)
        .map(|k| axis[k * n..(k + 1) * n].iter().map(|v| v * v).sum())
        .collect()
}

/// Separable cosine basis over the planar lattice.
#[derive(Debug, Clone)]
pub struct BasisR2 {
    grid: GridSpec,
    max_order: usize,
    axis: Vec<f64>,
    hk: Vec<f64>,
    measure: f64,
}

impl BasisR2 {
    pub fn new(grid: &GridSpec, max_order: usize) -> Result<Self> {
        if max_order >= grid.n() {
            return Err(Error::InvalidConfig(format!(
                "max order {} needs more than {} grid cells per side",
                max_order,
                grid.n()
            )));
        }
        let n = grid.n();
        let axis = position_axis(n, max_order);
        let sums = axis_square_sums(&axis, n, max_order);
        let measure = grid.cell_width() * grid.cell_width();
        let k = max_order + 1;
        let mut hk = vec![0.0; k * k];
        for k1 in 0..k {
            for k2 in 0..k {
                hk[k1 * k + k2] = (sums[k1] * sums[k2] * measure).sqrt();
            }
        }
        Ok(Self { grid: *grid, max_order, axis, hk, measure })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        (self.max_order + 1) * (self.max_order + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = MultiIndexR2> + '_ {
        let k = self.max_order + 1;
        (0..k).flat_map(move |k1| (0..k).map(move |k2| MultiIndexR2 { k1, k2 }))
    }

    /// Basis function value at an arbitrary pose.
    pub fn eval(&self, k: MultiIndexR2, pose: PoseR2) -> f64 {
        let l = self.grid.side_length();
        let raw = (PI * k.k1 as f64 * pose.north / l).cos()
            * (PI * k.k2 as f64 * pose.east / l).cos();
        raw / self.hk[k.k1 * (self.max_order + 1) + k.k2]
    }

    fn check_map(&self, map: &InfoMapR2) -> Result<()> {
        if map.n() != self.grid.n() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} map", self.grid.n()),
                actual: format!("{0}x{0}", map.n()),
            });
        }
        Ok(())
    }

    fn check_coeffs(&self, coeffs: &CoeffVector) -> Result<()> {
        if coeffs.modality != Modality::Bearing || coeffs.max_order != self.max_order {
            return Err(Error::IndexSetMismatch);
        }
        Ok(())
    }

    /// Project a normalized map onto the index set.
    pub fn decompose(&self, map: &InfoMapR2) -> Result<CoeffVector> {
        self.check_map(map)?;
        if !map.is_normalized() {
            let sum: f64 = map.values().iter().sum();
            return Err(Error::NotNormalized { sum });
        }
        let n = self.grid.n();
        let k = self.max_order + 1;
        let values = map.values();
        let mut coeffs = vec![0.0; k * k];
        for k1 in 0..k {
            let ax1 = &self.axis[k1 * n..(k1 + 1) * n];
            for k2 in 0..k {
                let ax2 = &self.axis[k2 * n..(k2 + 1) * n];
                let mut acc = 0.0;
                for i in 0..n {
                    let mut row_acc = 0.0;
                    for j in 0..n {
                        row_acc += values[i * n + j] * ax2[j];
                    }
                    acc += row_acc * ax1[i];
                }
                coeffs[k1 * k + k2] = acc / self.hk[k1 * k + k2];
            }
        }
        CoeffVector::new(Modality::Bearing, self.max_order, coeffs)
    }

    /// Synthesize per-cell mass values from coefficients, without the
    /// clamping/renormalization applied by [`BasisR2::reconstruct`].
    pub fn reconstruct_raw(&self, coeffs: &CoeffVector) -> Result<Vec<f64>> {
        self.check_coeffs(coeffs)?;
        let n = self.grid.n();
        let k = self.max_order + 1;
        let mut scaled = vec![0.0; k * k];
        for idx in 0..k * k {
            scaled[idx] = coeffs.values[idx] / self.hk[idx];
        }
        let mut out = vec![0.0; n * n];
        for k1 in 0..k {
            let ax1 = &self.axis[k1 * n..(k1 + 1) * n];
            for k2 in 0..k {
                let ax2 = &self.axis[k2 * n..(k2 + 1) * n];
                let c = scaled[k1 * k + k2];
                if c == 0.0 {
                    continue;
                }
                for i in 0..n {
                    let ci = c * ax1[i];
                    for j in 0..n {
                        out[i * n + j] += ci * ax2[j];
                    }
                }
            }
        }
        for v in &mut out {
            *v *= self.measure;
        }
        Ok(out)
    }

    /// Synthesize a distribution map: the raw reconstruction clamped at
    /// the floor and renormalized.
    pub fn reconstruct(&self, coeffs: &CoeffVector) -> Result<InfoMapR2> {
        let mut values = self.reconstruct_raw(coeffs)?;
        clamp_and_normalize(&mut values);
        let map = InfoMapR2::from_values(self.grid.n(), values)?;
        map.normalize()
    }

    /// Coefficients of a trajectory's empirical spatial distribution.
    pub fn trajectory_coeffs(&self, traj: &Trajectory<PoseR2>) -> Result<CoeffVector> {
        if traj.states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let count = traj.states.len() as f64;
        let k = self.max_order + 1;
        let mut coeffs = vec![0.0; k * k];
        for (pos, index) in self.indices().enumerate() {
            let mut acc = 0.0;
            for &state in &traj.states {
                acc += self.eval(index, state);
            }
            coeffs[pos] = acc / count;
        }
        CoeffVector::new(Modality::Bearing, self.max_order, coeffs)
    }
}

fn clamp_and_normalize(values: &mut [f64]) {
    for v in values.iter_mut() {
        if *v < RECONSTRUCTION_FLOOR {
            *v = RECONSTRUCTION_FLOOR;
        }
    }
    let sum: f64 = values.iter().sum();
    for v in values.iter_mut() {
        *v /= sum;
    }
}

/// Separable cosine-times-heading-harmonic basis over the
/// position-plus-heading lattice.
///
/// This stands in for the special-Euclidean harmonic basis of the wider
/// coverage-control literature: it is a complete orthogonal system on the
/// discrete lattice, supports exact round trips, and keeps the
/// coefficient-matching semantics of the spectral metric.
#[derive(Debug, Clone)]
pub struct BasisSe2 {
    grid: GridSpec,
    max_order: usize,
    axis: Vec<f64>,
    trig: Vec<f64>,
    hk: Vec<f64>,
    measure: f64,
}

impl BasisSe2 {
    pub fn new(grid: &GridSpec, max_order: usize) -> Result<Self> {
        if max_order >= grid.n() {
            return Err(Error::InvalidConfig(format!(
                "max order {} needs more than {} grid cells per side",
                max_order,
                grid.n()
            )));
        }
        let bins = grid.heading_bins();
        if 2 * max_order >= bins {
            return Err(Error::InvalidConfig(format!(
                "max order {max_order} needs more than {bins} heading bins"
            )));
        }
        let n = grid.n();
        let axis = position_axis(n, max_order);
        let pos_sums = axis_square_sums(&axis, n, max_order);

        let t_count = 2 * max_order + 1;
        let mut trig = vec![0.0; t_count * bins];
        for h in 0..bins {
            let angle = h as f64 * 2.0 * PI / bins as f64;
            trig[h] = 1.0; // zeroth harmonic, cosine
            for k3 in 1..=max_order {
                trig[(2 * k3 - 1) * bins + h] = (k3 as f64 * angle).cos();
                trig[(2 * k3) * bins + h] = (k3 as f64 * angle).sin();
            }
        }
        let trig_sums: Vec<f64> = (0..t_count)
            .map(|t| trig[t * bins..(t + 1) * bins].iter().map(|v| v * v).sum())
            .collect();

        let measure = grid.cell_width() * grid.cell_width() * 2.0 * PI / bins as f64;
        let k = max_order + 1;
        let mut hk = vec![0.0; k * k * t_count];
        for k1 in 0..k {
            for k2 in 0..k {
                for t in 0..t_count {
                    hk[(k1 * k + k2) * t_count + t] =
                        (pos_sums[k1] * pos_sums[k2] * trig_sums[t] * measure).sqrt();
                }
            }
        }
        Ok(Self { grid: *grid, max_order, axis, trig, hk, measure })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        coeff_len(Modality::Fov, self.max_order)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = MultiIndexSE2> + '_ {
        let k = self.max_order + 1;
        let t_count = 2 * self.max_order + 1;
        (0..k).flat_map(move |k1| {
            (0..k).flat_map(move |k2| {
                (0..t_count).map(move |t| {
                    let (k3, kind) = if t == 0 {
                        (0, HeadingKind::Cos)
                    } else if t % 2 == 1 {
                        ((t + 1) / 2, HeadingKind::Cos)
                    } else {
                        (t / 2, HeadingKind::Sin)
                    };
                    MultiIndexSE2 { k1, k2, k3, kind }
                })
            })
        })
    }

    /// Basis function value at an arbitrary pose.
    pub fn eval(&self, k: MultiIndexSE2, pose: PoseSE2) -> f64 {
        let l = self.grid.side_length();
        let heading_rad = pose.heading.to_radians();
        let trig = match k.kind {
            HeadingKind::Cos => (k.k3 as f64 * heading_rad).cos(),
            HeadingKind::Sin => (k.k3 as f64 * heading_rad).sin(),
        };
        let raw = (PI * k.k1 as f64 * pose.north / l).cos()
            * (PI * k.k2 as f64 * pose.east / l).cos()
            * trig;
        let t = trig_slot(k.k3, k.kind);
        let kk = self.max_order + 1;
        raw / self.hk[(k.k1 * kk + k.k2) * (2 * self.max_order + 1) + t]
    }

    fn check_map(&self, map: &InfoMapSE2) -> Result<()> {
        if map.n() != self.grid.n() || map.heading_bins() != self.grid.heading_bins() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0}x{1} map", self.grid.n(), self.grid.heading_bins()),
                actual: format!("{0}x{0}x{1}", map.n(), map.heading_bins()),
            });
        }
        Ok(())
    }

    fn check_coeffs(&self, coeffs: &CoeffVector) -> Result<()> {
        if coeffs.modality != Modality::Fov || coeffs.max_order != self.max_order {
            return Err(Error::IndexSetMismatch);
        }
        Ok(())
    }

    /// Project a normalized map onto the index set.
    ///
    /// Factored over the separable axes: heading first, then east, then
    /// north, so the cost is far below one basis evaluation per
    /// (coefficient, state) pair.
    pub fn decompose(&self, map: &InfoMapSE2) -> Result<CoeffVector> {
        self.check_map(map)?;
        if !map.is_normalized() {
            let sum: f64 = map.values().iter().sum();
            return Err(Error::NotNormalized { sum });
        }
        let n = self.grid.n();
        let bins = self.grid.heading_bins();
        let k = self.max_order + 1;
        let t_count = 2 * self.max_order + 1;
        let values = map.values();

        // A[t][i*n+j] = sum_h v[(i*n+j)*H + h] * trig[t][h]
        let cells = n * n;
        let mut stage_a = vec![0.0; t_count * cells];
        for cell in 0..cells {
            let row = &values[cell * bins..(cell + 1) * bins];
            for t in 0..t_count {
                let trig_row = &self.trig[t * bins..(t + 1) * bins];
                let mut acc = 0.0;
                for h in 0..bins {
                    acc += row[h] * trig_row[h];
                }
                stage_a[t * cells + cell] = acc;
            }
        }

        // B[t][k2][i] = sum_j A[t][i*n+j] * axis[k2][j]
        let mut stage_b = vec![0.0; t_count * k * n];
        for t in 0..t_count {
            for k2 in 0..k {
                let ax2 = &self.axis[k2 * n..(k2 + 1) * n];
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += stage_a[t * cells + i * n + j] * ax2[j];
                    }
                    stage_b[(t * k + k2) * n + i] = acc;
                }
            }
        }

        // coeff[(k1,k2,t)] = sum_i B[t][k2][i] * axis[k1][i] / h_k
        let mut coeffs = vec![0.0; k * k * t_count];
        for k1 in 0..k {
            let ax1 = &self.axis[k1 * n..(k1 + 1) * n];
            for k2 in 0..k {
                for t in 0..t_count {
                    let b_row = &stage_b[(t * k + k2) * n..(t * k + k2 + 1) * n];
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += b_row[i] * ax1[i];
                    }
                    let idx = (k1 * k + k2) * t_count + t;
                    coeffs[idx] = acc / self.hk[idx];
                }
            }
        }
        CoeffVector::new(Modality::Fov, self.max_order, coeffs)
    }

    /// Synthesize per-state mass values from coefficients, without
    /// clamping or renormalization.
    pub fn reconstruct_raw(&self, coeffs: &CoeffVector) -> Result<Vec<f64>> {
        self.check_coeffs(coeffs)?;
        let n = self.grid.n();
        let bins = self.grid.heading_bins();
        let k = self.max_order + 1;
        let t_count = 2 * self.max_order + 1;
        let cells = n * n;

        let mut scaled = vec![0.0; k * k * t_count];
        for idx in 0..scaled.len() {
            scaled[idx] = coeffs.values[idx] / self.hk[idx];
        }

        // B'[t][k2][i] = sum_k1 scaled[(k1,k2,t)] * axis[k1][i]
        let mut stage_b = vec![0.0; t_count * k * n];
        for k1 in 0..k {
            let ax1 = &self.axis[k1 * n..(k1 + 1) * n];
            for k2 in 0..k {
                for t in 0..t_count {
                    let c = scaled[(k1 * k + k2) * t_count + t];
                    if c == 0.0 {
                        continue;
                    }
                    let b_row = &mut stage_b[(t * k + k2) * n..(t * k + k2 + 1) * n];
                    for i in 0..n {
                        b_row[i] += c * ax1[i];
                    }
                }
            }
        }

        // A'[t][i*n+j] = sum_k2 B'[t][k2][i] * axis[k2][j]
        let mut stage_a = vec![0.0; t_count * cells];
        for t in 0..t_count {
            for k2 in 0..k {
                let ax2 = &self.axis[k2 * n..(k2 + 1) * n];
                for i in 0..n {
                    let b = stage_b[(t * k + k2) * n + i];
                    if b == 0.0 {
                        continue;
                    }
                    let a_row = &mut stage_a[t * cells + i * n..t * cells + (i + 1) * n];
                    for j in 0..n {
                        a_row[j] += b * ax2[j];
                    }
                }
            }
        }

        // out[(i*n+j)*H + h] = mu * sum_t A'[t][i*n+j] * trig[t][h]
        let mut out = vec![0.0; cells * bins];
        for cell in 0..cells {
            let slot = &mut out[cell * bins..(cell + 1) * bins];
            for t in 0..t_count {
                let a = stage_a[t * cells + cell];
                if a == 0.0 {
                    continue;
                }
                let trig_row = &self.trig[t * bins..(t + 1) * bins];
                for h in 0..bins {
                    slot[h] += a * trig_row[h];
                }
            }
        }
        for v in &mut out {
            *v *= self.measure;
        }
        Ok(out)
    }

    /// Synthesize a distribution map: the raw reconstruction clamped at
    /// the floor and renormalized.
    pub fn reconstruct(&self, coeffs: &CoeffVector) -> Result<InfoMapSE2> {
        let mut values = self.reconstruct_raw(coeffs)?;
        clamp_and_normalize(&mut values);
        let map = InfoMapSE2::from_values(self.grid.n(), self.grid.heading_bins(), values)?;
        map.normalize()
    }

    /// Coefficients of a trajectory's empirical distribution over
    /// position and heading.
    pub fn trajectory_coeffs(&self, traj: &Trajectory<PoseSE2>) -> Result<CoeffVector> {
        if traj.states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let count = traj.states.len() as f64;
        let mut coeffs = vec![0.0; self.len()];
        for (pos, index) in self.indices().enumerate() {
            let mut acc = 0.0;
            for &state in &traj.states {
                acc += self.eval(index, state);
            }
            coeffs[pos] = acc / count;
        }
        CoeffVector::new(Modality::Fov, self.max_order, coeffs)
    }
}

fn trig_slot(k3: usize, kind: HeadingKind) -> usize {
    match (k3, kind) {
        (0, _) => 0,
        (k3, HeadingKind::Cos) => 2 * k3 - 1,
        (k3, HeadingKind::Sin) => 2 * k3,
    }
}

/// Spectral coverage metric: `sum_k Lambda_k (c_k - phi_k)^2` with
/// `Lambda_k = (1 + ||k||^2)^(-(d + 1) / 2)` favoring low frequencies,
/// `d` the state-space dimension.
pub fn ergodic_metric(c: &CoeffVector, phi: &CoeffVector) -> Result<f64> {
    if c.modality != phi.modality || c.max_order != phi.max_order {
        return Err(Error::IndexSetMismatch);
    }
    let weights = lambda_weights(c.modality, c.max_order);
    let mut acc = 0.0;
    for ((&a, &b), &w) in c.values.iter().zip(&phi.values).zip(&weights) {
        let d = a - b;
        acc += w * d * d;
    }
    Ok(acc)
}

/// Low-frequency weights for the coverage metric, in enumeration order.
pub fn lambda_weights(modality: Modality, max_order: usize) -> Vec<f64> {
    let k = max_order + 1;
    match modality {
        Modality::Bearing => {
            let mut w = Vec::with_capacity(k * k);
            for k1 in 0..k {
                for k2 in 0..k {
                    let norm2 = (k1 * k1 + k2 * k2) as f64;
                    w.push((1.0 + norm2).powf(-1.5));
                }
            }
            w
        }
        Modality::Fov => {
            let t_count = 2 * max_order + 1;
            let mut w = Vec::with_capacity(k * k * t_count);
            for k1 in 0..k {
                for k2 in 0..k {
                    for t in 0..t_count {
                        let k3 = (t + 1) / 2;
                        let norm2 = (k1 * k1 + k2 * k2 + k3 * k3) as f64;
                        w.push((1.0 + norm2).powf(-2.0));
                    }
                }
            }
            w
        }
    }
}
