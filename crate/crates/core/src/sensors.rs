//! Measurement likelihood models and sampling for the two sensor
//! modalities, plus dense precomputed likelihood tables.
//!
//! Both models expose `P(z | x, theta)` over a discrete measurement set:
//! the bearing sensor over the 36 bearings {0, 10, ..., 350} degrees, the
//! FOV sensor over {0, 1}. A [`LikelihoodTable`] caches every probability
//! over (sensor state, target cell, measurement) so that map generation
//! never calls the trigonometric measurement functions.

use crate::grid::{true_bearing, wrap_angle_diff, GridSpec, PoseR2, PoseSE2, TargetCell};
use crate::{Error, Modality, Result};
use rand::Rng;

/// Number of discrete bearing measurements, spaced 10 degrees apart.
pub const BEARING_Z_COUNT: usize = 36;

/// Spacing of the discrete bearing measurements in degrees.
pub const BEARING_Z_STEP: f64 = 10.0;

/// Default table budget: 1 GiB, enough for both modalities on the default
/// 28-cell grid (bearing ~177 MB, FOV ~354 MB).
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 30;

/// Common interface over the two measurement models.
///
/// `likelihood_row` fills `P(z | pose, cell)` for every measurement in the
/// modality's discrete domain; rows always sum to one. Sensor states are
/// enumerated by `state_at` in the same order the information maps are laid
/// out, so a flat state index is shared between tables and maps.
pub trait SensorModel {
    type Pose: Copy + std::fmt::Debug;

    fn modality(&self) -> Modality;
    fn z_count(&self) -> usize;
    fn likelihood_row(&self, grid: &GridSpec, pose: Self::Pose, cell: TargetCell, out: &mut [f64]);
    fn state_count(&self, grid: &GridSpec) -> usize;
    fn state_at(&self, grid: &GridSpec, index: usize) -> Self::Pose;
}

/// Bearing-only sensor: the measured bearing is the true bearing plus
/// zero-mean Gaussian noise, discretized onto the 36-value domain and
/// renormalized to a probability mass function.
#[derive(Debug, Clone, Copy)]
pub struct BearingSensor {
    sigma_deg: f64,
}

impl BearingSensor {
    pub fn new(sigma_deg: f64) -> Result<Self> {
        if !(sigma_deg > 0.0) || !sigma_deg.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "bearing noise sigma must be positive, got {sigma_deg}"
            )));
        }
        Ok(Self { sigma_deg })
    }

    pub fn sigma_deg(&self) -> f64 {
        self.sigma_deg
    }

    /// The discrete measurement domain {0, 10, ..., 350} degrees.
    pub fn z_domain() -> impl Iterator<Item = f64> {
        (0..BEARING_Z_COUNT).map(|k| k as f64 * BEARING_Z_STEP)
    }

    /// Index of a measurement value within the discrete domain.
    pub fn z_index(z_deg: f64) -> Result<usize> {
        let idx = (z_deg / BEARING_Z_STEP).round() as isize;
        if idx < 0 || idx >= BEARING_Z_COUNT as isize {
            return Err(Error::MeasurementOutsideDomain { z: z_deg });
        }
        let idx = idx as usize;
        if (z_deg - idx as f64 * BEARING_Z_STEP).abs() > 1e-9 {
            return Err(Error::MeasurementOutsideDomain { z: z_deg });
        }
        Ok(idx)
    }

    /// `P(z | x, theta)` for a measurement in the discrete domain.
    pub fn likelihood(
        &self,
        grid: &GridSpec,
        z_deg: f64,
        x: PoseR2,
        cell: TargetCell,
    ) -> Result<f64> {
        let idx = Self::z_index(z_deg)?;
        grid.cell_center(cell)?;
        let mut row = [0.0; BEARING_Z_COUNT];
        self.likelihood_row(grid, x, cell, &mut row);
        Ok(row[idx])
    }
}

impl Default for BearingSensor {
    /// Noise standard deviation of 10 degrees, matching the measurement
    /// spacing.
    fn default() -> Self {
        Self { sigma_deg: 10.0 }
    }
}

impl SensorModel for BearingSensor {
    type Pose = PoseR2;

    fn modality(&self) -> Modality {
        Modality::Bearing
    }

    fn z_count(&self) -> usize {
        BEARING_Z_COUNT
    }

    fn likelihood_row(&self, grid: &GridSpec, pose: PoseR2, cell: TargetCell, out: &mut [f64]) {
        debug_assert_eq!(out.len(), BEARING_Z_COUNT);
        let center = grid.cell_center_unchecked(cell);
        let (beta, coincident) = true_bearing(pose, center);
        if coincident {
            out.fill(1.0 / BEARING_Z_COUNT as f64);
            return;
        }
        let denom = 2.0 * self.sigma_deg * self.sigma_deg;
        let mut sum = 0.0;
        for (k, slot) in out.iter_mut().enumerate() {
            let delta = wrap_angle_diff(k as f64 * BEARING_Z_STEP, beta);
            let w = (-delta * delta / denom).exp();
            *slot = w;
            sum += w;
        }
        for slot in out.iter_mut() {
            *slot /= sum;
        }
    }

    fn state_count(&self, grid: &GridSpec) -> usize {
        grid.num_cells()
    }

    fn state_at(&self, grid: &GridSpec, index: usize) -> PoseR2 {
        let (north, east) = grid.cell_center_unchecked(grid.cell_at(index));
        PoseR2 { north, east }
    }
}

/// Field-of-view sensor: two directional antennas report which received the
/// stronger signal, so measurements are binary. The response probability
/// depends on where the target bearing falls relative to the heading:
/// front cone (within 60 degrees, closed), rear cone (unsigned offset in
/// [120, 240], closed), or side.
#[derive(Debug, Clone, Copy)]
pub struct FovSensor {
    p_front: f64,
    p_rear: f64,
    p_side: f64,
}

impl FovSensor {
    pub fn new(p_front: f64, p_rear: f64, p_side: f64) -> Result<Self> {
        for (name, p) in [("p_front", p_front), ("p_rear", p_rear), ("p_side", p_side)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1), got {p}"
                )));
            }
        }
        Ok(Self { p_front, p_rear, p_side })
    }

    /// `P(z = 1 | x, theta)`.
    pub fn detect_probability(&self, grid: &GridSpec, x: PoseSE2, cell: TargetCell) -> f64 {
        let center = grid.cell_center_unchecked(cell);
        let (beta, coincident) = true_bearing(x.position(), center);
        if coincident {
            return self.p_side;
        }
        if wrap_angle_diff(beta, x.heading).abs() <= 60.0 {
            self.p_front
        } else {
            let unsigned = (beta - x.heading).rem_euclid(360.0);
            if (120.0..=240.0).contains(&unsigned) {
                self.p_rear
            } else {
                self.p_side
            }
        }
    }

    /// `P(z | x, theta)` for `z` in {0, 1}.
    pub fn likelihood(&self, grid: &GridSpec, z: usize, x: PoseSE2, cell: TargetCell) -> f64 {
        debug_assert!(z < 2);
        let p1 = self.detect_probability(grid, x, cell);
        if z == 1 {
            p1
        } else {
            1.0 - p1
        }
    }
}

impl Default for FovSensor {
    /// Front 0.9, rear 0.1, side 0.5.
    fn default() -> Self {
        Self { p_front: 0.9, p_rear: 0.1, p_side: 0.5 }
    }
}

impl SensorModel for FovSensor {
    type Pose = PoseSE2;

    fn modality(&self) -> Modality {
        Modality::Fov
    }

    fn z_count(&self) -> usize {
        2
    }

    fn likelihood_row(&self, grid: &GridSpec, pose: PoseSE2, cell: TargetCell, out: &mut [f64]) {
        debug_assert_eq!(out.len(), 2);
        let p1 = self.detect_probability(grid, pose, cell);
        out[0] = 1.0 - p1;
        out[1] = p1;
    }

    fn state_count(&self, grid: &GridSpec) -> usize {
        grid.num_se2_states()
    }

    fn state_at(&self, grid: &GridSpec, index: usize) -> PoseSE2 {
        let bins = grid.heading_bins();
        let cell_flat = index / bins;
        let bin = index % bins;
        let (north, east) = grid.cell_center_unchecked(grid.cell_at(cell_flat));
        PoseSE2 { north, east, heading: bin as f64 * 360.0 / bins as f64 }
    }
}

/// Draw a measurement index from the model's discrete distribution.
pub fn sample<S: SensorModel, R: Rng>(
    sensor: &S,
    grid: &GridSpec,
    pose: S::Pose,
    cell: TargetCell,
    rng: &mut R,
) -> usize {
    let mut row = vec![0.0; sensor.z_count()];
    sensor.likelihood_row(grid, pose, cell, &mut row);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    row.len() - 1
}

/// Dense cache of `P(z | x, theta)` over every sensor state, measurement,
/// and target cell.
///
/// Layout is `[state][z][theta]` with the target axis innermost, so the
/// predictive-probability loop of map generation reads stride-1 rows.
#[derive(Debug)]
pub struct LikelihoodTable {
    modality: Modality,
    grid: GridSpec,
    z_count: usize,
    theta_count: usize,
    state_count: usize,
    probs: Vec<f64>,
}

impl LikelihoodTable {
    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn z_count(&self) -> usize {
        self.z_count
    }

    pub fn theta_count(&self) -> usize {
        self.theta_count
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    /// `P(z | state, .)` over all target cells, stride-1.
    #[inline]
    pub fn row(&self, state: usize, z: usize) -> &[f64] {
        let base = (state * self.z_count + z) * self.theta_count;
        &self.probs[base..base + self.theta_count]
    }

    #[inline]
    pub fn prob(&self, state: usize, z: usize, theta: usize) -> f64 {
        self.probs[(state * self.z_count + z) * self.theta_count + theta]
    }

    pub fn memory_bytes(&self) -> u64 {
        (self.probs.len() * std::mem::size_of::<f64>()) as u64
    }

    pub fn matches(&self, grid: &GridSpec, modality: Modality) -> bool {
        self.modality == modality && self.grid == *grid
    }
}

/// Build the dense likelihood table for a sensor on a grid, using the
/// default memory budget.
pub fn build_table<S: SensorModel>(sensor: &S, grid: &GridSpec) -> Result<LikelihoodTable> {
    build_table_with_budget(sensor, grid, DEFAULT_TABLE_BUDGET)
}

/// Build the dense likelihood table, rejecting grids whose table would
/// exceed `budget_bytes`.
pub fn build_table_with_budget<S: SensorModel>(
    sensor: &S,
    grid: &GridSpec,
    budget_bytes: u64,
) -> Result<LikelihoodTable> {
    let state_count = sensor.state_count(grid);
    let z_count = sensor.z_count();
    let theta_count = grid.num_cells();
    let entries = state_count as u64 * z_count as u64 * theta_count as u64;
    let required = entries * std::mem::size_of::<f64>() as u64;
    if required > budget_bytes {
        return Err(Error::TableBudgetExceeded { required, budget: budget_bytes });
    }

    let mut probs = vec![0.0; entries as usize];
    let mut row = vec![0.0; z_count];
    for state in 0..state_count {
        let pose = sensor.state_at(grid, state);
        for theta in 0..theta_count {
            sensor.likelihood_row(grid, pose, grid.cell_at(theta), &mut row);
            for (z, &p) in row.iter().enumerate() {
                probs[(state * z_count + z) * theta_count + theta] = p;
            }
        }
    }

    Ok(LikelihoodTable {
        modality: sensor.modality(),
        grid: *grid,
        z_count,
        theta_count,
        state_count,
        probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid8() -> GridSpec {
        GridSpec::new(200.0, 8, 4).unwrap()
    }

    #[test]
    fn bearing_row_peaks_at_true_bearing() {
        // Geometry with the true bearing exactly on a domain value (due
        // north): the mode of the symmetric kernel sits there.
        let g = GridSpec::new(200.0, 2, 1).unwrap();
        let s = BearingSensor::default();
        let x = PoseR2::new(50.0, 50.0);
        let cell = TargetCell::new(1, 0); // center (150, 50): bearing 0
        let mut row = [0.0; BEARING_Z_COUNT];
        s.likelihood_row(&g, x, cell, &mut row);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for &p in &row[1..] {
            assert!(row[0] > p);
        }
    }

    #[test]
    fn bearing_kernel_ratio_before_normalization() {
        // sigma = 10 and beta = 0: P(z=0)/P(z=10) = exp(0.5) since the
        // normalizer cancels in the ratio.
        let g = GridSpec::new(200.0, 2, 1).unwrap();
        let s = BearingSensor::new(10.0).unwrap();
        // Target due north of the sensor: beta = 0 exactly.
        let x = PoseR2::new(50.0, 50.0);
        let cell = TargetCell::new(1, 0); // center (150, 50)
        let mut row = [0.0; BEARING_Z_COUNT];
        s.likelihood_row(&g, x, cell, &mut row);
        let ratio = row[0] / row[1];
        assert!((ratio - 0.5f64.exp()).abs() < 1e-12, "ratio {ratio}");
    }

    #[test]
    fn bearing_likelihood_validates_domain() {
        let g = grid8();
        let s = BearingSensor::default();
        let x = PoseR2::new(10.0, 10.0);
        let cell = TargetCell::new(4, 4);
        assert!(s.likelihood(&g, 40.0, x, cell).is_ok());
        assert!(s.likelihood(&g, 45.0, x, cell).is_err());
        assert!(s.likelihood(&g, 360.0, x, cell).is_err());
        assert!(s.likelihood(&g, -10.0, x, cell).is_err());
    }

    #[test]
    fn bearing_coincident_is_uniform() {
        let g = grid8();
        let s = BearingSensor::default();
        let cell = TargetCell::new(3, 5);
        let (n, e) = g.cell_center(cell).unwrap();
        let mut row = [0.0; BEARING_Z_COUNT];
        s.likelihood_row(&g, PoseR2::new(n, e), cell, &mut row);
        for &p in &row {
            assert_eq!(p, 1.0 / 36.0);
        }
    }

    #[test]
    fn bearing_depends_only_on_bearing() {
        // Two sensor/target pairs with the same bearing give identical rows.
        let g = GridSpec::new(200.0, 8, 1).unwrap();
        let s = BearingSensor::default();
        let mut a = [0.0; BEARING_Z_COUNT];
        let mut b = [0.0; BEARING_Z_COUNT];
        // Both pairs are due east at different ranges.
        s.likelihood_row(&g, PoseR2::new(12.5, 12.5), TargetCell::new(0, 3), &mut a);
        s.likelihood_row(&g, PoseR2::new(12.5, 12.5), TargetCell::new(0, 7), &mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn fov_cone_probabilities() {
        let g = GridSpec::new(200.0, 2, 4).unwrap();
        let s = FovSensor::default();
        // Sensor at the (0,0) cell center looking north; target due north.
        let x = PoseSE2::new(50.0, 50.0, 0.0);
        let front = TargetCell::new(1, 0); // bearing 0
        assert_eq!(s.likelihood(&g, 1, x, front), 0.9);
        // Looking south instead: unsigned offset 180 -> rear.
        let x_south = PoseSE2::new(50.0, 50.0, 180.0);
        assert_eq!(s.likelihood(&g, 1, x_south, front), 0.1);
        // Looking east: offset 90 -> side.
        let x_east = PoseSE2::new(50.0, 50.0, 90.0);
        assert_eq!(s.likelihood(&g, 1, x_east, front), 0.5);
        // Complement.
        assert_eq!(s.likelihood(&g, 0, x, front), 1.0 - 0.9);
    }

    #[test]
    fn fov_cone_boundaries_are_closed() {
        let g = GridSpec::new(200.0, 4, 8).unwrap();
        let s = FovSensor::default();
        let cell = TargetCell::new(3, 1);
        let (bn, be) = g.cell_center(cell).unwrap();
        // Place the sensor so the bearing is exactly 0, then steer the
        // heading to hit the interval endpoints exactly.
        let x = |heading: f64| PoseSE2::new(bn - 50.0, be, heading);
        assert_eq!(s.detect_probability(&g, x(300.0), cell), 0.9); // diff +60
        assert_eq!(s.detect_probability(&g, x(60.0), cell), 0.9); // diff -60
        assert_eq!(s.detect_probability(&g, x(240.0), cell), 0.1); // unsigned 120
        assert_eq!(s.detect_probability(&g, x(120.0), cell), 0.1); // unsigned 240
        assert_eq!(s.detect_probability(&g, x(61.0), cell), 0.5);
        assert_eq!(s.detect_probability(&g, x(119.0), cell), 0.5);
    }

    #[test]
    fn fov_heading_wraps_mod_360() {
        let g = GridSpec::new(200.0, 4, 8).unwrap();
        let s = FovSensor::default();
        let cell = TargetCell::new(3, 3);
        for heading in [0.0, 37.0, 180.0, 272.5] {
            let a = s.detect_probability(&g, PoseSE2::new(30.0, 30.0, heading), cell);
            let b = s.detect_probability(&g, PoseSE2::new(30.0, 30.0, heading + 360.0), cell);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fov_coincident_is_half() {
        let g = grid8();
        let s = FovSensor::default();
        let cell = TargetCell::new(2, 2);
        let (n, e) = g.cell_center(cell).unwrap();
        assert_eq!(s.detect_probability(&g, PoseSE2::new(n, e, 45.0), cell), 0.5);
    }

    #[test]
    fn rows_sum_to_one_for_random_pairs() {
        let g = grid8();
        let bearing = BearingSensor::default();
        let fov = FovSensor::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut brow = [0.0; BEARING_Z_COUNT];
        let mut frow = [0.0; 2];
        for _ in 0..200 {
            let pose = PoseR2::new(rng.gen::<f64>() * 200.0, rng.gen::<f64>() * 200.0);
            let cell = TargetCell::new(rng.gen_range(0..8), rng.gen_range(0..8));
            bearing.likelihood_row(&g, pose, cell, &mut brow);
            assert!((brow.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let se2 = PoseSE2::new(pose.north, pose.east, rng.gen::<f64>() * 360.0);
            fov.likelihood_row(&g, se2, cell, &mut frow);
            assert!((frow.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sampling_matches_fov_probabilities() {
        let g = GridSpec::new(200.0, 2, 4).unwrap();
        let s = FovSensor::default();
        let x = PoseSE2::new(50.0, 50.0, 0.0);
        let front = TargetCell::new(1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let ones: usize = (0..draws)
            .map(|_| sample(&s, &g, x, front, &mut rng))
            .sum();
        let freq = ones as f64 / draws as f64;
        assert!((freq - 0.9).abs() < 0.01, "empirical {freq}");
    }

    #[test]
    fn sampling_degenerate_bearing_kernel() {
        let g = GridSpec::new(200.0, 2, 1).unwrap();
        let s = BearingSensor::new(0.01).unwrap();
        let x = PoseR2::new(50.0, 50.0);
        let cell = TargetCell::new(1, 0); // due north: beta = 0
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(sample(&s, &g, x, cell, &mut rng), 0);
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let g = grid8();
        let s = BearingSensor::default();
        let x = PoseR2::new(30.0, 90.0);
        let cell = TargetCell::new(6, 1);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| sample(&s, &g, x, cell, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn table_matches_pointwise_exhaustively() {
        let g = grid8();
        let s = BearingSensor::default();
        let table = build_table(&s, &g).unwrap();
        let mut row = [0.0; BEARING_Z_COUNT];
        for state in 0..table.state_count() {
            let pose = s.state_at(&g, state);
            for theta in 0..table.theta_count() {
                s.likelihood_row(&g, pose, g.cell_at(theta), &mut row);
                for (z, &p) in row.iter().enumerate() {
                    assert_eq!(table.prob(state, z, theta), p);
                }
            }
        }
    }

    #[test]
    fn fov_table_matches_pointwise_exhaustively() {
        let g = GridSpec::new(200.0, 4, 6).unwrap();
        let s = FovSensor::default();
        let table = build_table(&s, &g).unwrap();
        let mut row = [0.0; 2];
        for state in 0..table.state_count() {
            let pose = s.state_at(&g, state);
            for theta in 0..table.theta_count() {
                s.likelihood_row(&g, pose, g.cell_at(theta), &mut row);
                assert_eq!(table.prob(state, 0, theta), row[0]);
                assert_eq!(table.prob(state, 1, theta), row[1]);
            }
        }
    }

    #[test]
    fn table_rows_sum_to_one() {
        let g = grid8();
        let table = build_table(&BearingSensor::default(), &g).unwrap();
        for state in 0..table.state_count() {
            for theta in 0..table.theta_count() {
                let sum: f64 = (0..table.z_count())
                    .map(|z| table.prob(state, z, theta))
                    .sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn table_budget_is_enforced() {
        let g = GridSpec::default();
        let err = build_table_with_budget(&BearingSensor::default(), &g, 1024).unwrap_err();
        match err {
            Error::TableBudgetExceeded { required, budget } => {
                assert_eq!(budget, 1024);
                assert_eq!(required, (28u64 * 28).pow(2) * 36 * 8);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
