//! Evaluation: KL-divergence quality reports comparing network outputs to
//! exact computation, wall-clock benchmarks of exact versus network map
//! generation, and map rendering to PGM or CSV.

use crate::grid::{Belief, GridSpec};
use crate::infomap::{InfoMapR2, InfoMapSE2};
use crate::neural::{channels_to_heading_major, Network, WeightsHeader};
use crate::sim::{EpisodeConfig, SimWorld};
use crate::spectral::CoeffVector;
use crate::{Error, Metric, Modality, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::hint::black_box;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// KL divergence `D(P || Q)` in nats.
///
/// Both inputs must sum to one within 1e-6. `Q` is floored at 1e-12 and
/// renormalized (inside the log ratio, so bit-identical inputs give
/// exactly zero); tiny negative rounding residue is clamped to zero.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} entries", p.len()),
            actual: format!("{}", q.len()),
        });
    }
    let sum_p: f64 = p.iter().sum();
    if (sum_p - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { sum: sum_p });
    }
    let sum_q_raw: f64 = q.iter().sum();
    if (sum_q_raw - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { sum: sum_q_raw });
    }
    const FLOOR: f64 = 1e-12;
    // The floor and renormalization are folded into the log ratio, with
    // both sides floored by the same rule, so bit-identical inputs
    // produce exactly zero.
    let mut sum_q = 0.0;
    for &v in q {
        sum_q += v.max(FLOOR);
    }
    let mut sum_pf = 0.0;
    for &v in p {
        sum_pf += v.max(FLOOR);
    }
    let mut acc = 0.0;
    for (&pv, &qv) in p.iter().zip(q) {
        if pv > 0.0 {
            let p_floored = pv.max(FLOOR);
            let q_floored = qv.max(FLOOR);
            acc += (pv / sum_p) * ((p_floored * sum_q) / (q_floored * sum_pf)).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// Anything that predicts an information map from a belief. Outputs use
/// the map layout (heading innermost for the FOV modality) and should sum
/// to approximately one.
pub trait MapApproximator {
    fn modality(&self) -> Modality;
    fn metric(&self) -> Metric;
    fn approx_map(&self, belief: &Belief) -> Result<Vec<f64>>;
}

/// Anything that predicts a coefficient vector from a belief.
pub trait CoeffApproximator {
    fn modality(&self) -> Modality;
    fn metric(&self) -> Metric;
    fn max_order(&self) -> usize;
    fn approx_coeffs(&self, belief: &Belief) -> Result<Vec<f64>>;
}

/// Map network plus metadata, as loaded from a weights file.
pub struct NetMapApproximator {
    pub net: Network<f32>,
    pub grid: GridSpec,
    pub modality: Modality,
    pub metric: Metric,
}

impl NetMapApproximator {
    pub fn from_parts(net: Network<f32>, header: &WeightsHeader) -> Self {
        Self { net, grid: header.grid, modality: header.modality, metric: header.metric }
    }
}

impl MapApproximator for NetMapApproximator {
    fn modality(&self) -> Modality {
        self.modality
    }

    fn metric(&self) -> Metric {
        self.metric
    }

    fn approx_map(&self, belief: &Belief) -> Result<Vec<f64>> {
        let out = self.net.forward_belief(belief)?;
        let values: Vec<f64> = out.data().iter().map(|&v| v as f64).collect();
        Ok(match self.modality {
            Modality::Bearing => values,
            Modality::Fov => {
                channels_to_heading_major(&values, self.grid.n(), self.grid.heading_bins())
            }
        })
    }
}

/// Coefficient network plus metadata.
pub struct NetCoeffApproximator {
    pub net: Network<f32>,
    pub modality: Modality,
    pub metric: Metric,
    pub k_order: usize,
}

impl NetCoeffApproximator {
    pub fn from_parts(net: Network<f32>, header: &WeightsHeader) -> Self {
        Self { net, modality: header.modality, metric: header.metric, k_order: header.k_order }
    }
}

impl CoeffApproximator for NetCoeffApproximator {
    fn modality(&self) -> Modality {
        self.modality
    }

    fn metric(&self) -> Metric {
        self.metric
    }

    fn max_order(&self) -> usize {
        self.k_order
    }

    fn approx_coeffs(&self, belief: &Belief) -> Result<Vec<f64>> {
        let out = self.net.forward_belief(belief)?;
        Ok(out.data().iter().map(|&v| v as f64).collect())
    }
}

/// Quality-evaluation run parameters.
#[derive(Debug, Clone)]
pub struct QualityConfig {
    pub grid: GridSpec,
    pub modality: Modality,
    pub metric: Metric,
    pub episodes: usize,
    pub steps: usize,
    pub seed: u64,
    pub k_order: usize,
    pub sigma_deg: f64,
}

impl QualityConfig {
    pub fn new(grid: GridSpec, modality: Modality, metric: Metric, seed: u64) -> Result<Self> {
        let base = EpisodeConfig::new(&grid, modality, metric, seed)?;
        Ok(Self {
            grid,
            modality,
            metric,
            episodes: 100,
            steps: base.steps,
            seed,
            k_order: base.k_order,
            sigma_deg: base.sigma_deg,
        })
    }

    fn episode_config(&self) -> Result<EpisodeConfig> {
        let mut cfg = EpisodeConfig::new(&self.grid, self.modality, self.metric, self.seed)?;
        cfg.steps = self.steps;
        cfg.k_order = self.k_order;
        cfg.sigma_deg = self.sigma_deg;
        Ok(cfg)
    }
}

/// Mean divergences at one step index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDivergences {
    pub step: usize,
    /// D(exact map || network map).
    pub map_net: f64,
    /// D(reconstruction from exact coefficients || reconstruction from
    /// network coefficients).
    pub coeff_net: f64,
    /// D(exact map || reconstruction from exact coefficients).
    pub truncation: f64,
}

/// Quality report: per-step means over fresh greedy episodes, plus the
/// grand means.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    pub modality: Modality,
    pub metric: Metric,
    pub episodes: usize,
    pub steps: usize,
    pub seed: u64,
    pub k_order: usize,
    pub per_step: Vec<StepDivergences>,
    pub mean_map_net: f64,
    pub mean_coeff_net: f64,
    pub mean_truncation: f64,
}

/// If a distribution is off normalization by more than the KL
/// precondition (32-bit softmax drift), renormalize it; otherwise leave
/// the values untouched.
fn ensure_normalized(mut values: Vec<f64>) -> Vec<f64> {
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-6 && sum > 0.0 {
        for v in &mut values {
            *v /= sum;
        }
    }
    values
}

/// Run fresh greedy episodes and compare network predictions against the
/// exact pipeline, step by step.
pub fn evaluate_quality(
    map_net: &dyn MapApproximator,
    coeff_net: &dyn CoeffApproximator,
    cfg: &QualityConfig,
) -> Result<QualityReport> {
    if map_net.modality() != cfg.modality || coeff_net.modality() != cfg.modality {
        return Err(Error::InvalidConfig(
            "network modality does not match the evaluation config".into(),
        ));
    }
    if map_net.metric() != cfg.metric || coeff_net.metric() != cfg.metric {
        return Err(Error::InvalidConfig(
            "network metric does not match the evaluation config".into(),
        ));
    }
    if coeff_net.max_order() != cfg.k_order {
        return Err(Error::IndexSetMismatch);
    }
    if cfg.episodes == 0 {
        return Err(Error::InvalidConfig("at least one evaluation episode".into()));
    }

    let base = cfg.episode_config()?;
    let world = SimWorld::new(&cfg.grid, &base)?;
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut sums = vec![[0.0f64; 3]; cfg.steps];
    for episode_id in 0..cfg.episodes {
        let mut ep_cfg = base.clone();
        ep_cfg.seed = master.next_u64();
        let episode = world.run_episode(&ep_cfg, episode_id as u64)?;
        for sample in &episode.samples {
            let belief = Belief::from_weights(cfg.grid.n(), sample.belief.clone())?;

            let predicted_map = ensure_normalized(map_net.approx_map(&belief)?);
            let predicted_coeffs = coeff_net.approx_coeffs(&belief)?;

            let (recon_true, recon_net) = match cfg.modality {
                Modality::Bearing => {
                    let basis = world.basis_r2().unwrap();
                    let true_c =
                        CoeffVector::new(Modality::Bearing, cfg.k_order, sample.coeffs.clone())?;
                    let net_c =
                        CoeffVector::new(Modality::Bearing, cfg.k_order, predicted_coeffs)?;
                    (
                        basis.reconstruct(&true_c)?.values().to_vec(),
                        basis.reconstruct(&net_c)?.values().to_vec(),
                    )
                }
                Modality::Fov => {
                    let basis = world.basis_se2().unwrap();
                    let true_c =
                        CoeffVector::new(Modality::Fov, cfg.k_order, sample.coeffs.clone())?;
                    let net_c = CoeffVector::new(Modality::Fov, cfg.k_order, predicted_coeffs)?;
                    (
                        basis.reconstruct(&true_c)?.values().to_vec(),
                        basis.reconstruct(&net_c)?.values().to_vec(),
                    )
                }
            };

            let row = &mut sums[sample.step];
            row[0] += kl_divergence(&sample.map, &predicted_map)?;
            row[1] += kl_divergence(&recon_true, &recon_net)?;
            row[2] += kl_divergence(&sample.map, &recon_true)?;
        }
    }

    let per_step: Vec<StepDivergences> = sums
        .iter()
        .enumerate()
        .map(|(step, row)| StepDivergences {
            step,
            map_net: row[0] / cfg.episodes as f64,
            coeff_net: row[1] / cfg.episodes as f64,
            truncation: row[2] / cfg.episodes as f64,
        })
        .collect();
    let grand = |f: fn(&StepDivergences) -> f64| {
        per_step.iter().map(f).sum::<f64>() / per_step.len() as f64
    };
    Ok(QualityReport {
        modality: cfg.modality,
        metric: cfg.metric,
        episodes: cfg.episodes,
        steps: cfg.steps,
        seed: cfg.seed,
        k_order: cfg.k_order,
        mean_map_net: grand(|s| s.map_net),
        mean_coeff_net: grand(|s| s.coeff_net),
        mean_truncation: grand(|s| s.truncation),
        per_step,
    })
}

/// Benchmark run parameters.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub grid: GridSpec,
    pub modality: Modality,
    pub metric: Metric,
    pub k_order: usize,
    pub sigma_deg: f64,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Greedy steps used to prepare a representative mid-episode belief.
    pub belief_steps: usize,
}

impl BenchmarkConfig {
    pub fn new(grid: GridSpec, modality: Modality, metric: Metric, reps: usize) -> Result<Self> {
        let base = EpisodeConfig::new(&grid, modality, metric, 0)?;
        Ok(Self {
            grid,
            modality,
            metric,
            k_order: base.k_order,
            sigma_deg: base.sigma_deg,
            reps,
            warmup: 3,
            seed: 0,
            belief_steps: 5,
        })
    }
}

/// Median and mean wall time in seconds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingStats {
    pub median_s: f64,
    pub mean_s: f64,
    pub reps: usize,
}

fn time_closure<F: FnMut()>(mut f: F, reps: usize, warmup: usize) -> TimingStats {
    for _ in 0..warmup {
        f();
    }
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        f();
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_s = if reps % 2 == 1 {
        times[reps / 2]
    } else {
        0.5 * (times[reps / 2 - 1] + times[reps / 2])
    };
    let mean_s = times.iter().sum::<f64>() / reps as f64;
    TimingStats { median_s, mean_s, reps }
}

/// Timing report comparing exact and network pipelines. The exact
/// coefficient time includes exact map generation, since the map must be
/// built before it can be decomposed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub modality: Modality,
    pub metric: Metric,
    pub reps: usize,
    pub warmup: usize,
    pub true_map: TimingStats,
    pub true_coeffs: TimingStats,
    pub net_map: TimingStats,
    pub net_coeffs: TimingStats,
    /// Median true-map time over median network-map time.
    pub map_speedup: f64,
    pub coeff_speedup: f64,
}

/// Time exact map generation, exact coefficient generation, and the two
/// network forward passes on a representative belief. Everything runs on
/// the calling thread.
pub fn benchmark_timing(
    cfg: &BenchmarkConfig,
    map_net: &dyn MapApproximator,
    coeff_net: &dyn CoeffApproximator,
) -> Result<BenchmarkReport> {
    if cfg.reps == 0 {
        return Err(Error::InvalidConfig("benchmark needs at least one repetition".into()));
    }
    if map_net.modality() != cfg.modality || coeff_net.modality() != cfg.modality {
        return Err(Error::InvalidConfig(
            "network modality does not match the benchmark config".into(),
        ));
    }

    let mut base = EpisodeConfig::new(&cfg.grid, cfg.modality, cfg.metric, cfg.seed)?;
    base.steps = cfg.belief_steps.max(1);
    base.k_order = cfg.k_order;
    base.sigma_deg = cfg.sigma_deg;
    let world = SimWorld::new(&cfg.grid, &base)?;
    let episode = world.run_episode(&base, 0)?;
    let belief = Belief::from_weights(
        cfg.grid.n(),
        episode.samples.last().unwrap().belief.clone(),
    )?;

    let true_map = time_closure(
        || {
            let (map, _coeffs_skipped) = (
                black_box(map_only(&world, &belief, cfg.metric, cfg.sigma_deg).unwrap()),
                (),
            );
            black_box(map);
        },
        cfg.reps,
        cfg.warmup,
    );
    let true_coeffs = time_closure(
        || {
            let pair = world.map_and_coeffs(&belief, cfg.metric, cfg.sigma_deg).unwrap();
            black_box(pair);
        },
        cfg.reps,
        cfg.warmup,
    );
    let net_map = time_closure(
        || {
            let out = map_net.approx_map(&belief).unwrap();
            black_box(out);
        },
        cfg.reps,
        cfg.warmup,
    );
    let net_coeffs = time_closure(
        || {
            let out = coeff_net.approx_coeffs(&belief).unwrap();
            black_box(out);
        },
        cfg.reps,
        cfg.warmup,
    );

    Ok(BenchmarkReport {
        modality: cfg.modality,
        metric: cfg.metric,
        reps: cfg.reps,
        warmup: cfg.warmup,
        map_speedup: true_map.median_s / net_map.median_s,
        coeff_speedup: true_coeffs.median_s / net_coeffs.median_s,
        true_map,
        true_coeffs,
        net_map,
        net_coeffs,
    })
}

/// Exact normalized map values only (no decomposition).
fn map_only(
    world: &SimWorld,
    belief: &Belief,
    metric: Metric,
    sigma_deg: f64,
) -> Result<Vec<f64>> {
    use crate::infomap::{fisher_map, mi_map_r2, mi_map_se2};
    match world.modality() {
        Modality::Bearing => {
            let sensor = crate::sensors::BearingSensor::new(sigma_deg)?;
            let map = match metric {
                Metric::Mutual => mi_map_r2(belief, &sensor, world.grid(), world.table())?,
                Metric::Fisher => fisher_map(belief, world.grid(), sigma_deg)?,
            };
            Ok(map.normalize()?.values().to_vec())
        }
        Modality::Fov => {
            let sensor = crate::sensors::FovSensor::default();
            let map = mi_map_se2(belief, &sensor, world.grid(), world.table())?;
            Ok(map.normalize()?.values().to_vec())
        }
    }
}

/// Output format for rendered maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Pgm,
    Csv,
}

/// Render a planar map. PGM output is 16-bit grayscale with values
/// scaled linearly onto [0, 65535]; CSV output is row-major with a
/// header line of column names.
pub fn render_map_r2(map: &InfoMapR2, format: RenderFormat, path: &Path) -> Result<()> {
    if !map.is_normalized() {
        let sum: f64 = map.values().iter().sum();
        return Err(Error::NotNormalized { sum });
    }
    render_values(map.values(), map.n(), format, path)
}

/// Render one heading slice of a position-plus-heading map.
pub fn render_map_se2(
    map: &InfoMapSE2,
    heading_bin: usize,
    format: RenderFormat,
    path: &Path,
) -> Result<()> {
    if !map.is_normalized() {
        let sum: f64 = map.values().iter().sum();
        return Err(Error::NotNormalized { sum });
    }
    let slice = map.heading_slice(heading_bin)?;
    render_values(&slice, map.n(), format, path)
}

/// Render raw row-major values (used by the CLI on dataset maps, which
/// are stored normalized).
pub fn render_values(values: &[f64], n: usize, format: RenderFormat, path: &Path) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::ShapeMismatch {
            expected: format!("{} values", n * n),
            actual: format!("{}", values.len()),
        });
    }
    match format {
        RenderFormat::Pgm => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = max - min;
            let mut out = Vec::with_capacity(64 + values.len() * 2);
            out.extend_from_slice(format!("P5\n{n} {n}\n65535\n").as_bytes());
            for &v in values {
                let level = if span > 0.0 {
                    ((v - min) / span * 65535.0).round() as u16
                } else {
                    0
                };
                out.extend_from_slice(&level.to_be_bytes());
            }
            std::fs::write(path, out)?;
        }
        RenderFormat::Csv => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            let header: Vec<String> = (0..n).map(|j| format!("c{j}")).collect();
            writeln!(file, "{}", header.join(","))?;
            for i in 0..n {
                let row: Vec<String> =
                    (0..n).map(|j| format!("{}", values[i * n + j])).collect();
                writeln!(file, "{}", row.join(","))?;
            }
            file.flush()?;
        }
    }
    Ok(())
}

/// Parse a CSV written by [`render_values`]: returns `(n, values)`.
pub fn parse_csv_map(path: &Path) -> Result<(usize, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
    let n = header.split(',').count();
    let mut values = Vec::with_capacity(n * n);
    for line in lines {
        for field in line.split(',') {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad CSV value {field:?}: {e}")))?,
            );
        }
    }
    if values.len() != n * n {
        return Err(Error::Format(format!(
            "CSV has {} values for a {n}-column header",
            values.len()
        )));
    }
    Ok((n, values))
}
