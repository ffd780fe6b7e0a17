//! Command-line front end: dataset generation, network training,
//! quality evaluation, timing benchmarks, and map rendering.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use infomaps::eval::{
    benchmark_timing, evaluate_quality, render_values, BenchmarkConfig, NetCoeffApproximator,
    NetMapApproximator, QualityConfig, RenderFormat,
};
use infomaps::grid::GridSpec;
use infomaps::neural::{
    heading_major_to_channels, load_weights, save_weights, train, Arch, LossKind, Network,
    TrainConfig, TrainedMeta, TrainingSet,
};
use infomaps::sim::{generate_dataset, Dataset, EpisodeConfig};
use infomaps::spectral::coeff_len;
use infomaps::{Metric, Modality};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "infomaps",
    about = "Information maps for mobile-sensor target localization, \
             with CNN approximation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModalityArg {
    Bearing,
    Fov,
}

impl From<ModalityArg> for Modality {
    fn from(m: ModalityArg) -> Self {
        match m {
            ModalityArg::Bearing => Modality::Bearing,
            ModalityArg::Fov => Modality::Fov,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Mutual,
    Fisher,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Mutual => Metric::Mutual,
            MetricArg::Fisher => Metric::Fisher,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ArchArg {
    Map,
    Coeff,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Pgm,
    Csv,
}

/// Grid flags shared by subcommands that build a world from scratch.
#[derive(clap::Args, Clone, Copy)]
struct GridArgs {
    /// Cells per spatial dimension.
    #[arg(long, default_value_t = 28)]
    n: usize,
    /// Field side length in meters.
    #[arg(long, default_value_t = 200.0)]
    side_length: f64,
    /// Heading discretization.
    #[arg(long, default_value_t = 36)]
    heading_bins: usize,
}

impl GridArgs {
    fn build(&self) -> anyhow::Result<GridSpec> {
        Ok(GridSpec::new(self.side_length, self.n, self.heading_bins)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run greedy episodes and write a training dataset.
    GenerateDataset {
        #[arg(long, value_enum)]
        modality: ModalityArg,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long)]
        episodes: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Bearing noise standard deviation in degrees.
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        /// Highest Fourier order (default 5 planar, 17 with headings).
        #[arg(long)]
        k_order: Option<usize>,
    },
    /// Train a network on a dataset and write a weights file.
    Train {
        #[arg(long, value_enum)]
        arch: ArchArg,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Loss-history CSV path (default: <out>.losses.csv).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Compare trained networks against the exact pipeline on fresh
    /// episodes and write a JSON report.
    Evaluate {
        #[arg(long)]
        map_weights: PathBuf,
        #[arg(long)]
        coeff_weights: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Time exact versus network map/coefficient generation and write a
    /// JSON report.
    Benchmark {
        #[arg(long, value_enum)]
        modality: ModalityArg,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        #[arg(long)]
        k_order: Option<usize>,
    },
    /// Render one sample's map from a dataset file.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Heading slice for maps with a heading axis.
        #[arg(long, default_value_t = 0)]
        heading_bin: usize,
        #[arg(long)]
        out: PathBuf,
        /// Sample index within the dataset.
        #[arg(long, default_value_t = 0)]
        sample: usize,
    },
}

fn default_k(modality: Modality) -> usize {
    match modality {
        Modality::Bearing => 5,
        Modality::Fov => 17,
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::GenerateDataset {
            modality,
            metric,
            episodes,
            steps,
            seed,
            out,
            grid,
            sigma,
            k_order,
        } => {
            let grid = grid.build()?;
            let modality = Modality::from(modality);
            let mut cfg = EpisodeConfig::new(&grid, modality, Metric::from(metric), seed)?;
            cfg.steps = steps;
            cfg.sigma_deg = sigma;
            cfg.k_order = k_order.unwrap_or_else(|| default_k(modality));
            let manifest = generate_dataset(&grid, &cfg, episodes, &out)
                .context("dataset generation failed")?;
            println!(
                "wrote {} samples ({} episodes x {} steps, {} {}) to {}",
                manifest.samples,
                manifest.episodes,
                manifest.steps,
                manifest.modality.as_str(),
                manifest.metric.as_str(),
                out.display()
            );
        }
        Command::Train { arch, dataset, epochs, batch, lr, seed, out, history } => {
            let data = Dataset::load(&dataset).context("failed to load dataset")?;
            let m = &data.manifest;
            let grid = m.grid;
            let (mut net, targets, target_len, loss) = match arch {
                ArchArg::Map => {
                    let net = match m.modality {
                        Modality::Bearing => Network::<f32>::map_r2(&grid, seed),
                        Modality::Fov => Network::<f32>::map_se2(&grid, seed),
                    };
                    // Map targets move to the network's channel-major layout.
                    let targets: Vec<f32> = match m.modality {
                        Modality::Bearing => data.maps.clone(),
                        Modality::Fov => {
                            let mut out = Vec::with_capacity(data.maps.len());
                            for i in 0..data.len() {
                                let row: Vec<f64> =
                                    data.map(i).iter().map(|&v| v as f64).collect();
                                out.extend(
                                    heading_major_to_channels(&row, grid.n(), grid.heading_bins())
                                        .iter()
                                        .map(|&v| v as f32),
                                );
                            }
                            out
                        }
                    };
                    (net, targets, m.map_len, LossKind::Kl)
                }
                ArchArg::Coeff => {
                    let len = coeff_len(m.modality, m.k_order);
                    let net = Network::<f32>::coeff(&grid, len, seed);
                    (net, data.coeffs.clone(), len, LossKind::Mae)
                }
            };
            let set = TrainingSet::new(grid.n(), target_len, data.beliefs.clone(), targets)?;
            let cfg = TrainConfig {
                epochs,
                batch_size: batch,
                learning_rate: lr,
                seed,
                ..Default::default()
            };
            let report = train(&mut net, &set, loss, &cfg).context("training failed")?;
            let trained = TrainedMeta {
                epochs,
                batch_size: batch,
                learning_rate: lr,
                seed,
                dataset_samples: data.len(),
                best_epoch: report.best_epoch,
                best_val_loss: report.best_val_loss,
            };
            save_weights(&net, &grid, m.modality, m.metric, m.k_order, Some(trained), &out)?;
            let history_path =
                history.unwrap_or_else(|| out.with_extension("losses.csv"));
            infomaps::neural::write_loss_history(&report, &history_path)?;
            println!(
                "trained {} for {} epochs: best val loss {:.6} at epoch {}; weights at {}, history at {}",
                net.arch().id(),
                epochs,
                report.best_val_loss,
                report.best_epoch,
                out.display(),
                history_path.display()
            );
        }
        Command::Evaluate { map_weights, coeff_weights, episodes, seed, report, steps } => {
            let (map_net, map_header) = load_weights(&map_weights)?;
            let (coeff_net, coeff_header) = load_weights(&coeff_weights)?;
            if map_header.arch == Arch::Coeff.id() {
                bail!("--map-weights points at a coefficient network");
            }
            if coeff_header.arch != Arch::Coeff.id() {
                bail!("--coeff-weights points at a map network");
            }
            if map_header.modality != coeff_header.modality
                || map_header.metric != coeff_header.metric
                || map_header.k_order != coeff_header.k_order
                || map_header.grid != coeff_header.grid
            {
                bail!("map and coefficient weights disagree on modality/metric/order/grid");
            }
            let mut cfg = QualityConfig::new(
                map_header.grid,
                map_header.modality,
                map_header.metric,
                seed,
            )?;
            cfg.episodes = episodes;
            cfg.steps = steps;
            cfg.k_order = map_header.k_order;
            let map_approx = NetMapApproximator::from_parts(map_net, &map_header);
            let coeff_approx = NetCoeffApproximator::from_parts(coeff_net, &coeff_header);
            let quality = evaluate_quality(&map_approx, &coeff_approx, &cfg)?;
            let file = std::fs::File::create(&report)?;
            serde_json::to_writer_pretty(file, &quality)?;
            println!(
                "{} {}: D(map||net) = {:.4}, D(recon||net recon) = {:.4}, D(map||recon) = {:.4} over {} episodes -> {}",
                quality.modality.as_str(),
                quality.metric.as_str(),
                quality.mean_map_net,
                quality.mean_coeff_net,
                quality.mean_truncation,
                quality.episodes,
                report.display()
            );
        }
        Command::Benchmark {
            modality,
            metric,
            reps,
            report,
            grid,
            warmup,
            seed,
            sigma,
            k_order,
        } => {
            let grid = grid.build()?;
            let modality = Modality::from(modality);
            let metric = Metric::from(metric);
            let k = k_order.unwrap_or_else(|| default_k(modality));
            let mut cfg = BenchmarkConfig::new(grid, modality, metric, reps)?;
            cfg.warmup = warmup;
            cfg.seed = seed;
            cfg.sigma_deg = sigma;
            cfg.k_order = k;
            // Timing does not need trained weights: freshly initialized
            // networks of the right architecture run the same arithmetic.
            let map_net = NetMapApproximator {
                net: match modality {
                    Modality::Bearing => Network::<f32>::map_r2(&grid, seed),
                    Modality::Fov => Network::<f32>::map_se2(&grid, seed),
                },
                grid,
                modality,
                metric,
            };
            let coeff_net = NetCoeffApproximator {
                net: Network::<f32>::coeff(&grid, coeff_len(modality, k), seed),
                modality,
                metric,
                k_order: k,
            };
            let timing = benchmark_timing(&cfg, &map_net, &coeff_net)?;
            let file = std::fs::File::create(&report)?;
            serde_json::to_writer_pretty(file, &timing)?;
            println!(
                "{} {}: true map {:.4}s vs net map {:.4}s ({:.1}x); true coeffs {:.4}s vs net coeffs {:.4}s ({:.1}x) -> {}",
                timing.modality.as_str(),
                timing.metric.as_str(),
                timing.true_map.median_s,
                timing.net_map.median_s,
                timing.map_speedup,
                timing.true_coeffs.median_s,
                timing.net_coeffs.median_s,
                timing.coeff_speedup,
                report.display()
            );
        }
        Command::Render { input, format, heading_bin, out, sample } => {
            let data = Dataset::load(&input).context("failed to load dataset")?;
            if sample >= data.len() {
                bail!("sample {} out of range ({} samples)", sample, data.len());
            }
            let m = &data.manifest;
            let n = m.grid.n();
            let values: Vec<f64> = data.map(sample).iter().map(|&v| v as f64).collect();
            let slice = match m.modality {
                Modality::Bearing => values,
                Modality::Fov => {
                    let bins = m.grid.heading_bins();
                    if heading_bin >= bins {
                        bail!("heading bin {} out of range ({} bins)", heading_bin, bins);
                    }
                    (0..n * n).map(|cell| values[cell * bins + heading_bin]).collect()
                }
            };
            let fmt = match format {
                FormatArg::Pgm => RenderFormat::Pgm,
                FormatArg::Csv => RenderFormat::Csv,
            };
            render_values(&slice, n, fmt, &out)?;
            println!("rendered sample {} of {} to {}", sample, input.display(), out.display());
        }
    }
    Ok(())
}
