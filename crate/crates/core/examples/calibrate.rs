// scratch: desk-scale calibration for the acceptance configuration
use infomaps::eval::{
    evaluate_quality, NetCoeffApproximator, NetMapApproximator, QualityConfig,
};
use infomaps::grid::GridSpec;
use infomaps::neural::{train, LossKind, Network, TrainConfig, TrainingSet};
use infomaps::sim::{generate_dataset, Dataset, EpisodeConfig};
use infomaps::{Metric, Modality};
use std::time::Instant;

fn main() {
    let grid = GridSpec::default();
    let path = std::path::Path::new("/tmp/calib_dataset.bin");
    if !path.exists() {
        let t = Instant::now();
        let cfg = EpisodeConfig::new(&grid, Modality::Bearing, Metric::Mutual, 42).unwrap();
        let manifest = generate_dataset(&grid, &cfg, 100, path).unwrap();
        println!(
            "dataset: {} samples in {:.1}s",
            manifest.samples,
            t.elapsed().as_secs_f64()
        );
    } else {
        println!("dataset cached");
    }
    let data = Dataset::load(path).unwrap();

    // Map network.
    let t = Instant::now();
    let mut map_net = Network::<f32>::map_r2(&grid, 11);
    let set = TrainingSet::new(28, data.manifest.map_len, data.beliefs.clone(), data.maps.clone())
        .unwrap();
    let cfg = TrainConfig { epochs: 12, batch_size: 32, learning_rate: 1e-3, seed: 5, ..Default::default() };
    let report = train(&mut map_net, &set, LossKind::Kl, &cfg).unwrap();
    println!("map-net: {:.1}s for {} epochs", t.elapsed().as_secs_f64(), cfg.epochs);
    for e in &report.history {
        println!("  epoch {} train {:.5} val {:.5}", e.epoch, e.train_loss, e.val_loss);
    }

    // Coefficient network.
    let t = Instant::now();
    let mut coeff_net = Network::<f32>::coeff(&grid, data.manifest.coeff_len, 13);
    let cset = TrainingSet::new(28, data.manifest.coeff_len, data.beliefs.clone(), data.coeffs.clone())
        .unwrap();
    let report_c = train(&mut coeff_net, &cset, LossKind::Mae, &cfg).unwrap();
    println!("coeff-net: {:.1}s for {} epochs", t.elapsed().as_secs_f64(), cfg.epochs);
    for e in report_c.history.iter().step_by(3) {
        println!("  epoch {} train {:.6} val {:.6}", e.epoch, e.train_loss, e.val_loss);
    }

    // Quick evaluation on fresh episodes.
    let t = Instant::now();
    let mut qcfg = QualityConfig::new(grid, Modality::Bearing, Metric::Mutual, 777).unwrap();
    qcfg.episodes = 20;
    let map_approx = NetMapApproximator {
        net: map_net,
        grid,
        modality: Modality::Bearing,
        metric: Metric::Mutual,
    };
    let coeff_approx = NetCoeffApproximator {
        net: coeff_net,
        modality: Modality::Bearing,
        metric: Metric::Mutual,
        k_order: 5,
    };
    let q = evaluate_quality(&map_approx, &coeff_approx, &qcfg).unwrap();
    println!(
        "eval ({} episodes, {:.1}s): D(map||net) {:.4}  D(recon||netrecon) {:.4}  D(map||recon) {:.4}",
        qcfg.episodes,
        t.elapsed().as_secs_f64(),
        q.mean_map_net,
        q.mean_coeff_net,
        q.mean_truncation
    );
}
