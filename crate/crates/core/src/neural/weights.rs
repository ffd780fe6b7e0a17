//! Weights-file serialization: a JSON manifest plus one little-endian
//! 32-bit float blob per parameter array, in layer order.

use super::net::{Arch, Network};
use super::train::TrainReport;
use crate::grid::GridSpec;
use crate::io::{read_format, write_format};
use crate::spectral::coeff_len;
use crate::{Error, Metric, Modality, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

/// Training provenance stored alongside the weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedMeta {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub dataset_samples: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Manifest at the head of a weights file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsHeader {
    pub format_version: u32,
    pub arch: String,
    pub grid: GridSpec,
    pub modality: Modality,
    pub metric: Metric,
    pub k_order: usize,
    pub param_lens: Vec<usize>,
    pub trained: Option<TrainedMeta>,
}

/// Write the network parameters with provenance metadata.
pub fn save_weights(
    net: &Network<f32>,
    grid: &GridSpec,
    modality: Modality,
    metric: Metric,
    k_order: usize,
    trained: Option<TrainedMeta>,
    path: &Path,
) -> Result<()> {
    let params = net.param_slices();
    let header = WeightsHeader {
        format_version: WEIGHTS_FORMAT_VERSION,
        arch: net.arch().id().to_string(),
        grid: *grid,
        modality,
        metric,
        k_order,
        param_lens: params.iter().map(|p| p.len()).collect(),
        trained,
    };
    write_format(path, &header, &params)
}

/// Load a weights file, reconstructing the architecture from the manifest.
pub fn load_weights(path: &Path) -> Result<(Network<f32>, WeightsHeader)> {
    let (header, blobs): (WeightsHeader, Vec<Vec<f32>>) = read_format(path)?;
    if header.format_version != WEIGHTS_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: header.format_version,
            expected: WEIGHTS_FORMAT_VERSION,
        });
    }
    let arch = Arch::from_id(&header.arch)?;
    let mut net = match arch {
        Arch::MapR2 => Network::<f32>::map_r2(&header.grid, 0),
        Arch::MapSe2 => Network::<f32>::map_se2(&header.grid, 0),
        Arch::Coeff => {
            let len = coeff_len(header.modality, header.k_order);
            Network::<f32>::coeff(&header.grid, len, 0)
        }
    };
    let mut params = net.param_slices_mut();
    if blobs.len() != params.len() || header.param_lens.len() != params.len() {
        return Err(Error::Format(format!(
            "expected {} parameter blobs, found {}",
            params.len(),
            blobs.len()
        )));
    }
    for ((param, blob), &declared) in params.iter_mut().zip(&blobs).zip(&header.param_lens) {
        if blob.len() != param.len() || declared != param.len() {
            return Err(Error::Format(format!(
                "parameter blob of {} values does not match architecture slot of {}",
                blob.len(),
                param.len()
            )));
        }
        param.copy_from_slice(blob);
    }
    drop(params);
    Ok((net, header))
}

/// Write the per-epoch loss history as `epoch,train_loss,val_loss`.
pub fn write_loss_history(report: &TrainReport, path: &Path) -> Result<()> {
    let mut out = String::from("epoch,train_loss,val_loss\n");
    for e in &report.history {
        out.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::fs;

    fn grid(n: usize, bins: usize) -> GridSpec {
        GridSpec::new(200.0, n, bins).unwrap()
    }

    fn belief_tensor(n: usize, seed: u64) -> Tensor<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let sum: f64 = raw.iter().sum();
        Tensor::from_vec(
            &[1, 1, n, n],
            raw.iter().map(|&v| (v / sum) as f32).collect(),
        )
        .unwrap()
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.bin");
        let g = grid(8, 6);
        let net = Network::<f32>::map_se2(&g, 42);
        save_weights(&net, &g, Modality::Fov, Metric::Mutual, 3, None, &path).unwrap();
        let (loaded, header) = load_weights(&path).unwrap();
        assert_eq!(header.arch, "map_se2");
        let x = belief_tensor(8, 1);
        let y0 = net.forward(&x).unwrap();
        let y1 = loaded.forward(&x).unwrap();
        let bits = |t: &Tensor<f32>| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&y0), bits(&y1));
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.bin");
        let g = grid(6, 1);
        let net = Network::<f32>::coeff(&g, 9, 7);
        save_weights(&net, &g, Modality::Bearing, Metric::Mutual, 2, None, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 16]).unwrap();
        match load_weights(&path) {
            Err(Error::Format(msg)) => assert!(msg.contains("truncated"), "{msg}"),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn version_bump_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.bin");
        let g = grid(6, 1);
        let net = Network::<f32>::coeff(&g, 9, 7);
        save_weights(&net, &g, Modality::Bearing, Metric::Mutual, 2, None, &path).unwrap();
        // Bump the version inside the JSON header.
        let mut bytes = fs::read(&path).unwrap();
        let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        let header = String::from_utf8(bytes[8..8 + header_len].to_vec()).unwrap();
        let bumped = header.replace("\"format_version\":1", "\"format_version\":9");
        assert_ne!(header, bumped);
        bytes.splice(8..8 + header_len, bumped.into_bytes());
        fs::write(&path, &bytes).unwrap();
        match load_weights(&path) {
            Err(Error::FormatVersion { found, expected }) => {
                assert_eq!(found, 9);
                assert_eq!(expected, WEIGHTS_FORMAT_VERSION);
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn loss_history_csv_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hist.csv");
        let report = TrainReport {
            history: vec![
                crate::neural::EpochLoss { epoch: 0, train_loss: 0.5, val_loss: 0.6 },
                crate::neural::EpochLoss { epoch: 1, train_loss: 0.25, val_loss: 0.3 },
            ],
            best_epoch: 1,
            best_val_loss: 0.3,
        };
        write_loss_history(&report, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epoch,train_loss,val_loss");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,0.5,"));
    }
}
