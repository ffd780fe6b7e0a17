//! Shared on-disk container: a length-prefixed JSON header followed by
//! little-endian 32-bit float blobs, each prefixed with its element count.
//! Used by coefficient files, dataset files, and network weights.

use crate::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub(crate) fn write_format<H: Serialize>(path: &Path, header: &H, blobs: &[&[f32]]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let header_bytes = serde_json::to_vec(header)?;
    out.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
    out.write_all(&header_bytes)?;
    out.write_all(&(blobs.len() as u64).to_le_bytes())?;
    for blob in blobs {
        out.write_all(&(blob.len() as u64).to_le_bytes())?;
        for &v in *blob {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn read_format<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<Vec<f32>>)> {
    let mut input = BufReader::new(File::open(path)?);
    let header_len = read_u64(&mut input)? as usize;
    if header_len > (1 << 24) {
        return Err(Error::Format(format!("implausible header length {header_len}")));
    }
    let mut header_bytes = vec![0u8; header_len];
    input
        .read_exact(&mut header_bytes)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let header: H = serde_json::from_slice(&header_bytes)?;

    let blob_count = read_u64(&mut input)? as usize;
    if blob_count > 1024 {
        return Err(Error::Format(format!("implausible blob count {blob_count}")));
    }
    let mut blobs = Vec::with_capacity(blob_count);
    for _ in 0..blob_count {
        let len = read_u64(&mut input)? as usize;
        let mut bytes = vec![0u8; len * 4];
        input
            .read_exact(&mut bytes)
            .map_err(|_| Error::Format("truncated blob".into()))?;
        let mut blob = Vec::with_capacity(len);
        for chunk in bytes.chunks_exact(4) {
            blob.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
        }
        blobs.push(blob);
    }
    Ok((header, blobs))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input
        .read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated length field".into()))?;
    Ok(u64::from_le_bytes(buf))
}
