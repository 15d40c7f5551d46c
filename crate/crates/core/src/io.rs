//! Matrix and channel files: a JSON header next to a little-endian binary
//! payload of interleaved `f64` (re, im) pairs in column-major order.
//!
//! `foo.json` describes the matrix and names its payload (`foo.bin` by
//! default, resolved relative to the header).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::scalar::{CMat, CVec, C};

pub const MATRIX_FORMAT: &str = "hyprec-matrix";
pub const MATRIX_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub format: String,
    pub version: u32,
    pub rows: usize,
    pub cols: usize,
    /// Always `c128le`.
    pub dtype: String,
    /// Always `column-major`.
    pub order: String,
    /// Payload file name, relative to the header.
    pub data: String,
    /// Free-form metadata (channel structure, seeds, ...).
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub meta: Value,
}

fn payload_path(header_path: &Path, data: &str) -> PathBuf {
    match header_path.parent() {
        Some(dir) => dir.join(data),
        None => PathBuf::from(data),
    }
}

/// Writes `m` to `path` (JSON header) and its sibling `.bin` payload.
pub fn write_matrix(path: &Path, m: &CMat<f64>, meta: Value) -> Result<()> {
    let bin = path.with_extension("bin");
    let data = bin
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            msg: "header path has no file name".into(),
        })?
        .to_string();
    let header = MatrixHeader {
        format: MATRIX_FORMAT.into(),
        version: MATRIX_VERSION,
        rows: m.nrows(),
        cols: m.ncols(),
        dtype: "c128le".into(),
        order: "column-major".into(),
        data,
        meta,
    };
    let mut bytes = Vec::with_capacity(16 * m.len());
    for z in m.iter() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Reads a matrix and its metadata.
pub fn read_matrix_with_meta(path: &Path) -> Result<(CMat<f64>, Value)> {
    let fmt = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: MatrixHeader = serde_json::from_str(&text).map_err(|e| fmt(e.to_string()))?;
    if header.format != MATRIX_FORMAT || header.version != MATRIX_VERSION {
        return Err(fmt(format!("unsupported format {} v{}", header.format, header.version)));
    }
    if header.dtype != "c128le" || header.order != "column-major" {
        return Err(fmt(format!("unsupported layout {} {}", header.dtype, header.order)));
    }
    let bin = payload_path(path, &header.data);
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    let n = header.rows * header.cols;
    if bytes.len() != 16 * n {
        return Err(Error::Format {
            path: bin,
            msg: format!("expected {} bytes, found {}", 16 * n, bytes.len()),
        });
    }
    let word = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let m = CMat::from_iterator(header.rows, header.cols, (0..n).map(|k| C::new(word(2 * k), word(2 * k + 1))));
    Ok((m, header.meta))
}

pub fn read_matrix(path: &Path) -> Result<CMat<f64>> {
    Ok(read_matrix_with_meta(path)?.0)
}

#[derive(Serialize, Deserialize)]
struct ChannelMeta {
    kind: String,
    seed: Option<u64>,
    theta_r: Vec<f64>,
    theta_t: Vec<f64>,
    alpha_re: Vec<f64>,
    alpha_im: Vec<f64>,
}

/// Writes `H` with its path structure in the header metadata.
pub fn write_channel(path: &Path, ch: &ChannelRealization<f64>) -> Result<()> {
    let meta = ChannelMeta {
        kind: "channel".into(),
        seed: ch.seed,
        theta_r: ch.theta_r.clone(),
        theta_t: ch.theta_t.clone(),
        alpha_re: ch.alpha.iter().map(|z| z.re).collect(),
        alpha_im: ch.alpha.iter().map(|z| z.im).collect(),
    };
    write_matrix(path, &ch.h, serde_json::to_value(meta).expect("meta serializes"))
}

/// Reads a channel written by [`write_channel`]; the matrix is rebuilt from
/// the stored paths and checked against the payload.
pub fn read_channel(path: &Path) -> Result<ChannelRealization<f64>> {
    let (h, meta) = read_matrix_with_meta(path)?;
    let fmt = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let meta: ChannelMeta = serde_json::from_value(meta).map_err(|e| fmt(format!("channel metadata: {e}")))?;
    let alpha = CVec::from_iterator(
        meta.alpha_re.len(),
        meta.alpha_re.iter().zip(&meta.alpha_im).map(|(&re, &im)| C::new(re, im)),
    );
    let ch = ChannelRealization::from_paths(h.nrows(), h.ncols(), meta.theta_r, meta.theta_t, alpha, meta.seed)?;
    let scale = h.norm().max(1.0);
    if (&ch.h - &h).norm() > 1e-9 * scale {
        return Err(fmt("stored matrix does not match its path description".into()));
    }
    Ok(ChannelRealization { h, ..ch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::testutil::random_cmat;

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = random_cmat(5, 3, 1);
        write_matrix(&p, &m, serde_json::json!({"note": "x"})).unwrap();
        assert!(dir.path().join("m.bin").exists());
        let (back, meta) = read_matrix_with_meta(&p).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta["note"], "x");
    }

    #[test]
    fn channel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.json");
        let ch = sample_channel::<f64>(4, 8, 3, 7).unwrap();
        write_channel(&p, &ch).unwrap();
        let back = read_channel(&p).unwrap();
        assert_eq!(back.h, ch.h);
        assert_eq!(back.theta_t, ch.theta_t);
        assert_eq!(back.seed, Some(7));
    }

    #[test]
    fn malformed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        assert!(matches!(read_matrix(&p), Err(Error::Io { .. })));
        write_matrix(&p, &random_cmat(2, 2, 0), Value::Null).unwrap();
        fs::write(dir.path().join("m.bin"), [0u8; 10]).unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Format { .. })));
        fs::write(&p, "{not json").unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Format { .. })));
        write_matrix(&p, &random_cmat(2, 2, 0), Value::Null).unwrap();
        assert!(matches!(read_channel(&p), Err(Error::Format { .. })));
    }
}
