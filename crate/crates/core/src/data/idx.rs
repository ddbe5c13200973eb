use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Load an IDX image/label file pair (the MNIST and Fashion-MNIST
/// distribution format). Pixels are kept as raw byte values 0–255;
/// normalization is a separate step. The class count is the largest label
/// plus one, and labels are 0-based.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images =
        std::fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels_raw =
        std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;

    let (count, rows, cols, pixels) = parse_images(images_path, &images)?;
    let labels = parse_labels(labels_path, &labels_raw)?;
    if labels.len() != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: labels.len(),
        });
    }

    let n = rows * cols;
    let features = Matrix::from_vec(count, n, pixels.iter().map(|&b| b as f64).collect())
        .expect("pixel count validated against header");
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let name = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".to_string());
    Dataset::new(name, features, labels, num_classes, false)
}

fn read_u32_be(path: &Path, buf: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if buf.len() < end {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            needed: end,
            found: buf.len(),
        });
    }
    Ok(u32::from_be_bytes([
        buf[offset],
        buf[offset + 1],
        buf[offset + 2],
        buf[offset + 3],
    ]))
}

fn parse_images<'a>(path: &Path, buf: &'a [u8]) -> Result<(usize, usize, usize, &'a [u8])> {
    let magic = read_u32_be(path, buf, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected_kind: "images",
            found: magic,
            expected: IMAGE_MAGIC,
        });
    }
    let count = read_u32_be(path, buf, 4)? as usize;
    let rows = read_u32_be(path, buf, 8)? as usize;
    let cols = read_u32_be(path, buf, 12)? as usize;
    let needed = 16 + count * rows * cols;
    if buf.len() < needed {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            needed,
            found: buf.len(),
        });
    }
    Ok((count, rows, cols, &buf[16..needed]))
}

fn parse_labels(path: &Path, buf: &[u8]) -> Result<Vec<usize>> {
    let magic = read_u32_be(path, buf, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected_kind: "labels",
            found: magic,
            expected: LABEL_MAGIC,
        });
    }
    let count = read_u32_be(path, buf, 4)? as usize;
    let needed = 8 + count;
    if buf.len() < needed {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            needed,
            found: buf.len(),
        });
    }
    Ok(buf[8..needed].iter().map(|&b| b as usize).collect())
}
