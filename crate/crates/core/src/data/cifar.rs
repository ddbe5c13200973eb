use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Bytes per CIFAR-10 binary record: 1 label byte + 3×32×32 pixel bytes.
const RECORD_LEN: usize = 3073;
const PIXELS: usize = RECORD_LEN - 1;
const NUM_CLASSES: usize = 10;

/// Load CIFAR-10 binary batches. Each record is a label byte followed by
/// 3072 channel-major pixel bytes; pixel values are kept raw.
pub fn load_cifar10<P: AsRef<Path>>(batch_paths: &[P]) -> Result<Dataset> {
    let mut pixels: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for path in batch_paths {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.is_empty() || bytes.len() % RECORD_LEN != 0 {
            return Err(Error::BadRecordLength {
                path: path.to_path_buf(),
                len: bytes.len(),
                record_len: RECORD_LEN,
            });
        }
        for record in bytes.chunks_exact(RECORD_LEN) {
            let label = record[0] as usize;
            if label >= NUM_CLASSES {
                return Err(Error::LabelOutOfRange {
                    row: labels.len(),
                    label,
                    num_classes: NUM_CLASSES,
                });
            }
            labels.push(label);
            pixels.extend(record[1..].iter().map(|&b| b as f64));
        }
    }
    let count = labels.len();
    let features =
        Matrix::from_vec(count, PIXELS, pixels).expect("record length fixed by format");
    Dataset::new("cifar10", features, labels, NUM_CLASSES, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_batch(path: &Path, records: &[(u8, Vec<u8>)]) {
        let mut buf = Vec::new();
        for (label, px) in records {
            assert_eq!(px.len(), PIXELS);
            buf.push(*label);
            buf.extend_from_slice(px);
        }
        std::fs::write(path, buf).unwrap();
    }

    #[test]
    fn single_record_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.bin");
        let px: Vec<u8> = (0..PIXELS).map(|i| (i % 251) as u8).collect();
        write_batch(&path, &[(7, px.clone())]);
        let d = load_cifar10(&[&path]).unwrap();
        assert_eq!(d.num_patterns(), 1);
        assert_eq!(d.num_features(), PIXELS);
        assert_eq!(d.num_classes(), NUM_CLASSES);
        assert_eq!(d.labels(), &[7]);
        let expect: Vec<f64> = px.iter().map(|&b| b as f64).collect();
        assert_eq!(d.features().row(0), expect.as_slice());
    }

    #[test]
    fn multiple_batches_concatenate() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.bin");
        let b = dir.path().join("b.bin");
        write_batch(&a, &[(0, vec![1; PIXELS]), (1, vec![2; PIXELS])]);
        write_batch(&b, &[(2, vec![3; PIXELS])]);
        let d = load_cifar10(&[&a, &b]).unwrap();
        assert_eq!(d.num_patterns(), 3);
        assert_eq!(d.labels(), &[0, 1, 2]);
    }

    #[test]
    fn truncated_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.bin");
        std::fs::write(&path, vec![0u8; RECORD_LEN - 1]).unwrap();
        let err = load_cifar10(&[&path]).unwrap_err();
        assert!(matches!(err, Error::BadRecordLength { len, .. } if len == RECORD_LEN - 1));
        assert!(err.to_string().contains("truncated record"));
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        write_batch(&path, &[(0, vec![0; PIXELS]), (10, vec![0; PIXELS])]);
        assert!(matches!(
            load_cifar10(&[&path]),
            Err(Error::LabelOutOfRange { row: 1, label: 10, .. })
        ));
    }
}
