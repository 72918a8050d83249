//! IDX container: big-endian `u32` magic, big-endian `u32` dimension sizes,
//! then raw `u8` payload.
//!
//! Images use magic `0x00000803` (three dimensions `N × rows × cols`), labels
//! `0x00000801` (one dimension `N`).

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, IdxError, Result};
use crate::numerics::Matrix;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| IdxError::Truncated {
            path: path.to_path_buf(),
            needed: offset + 4,
            actual: bytes.len(),
        })
}

/// Checks the magic and returns the dimension sizes and the payload slice.
pub fn parse_idx<'a>(bytes: &'a [u8], expected_magic: u32, path: &Path) -> Result<(Vec<usize>, &'a [u8]), IdxError> {
    let magic = read_u32(bytes, 0, path)?;
    if magic != expected_magic {
        return Err(IdxError::BadMagic {
            path: path.to_path_buf(),
            found: magic,
            expected: expected_magic,
        });
    }
    let ndims = (magic & 0xff) as usize;
    let dims = (0..ndims)
        .map(|i| read_u32(bytes, 4 + 4 * i, path).map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let header = 4 + 4 * ndims;
    let payload: usize = dims.iter().product();
    if bytes.len() < header + payload {
        return Err(IdxError::Truncated {
            path: path.to_path_buf(),
            needed: header + payload,
            actual: bytes.len(),
        });
    }
    Ok((dims, &bytes[header..header + payload]))
}

/// Loads an image/label IDX pair. Pixels are divided by 255.
///
/// Distinct label values are mapped to dense ids in ascending order and
/// named by their decimal value.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let (images, labels) = (images.as_ref(), labels.as_ref());
    let image_bytes = fs::read(images).map_err(|e| Error::io(images, e))?;
    let label_bytes = fs::read(labels).map_err(|e| Error::io(labels, e))?;

    let (dims, pixels) = parse_idx(&image_bytes, IDX_IMAGES_MAGIC, images)?;
    let (ldims, raw_labels) = parse_idx(&label_bytes, IDX_LABELS_MAGIC, labels)?;
    let (n, rows, cols) = (dims[0], dims[1], dims[2]);
    if ldims[0] != n {
        return Err(IdxError::CountMismatch {
            images: n,
            labels: ldims[0],
        }
        .into());
    }
    if n == 0 {
        return Err(Error::Empty("IDX file"));
    }

    let mut present = [false; 256];
    for &l in raw_labels {
        present[l as usize] = true;
    }
    let values: Vec<u8> = (0..=255u8).filter(|&v| present[v as usize]).collect();
    let mut dense = [0usize; 256];
    for (id, &v) in values.iter().enumerate() {
        dense[v as usize] = id;
    }

    let x = Matrix::new(n, rows * cols, pixels.iter().map(|&p| f64::from(p) / 255.0).collect())?;
    let y = raw_labels.iter().map(|&l| dense[l as usize]).collect();
    let names = values.iter().map(|v| v.to_string()).collect();
    Dataset::new(x, y, names, Some((rows, cols)))
}

/// Serializes `n` images of `rows × cols` bytes as an IDX images file.
pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let n = pixels.len() / (rows * cols).max(1);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    for d in [n, rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, bytes).unwrap();
        p
    }

    #[test]
    fn two_image_fixture_decodes_exactly() {
        let dir = tempfile::tempdir().unwrap();
        // hand-built: two 2x2 images, labels 7 and 3
        let images: Vec<u8> = vec![
            0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, //
            0, 255, 128, 1, //
            10, 20, 30, 40,
        ];
        let labels: Vec<u8> = vec![0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 7, 3];
        let ds = load_idx(write(dir.path(), "i", &images), write(dir.path(), "l", &labels)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.image_shape(), Some((2, 2)));
        let want: Vec<f64> = [0u8, 255, 128, 1, 10, 20, 30, 40]
            .iter()
            .map(|&b| f64::from(b) / 255.0)
            .collect();
        assert_eq!(ds.x().as_slice(), &want[..]);
        // dense ids by ascending label value: 3 -> 0, 7 -> 1
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.class_names(), &["3".to_string(), "7".to_string()]);
        assert_eq!(encode_idx_images(2, 2, &images[16..]), images);
        assert_eq!(encode_idx_labels(&[7, 3]), labels);
    }

    #[test]
    fn wrong_magic_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let images = encode_idx_images(1, 1, &[5]);
        let labels = encode_idx_labels(&[0]);
        let i = write(dir.path(), "i", &images);
        let l = write(dir.path(), "l", &labels);
        let err = load_idx(&l, &i).unwrap_err();
        assert!(matches!(err, Error::Idx(IdxError::BadMagic { .. })), "{err:?}");
    }

    #[test]
    fn truncation_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let mut images = encode_idx_images(2, 2, &[1, 2, 3, 4, 5, 6, 7, 8]);
        images.truncate(images.len() - 1);
        let i = write(dir.path(), "i", &images);
        let l = write(dir.path(), "l", &encode_idx_labels(&[0, 1]));
        let err = load_idx(&i, &l).unwrap_err();
        assert!(matches!(err, Error::Idx(IdxError::Truncated { .. })), "{err:?}");

        let short_header = write(dir.path(), "h", &[0, 0, 8]);
        assert!(matches!(
            load_idx(&short_header, &l).unwrap_err(),
            Error::Idx(IdxError::Truncated { .. })
        ));
    }

    #[test]
    fn count_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let i = write(dir.path(), "i", &encode_idx_images(1, 2, &[1, 2, 3, 4]));
        let l = write(dir.path(), "l", &encode_idx_labels(&[0, 1, 1]));
        let err = load_idx(&i, &l).unwrap_err();
        assert!(matches!(
            err,
            Error::Idx(IdxError::CountMismatch { images: 2, labels: 3 })
        ));
    }
}
