//! IDX container: big-endian `u32` magic (`0x0803` images, `0x0801`
//! labels), big-endian `u32` dimension sizes, then raw unsigned bytes.

use std::path::Path;

use super::{DataError, Dataset, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32> {
        let chunk = self.take(4)?;
        Ok(u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(DataError::Truncated)?;
        let chunk = self.bytes.get(self.pos..end).ok_or(DataError::Truncated)?;
        self.pos = end;
        Ok(chunk)
    }
}

fn read_header(bytes: &[u8], magic: u32, ndims: usize) -> Result<(Vec<usize>, &[u8])> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < 4 {
        return Err(DataError::Truncated);
    }
    if r.u32()? != magic {
        return Err(DataError::NotIdx);
    }
    let dims = (0..ndims).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    let count = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(DataError::Truncated)?;
    let payload = r.take(count)?;
    Ok((dims, payload))
}

/// Decodes an image/label pair already in memory. Pixels are scaled by
/// `1/255`; the class count is `max(label) + 1`, at least 2.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let (img_dims, pixels) = read_header(images, IMAGES_MAGIC, 3)?;
    let (lbl_dims, label_bytes) = read_header(labels, LABELS_MAGIC, 1)?;
    let (n, rows, cols) = (img_dims[0], img_dims[1], img_dims[2]);
    if n != lbl_dims[0] {
        return Err(DataError::CountMismatch { images: n, labels: lbl_dims[0] });
    }
    let dim = rows * cols;
    if dim == 0 {
        return Err(DataError::Invalid("images have zero pixels".into()));
    }
    let inputs = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = label_bytes.iter().map(|&b| b as usize).collect();
    let num_classes = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    Dataset::new(inputs, labels, dim, num_classes)
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let read = |p: &Path| std::fs::read(p).map_err(|source| DataError::Io { path: p.display().to_string(), source });
    let images = read(images_path.as_ref())?;
    let labels = read(labels_path.as_ref())?;
    parse_idx(&images, &labels)
}

/// Encodes a dataset as `(images, labels)` IDX bytes with the given image
/// shape. Inputs are quantized to `round(255 x)`.
pub fn encode_idx(ds: &Dataset, rows: usize, cols: usize) -> Result<(Vec<u8>, Vec<u8>)> {
    if rows * cols != ds.dim() {
        return Err(DataError::Invalid(format!("{rows}x{cols} does not match dimension {}", ds.dim())));
    }
    if ds.num_classes() > 256 {
        return Err(DataError::Invalid("labels must fit in one byte".into()));
    }
    let n = ds.len() as u32;
    let mut images = Vec::with_capacity(16 + ds.inputs().len());
    images.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [n, rows as u32, cols as u32] {
        images.extend_from_slice(&d.to_be_bytes());
    }
    images.extend(ds.inputs().iter().map(|x| (x * 255.0).round() as u8));
    let mut labels = Vec::with_capacity(8 + ds.len());
    labels.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&n.to_be_bytes());
    labels.extend(ds.labels().iter().map(|&l| l as u8));
    Ok((images, labels))
}
