//! MNIST IDX reader.

use std::path::Path;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::experiments::rng_from_seed;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Images scaled to `[0, 1]` by `/255`, with class ids in `[0, 10)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxDataset {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `len() * rows * cols` values.
    pub pixels: Vec<f64>,
    pub labels: Vec<usize>,
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| {
            Error::data(format!(
                "{what}: truncated header at byte offset {offset} (file has {} bytes)",
                bytes.len()
            ))
        })
}

fn check_len(bytes: &[u8], expected: usize, what: &str) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::data(format!(
            "{what}: expected {expected} bytes, found {} (mismatch at byte offset {})",
            bytes.len(),
            bytes.len().min(expected)
        )));
    }
    Ok(())
}

/// Parses an image file: magic 2051, count, rows, cols, then pixels.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let magic = read_u32(bytes, 0, "image file")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::data(format!(
            "image file: bad magic {magic} at byte offset 0 (expected 2051)"
        )));
    }
    let count = read_u32(bytes, 4, "image file")? as usize;
    let rows = read_u32(bytes, 8, "image file")? as usize;
    let cols = read_u32(bytes, 12, "image file")? as usize;
    check_len(bytes, 16 + count * rows * cols, "image file")?;
    Ok((rows, cols, bytes[16..].to_vec()))
}

/// Parses a label file: magic 2049, count, then one byte per item in `[0, 9]`.
pub fn parse_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let magic = read_u32(bytes, 0, "label file")?;
    if magic != LABEL_MAGIC {
        return Err(Error::data(format!(
            "label file: bad magic {magic} at byte offset 0 (expected 2049)"
        )));
    }
    let count = read_u32(bytes, 4, "label file")? as usize;
    check_len(bytes, 8 + count, "label file")?;
    bytes[8..]
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if b <= 9 {
                Ok(b as usize)
            } else {
                Err(Error::data(format!(
                    "label file: label {b} out of range at byte offset {}",
                    8 + i
                )))
            }
        })
        .collect()
}

impl IdxDataset {
    pub fn from_bytes(images: &[u8], labels: &[u8]) -> Result<Self> {
        let (rows, cols, raw) = parse_images(images)?;
        let labels = parse_labels(labels)?;
        let count = raw.len() / (rows * cols).max(1);
        if count != labels.len() {
            return Err(Error::data(format!(
                "image count {count} differs from label count {}",
                labels.len()
            )));
        }
        Ok(IdxDataset {
            rows,
            cols,
            pixels: raw.iter().map(|&b| b as f64 / 255.0).collect(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[f64] {
        &self.pixels[i * self.dim()..(i + 1) * self.dim()]
    }

    /// Concatenates datasets with equal image shape (e.g. train + test).
    pub fn concat(mut self, other: IdxDataset) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::data(
                "cannot concatenate IDX sets with different image sizes",
            ));
        }
        self.pixels.extend(other.pixels);
        self.labels.extend(other.labels);
        Ok(self)
    }

    /// `k` items drawn uniformly without replacement, kept in original order.
    pub fn subsample(&self, k: usize, seed: u64) -> Result<Self> {
        if k > self.len() {
            return Err(Error::config(format!(
                "cannot subsample {k} items from {}",
                self.len()
            )));
        }
        let mut idx = sample(&mut rng_from_seed(seed), self.len(), k).into_vec();
        idx.sort_unstable();
        let mut pixels = Vec::with_capacity(k * self.dim());
        for &i in &idx {
            pixels.extend_from_slice(self.image(i));
        }
        Ok(IdxDataset {
            rows: self.rows,
            cols: self.cols,
            pixels,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<IdxDataset> {
    let images = std::fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    IdxDataset::from_bytes(&images, &labels)
}

/// Encodes a dataset in IDX form; used for fixtures.
pub fn encode_idx(rows: usize, cols: usize, images: &[u8], labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + images.len());
    for v in [IMAGE_MAGIC, labels.len() as u32, rows as u32, cols as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    img.extend_from_slice(images);
    let mut lab = Vec::with_capacity(8 + labels.len());
    for v in [LABEL_MAGIC, labels.len() as u32] {
        lab.extend_from_slice(&v.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    (img, lab)
}
