//! MXB1 tensor files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"MXB1" | rank: u32 | dims: rank x u32 | data: prod(dims) x f32, row-major
//! ```
//!
//! Image batches are rank 4 (`N x C x H x W`), label batches rank 2 (`N x K`).
//! Labels are held as `f64` in memory and narrowed to `f32` on write.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use mixcut_core::{ImageBatch, LabelBatch};

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MXB1";

/// Upper bound on rank accepted when reading.
pub const MAX_RANK: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let len = element_count(&dims)?;
        if len != data.len() {
            return Err(Error::Format(format!(
                "dims {dims:?} need {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_images(images: &ImageBatch) -> Self {
        Self {
            dims: images.dims().to_vec(),
            data: images.data().to_vec(),
        }
    }

    pub fn from_labels(labels: &LabelBatch) -> Self {
        Self {
            dims: vec![labels.len(), labels.classes()],
            data: labels.data().iter().map(|&v| v as f32).collect(),
        }
    }

    /// Rank-4 tensor as an image batch (shape checked, values not).
    pub fn into_images(self) -> Result<ImageBatch> {
        match self.dims[..] {
            [n, c, h, w] => Ok(ImageBatch::new(n, c, h, w, self.data)?),
            _ => Err(Error::Format(format!(
                "image tensor must have rank 4, found dims {:?}",
                self.dims
            ))),
        }
    }

    /// Rank-2 tensor as a label batch (shape checked, values not).
    pub fn into_labels(self) -> Result<LabelBatch> {
        match self.dims[..] {
            [n, k] => Ok(LabelBatch::new(n, k, self.data.into_iter().map(f64::from).collect())?),
            _ => Err(Error::Format(format!(
                "label tensor must have rank 2, found dims {:?}",
                self.dims
            ))),
        }
    }
}

fn element_count(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format(format!("dims {dims:?} overflow")))
}

pub fn write_to<W: Write>(mut out: W, dims: &[usize], data: &[f32]) -> Result<()> {
    let len = element_count(dims)?;
    if len != data.len() {
        return Err(Error::Format(format!(
            "dims {dims:?} need {len} values, got {}",
            data.len()
        )));
    }
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")));
    out.write_all(MAGIC)?;
    out.write_all(&to_u32(dims.len())?.to_le_bytes())?;
    for &d in dims {
        out.write_all(&to_u32(d)?.to_le_bytes())?;
    }
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

pub fn read_from<R: Read>(mut input: R) -> Result<Tensor> {
    let mut magic = [0u8; 4];
    input
        .read_exact(&mut magic)
        .map_err(|_| Error::Format("file shorter than the magic bytes".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 4];
    let mut next_u32 = |what: &str| -> Result<usize> {
        input
            .read_exact(&mut word)
            .map_err(|_| Error::Format(format!("truncated header reading {what}")))?;
        Ok(u32::from_le_bytes(word) as usize)
    };
    let rank = next_u32("rank")?;
    if rank > MAX_RANK {
        return Err(Error::Format(format!("rank {rank} exceeds {MAX_RANK}")));
    }
    let dims = (0..rank).map(|_| next_u32("dims")).collect::<Result<Vec<_>>>()?;
    let len = element_count(&dims)?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != len * 4 {
        return Err(Error::Format(format!(
            "dims {dims:?} need {} data bytes, found {}",
            len * 4,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(Tensor { dims, data })
}

pub fn write_path(path: impl AsRef<Path>, dims: &[usize], data: &[f32]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_to(BufWriter::new(file), dims, data).map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        other => other,
    })
}

pub fn read_path(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_from(BufReader::new(file)).map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_images(path: impl AsRef<Path>, images: &ImageBatch) -> Result<()> {
    write_path(path, &images.dims(), images.data())
}

pub fn write_labels(path: impl AsRef<Path>, labels: &LabelBatch) -> Result<()> {
    let t = Tensor::from_labels(labels);
    write_path(path, &t.dims, &t.data)
}

pub fn read_images(path: impl AsRef<Path>) -> Result<ImageBatch> {
    read_path(path)?.into_images()
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelBatch> {
    read_path(path)?.into_labels()
}
