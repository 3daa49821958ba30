//! Batch containers.
//!
//! Constructors check shapes only. Pixel and label value ranges are checked by
//! [`validate_batch`] (or the `validate` methods), so that callers can load
//! untrusted data first and reject it with a precise error afterwards.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Tolerance on label row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// A single `C x H x W` image.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Image {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(&[channels, height, width])?;
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "image data length",
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_dims(&[channels, height, width])?;
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }
}

/// `N x C x H x W` pixel tensor, row-major.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageBatch {
    n: usize,
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl ImageBatch {
    pub fn new(n: usize, channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(&[n, channels, height, width])?;
        let expected = n * channels * height * width;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "image batch data length",
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            n,
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(n: usize, channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(
            n,
            channels,
            height,
            width,
            alloc::vec![0.0; n * channels * height * width],
        )
    }

    /// Builds a batch from `f(sample, channel, y, x)`.
    pub fn from_fn(
        n: usize,
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_dims(&[n, channels, height, width])?;
        let mut data = Vec::with_capacity(n * channels * height * width);
        for i in 0..n {
            for c in 0..channels {
                for y in 0..height {
                    for x in 0..width {
                        data.push(f(i, c, y, x));
                    }
                }
            }
        }
        Self::new(n, channels, height, width, data)
    }

    /// Stacks images of identical shape.
    pub fn from_images(images: &[Image]) -> Result<Self> {
        let first = images.first().ok_or(Error::EmptyBatch)?;
        let mut data = Vec::with_capacity(images.len() * first.data.len());
        for img in images {
            if (img.channels, img.height, img.width) != (first.channels, first.height, first.width) {
                return Err(Error::InvalidShape("images in a batch must share one shape"));
            }
            data.extend_from_slice(&img.data);
        }
        Self::new(images.len(), first.channels, first.height, first.width, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `[n, c, h, w]`.
    pub fn dims(&self) -> [usize; 4] {
        [self.n, self.channels, self.height, self.width]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Number of values in one sample (`c * h * w`).
    pub fn sample_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        let len = self.sample_len();
        &self.data[i * len..(i + 1) * len]
    }

    pub fn image(&self, i: usize) -> Image {
        Image {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.sample(i).to_vec(),
        }
    }

    pub fn get(&self, i: usize, c: usize, y: usize, x: usize) -> f32 {
        self.data[((i * self.channels + c) * self.height + y) * self.width + x]
    }

    /// Batch whose sample `i` is `self`'s sample `index[i]`.
    pub fn gather(&self, index: &[usize]) -> Result<Self> {
        if index.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut data = Vec::with_capacity(index.len() * self.sample_len());
        for &j in index {
            if j >= self.n {
                return Err(Error::DimensionMismatch {
                    what: "gather index",
                    expected: self.n,
                    found: j,
                });
            }
            data.extend_from_slice(self.sample(j));
        }
        Self::new(index.len(), self.channels, self.height, self.width, data)
    }

    pub(crate) fn same_shape(&self, other: &Self) -> Result<()> {
        for (what, a, b) in [
            ("batch size", self.n, other.n),
            ("channels", self.channels, other.channels),
            ("height", self.height, other.height),
            ("width", self.width, other.width),
        ] {
            if a != b {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: a,
                    found: b,
                });
            }
        }
        Ok(())
    }

    /// Every pixel in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        match self.data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(index) => Err(Error::ValueOutOfRange {
                index,
                value: f64::from(self.data[index]),
            }),
            None => Ok(()),
        }
    }
}

/// `N x K` soft-label matrix; every row is a probability vector.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelBatch {
    n: usize,
    classes: usize,
    data: Vec<f64>,
}

impl LabelBatch {
    pub fn new(n: usize, classes: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(&[n, classes])?;
        if data.len() != n * classes {
            return Err(Error::DimensionMismatch {
                what: "label batch data length",
                expected: n * classes,
                found: data.len(),
            });
        }
        Ok(Self { n, classes, data })
    }

    /// One-hot rows for `classes[i]` out of `k`.
    pub fn one_hot(classes: &[usize], k: usize) -> Result<Self> {
        let mut data = alloc::vec![0.0; classes.len() * k];
        for (row, &class) in classes.iter().enumerate() {
            if class >= k {
                return Err(Error::DimensionMismatch {
                    what: "class index",
                    expected: k,
                    found: class,
                });
            }
            data[row * k + class] = 1.0;
        }
        Self::new(classes.len(), k, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.classes..(i + 1) * self.classes]
    }

    pub fn gather(&self, index: &[usize]) -> Result<Self> {
        if index.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut data = Vec::with_capacity(index.len() * self.classes);
        for &j in index {
            if j >= self.n {
                return Err(Error::DimensionMismatch {
                    what: "gather index",
                    expected: self.n,
                    found: j,
                });
            }
            data.extend_from_slice(self.row(j));
        }
        Self::new(index.len(), self.classes, data)
    }

    pub(crate) fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                what: "label batch size",
                expected: self.n,
                found: other.n,
            });
        }
        if self.classes != other.classes {
            return Err(Error::DimensionMismatch {
                what: "label classes",
                expected: self.classes,
                found: other.classes,
            });
        }
        Ok(())
    }

    /// Entries in `[0, 1]`, rows summing to 1 within [`ROW_SUM_TOLERANCE`].
    pub fn validate(&self) -> Result<()> {
        if let Some(index) = self.data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::ValueOutOfRange {
                index,
                value: self.data[index],
            });
        }
        for row in 0..self.n {
            let sum: f64 = self.row(row).iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum { row, sum });
            }
        }
        Ok(())
    }
}

/// Checks that `images` and `labels` agree on `N` and satisfy their value invariants.
pub fn validate_batch(images: &ImageBatch, labels: &LabelBatch) -> Result<()> {
    if images.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels per image batch",
            expected: images.len(),
            found: labels.len(),
        });
    }
    images.validate()?;
    labels.validate()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidShape("every dimension must be at least 1"));
    }
    Ok(())
}
