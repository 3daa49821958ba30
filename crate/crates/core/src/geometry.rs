//! Square cut regions and the binary masks they rasterize to.
//!
//! A region with intended area ratio `beta = 1 - eta` has side lengths
//! `w * sqrt(beta)` by `h * sqrt(beta)` around a center `(cx, cy)`. Its bounds are
//!
//! ```text
//! x1 = round(clip(cx - side_w / 2, 0, w))    x2 = round(clip(cx + side_w / 2, 0, w))
//! y1 = round(clip(cy - side_h / 2, 0, h))    y2 = round(clip(cy + side_h / 2, 0, h))
//! ```
//!
//! with rounding half away from zero, applied after clipping. Bounds are
//! half-open, so a region covers `[x1, x2) x [y1, y2)`. Regions that hit the
//! border are clipped, which is why the effective area can fall below `beta`.

use alloc::vec::Vec;

use crate::{Error, Result, RngStream};

/// Half-open pixel rectangle `[x1, x2) x [y1, y2)` inside a `width x height` image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutRegion {
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
    pub width: usize,
    pub height: usize,
}

impl CutRegion {
    pub fn new(x1: usize, x2: usize, y1: usize, y2: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidShape("region image dimensions must be at least 1"));
        }
        if x1 > x2 || x2 > width || y1 > y2 || y2 > height {
            return Err(Error::InvalidShape(
                "region bounds must satisfy 0 <= x1 <= x2 <= w and 0 <= y1 <= y2 <= h",
            ));
        }
        Ok(Self {
            x1,
            x2,
            y1,
            y2,
            width,
            height,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            x1: 0,
            x2: 0,
            y1: 0,
            y2: 0,
            width,
            height,
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x1: 0,
            x2: width,
            y1: 0,
            y2: height,
            width,
            height,
        }
    }

    pub fn area(&self) -> usize {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.x1 <= x && x < self.x2 && self.y1 <= y && y < self.y2
    }

    /// Fraction of the image the region actually covers.
    pub fn effective_area_ratio(&self) -> f64 {
        self.area() as f64 / (self.width * self.height) as f64
    }

    pub fn to_mask(&self) -> BinaryMask {
        region_to_mask(self)
    }

    /// Whether clipping at the image border changed any bound.
    pub fn touches_border(&self) -> bool {
        self.x1 == 0 || self.y1 == 0 || self.x2 == self.width || self.y2 == self.height
    }
}

/// `H x W` mask of zeros and ones, broadcast over samples and channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn ones(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: alloc::vec![1; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn zero_count(&self) -> usize {
        self.data.iter().filter(|&&m| m == 0).count()
    }
}

/// Side lengths `(w * sqrt(1 - eta), h * sqrt(1 - eta))` of an unclipped region.
pub fn side_lengths(width: usize, height: usize, eta: f64) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let edge = libm::sqrt(1.0 - eta);
    Ok((width as f64 * edge, height as f64 * edge))
}

/// Region for a given center, clipped and rounded.
pub fn cut_region_at(width: usize, height: usize, eta: f64, cx: f64, cy: f64) -> Result<CutRegion> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidShape("image dimensions must be at least 1"));
    }
    if !cx.is_finite() || !cy.is_finite() {
        return Err(Error::InvalidShape("region center must be finite"));
    }
    let (side_w, side_h) = side_lengths(width, height, eta)?;
    let (w, h) = (width as f64, height as f64);
    let bound = |v: f64, max: f64| libm::round(v.clamp(0.0, max)) as usize;
    Ok(CutRegion {
        x1: bound(cx - side_w / 2.0, w),
        x2: bound(cx + side_w / 2.0, w),
        y1: bound(cy - side_h / 2.0, h),
        y2: bound(cy + side_h / 2.0, h),
        width,
        height,
    })
}

/// Draws `cx ~ U(0, w)` then `cy ~ U(0, h)` (two draws) and builds the region.
pub fn sample_cut_region(rng: &mut RngStream, width: usize, height: usize, eta: f64) -> Result<CutRegion> {
    check_eta(eta)?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidShape("image dimensions must be at least 1"));
    }
    let cx = rng.sample_uniform(0.0, width as f64)?;
    let cy = rng.sample_uniform(0.0, height as f64)?;
    cut_region_at(width, height, eta, cx, cy)
}

/// Like [`sample_cut_region`] but draws the center so the unclipped square
/// stays inside the image: `cx ~ U(side_w/2, w - side_w/2)`, then `cy`.
pub fn sample_interior_cut_region(rng: &mut RngStream, width: usize, height: usize, eta: f64) -> Result<CutRegion> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidShape("image dimensions must be at least 1"));
    }
    let (side_w, side_h) = side_lengths(width, height, eta)?;
    let cx = rng.sample_uniform(side_w / 2.0, width as f64 - side_w / 2.0)?;
    let cy = rng.sample_uniform(side_h / 2.0, height as f64 - side_h / 2.0)?;
    cut_region_at(width, height, eta, cx, cy)
}

/// All ones except the region rectangle, which is all zeros.
pub fn region_to_mask(region: &CutRegion) -> BinaryMask {
    let mut mask = BinaryMask::ones(region.height, region.width);
    for y in region.y1..region.y2 {
        let row = y * region.width;
        mask.data[row + region.x1..row + region.x2].fill(0);
    }
    mask
}

/// `(x2 - x1)(y2 - y1) / (w h)`.
pub fn effective_area_ratio(region: &CutRegion) -> f64 {
    region.effective_area_ratio()
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidRatio(eta));
    }
    Ok(())
}
