//! PNG contact sheets of augmented samples.
//!
//! Cells are laid out row-major with a fixed black border of [`PAD`] pixels
//! around and between them, so an `r x c` grid of `h x w` samples is
//! `(r*h + (r+1)*PAD)` pixels tall and `(c*w + (c+1)*PAD)` wide.
//! Grayscale samples are replicated to RGB; three-channel samples are used as is.

use std::path::Path;

use image::{Rgb, RgbImage};
use mixcut_core::ImageBatch;

use crate::{Error, Result};

pub const PAD: usize = 2;

/// `(width, height)` of the rendered grid.
pub fn grid_size(rows: usize, cols: usize, height: usize, width: usize) -> (usize, usize) {
    (cols * width + (cols + 1) * PAD, rows * height + (rows + 1) * PAD)
}

/// `round(v * 255)` after clamping to `[0, 1]`.
pub fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn render_grid(images: &ImageBatch, rows: usize, cols: usize) -> Result<RgbImage> {
    if rows == 0 || cols == 0 {
        return Err(Error::Usage("grid must have at least one row and column".into()));
    }
    if rows * cols > images.len() {
        return Err(Error::Usage(format!(
            "grid {rows}x{cols} needs {} samples, only {} available",
            rows * cols,
            images.len()
        )));
    }
    let [_, c, h, w] = images.dims();
    if c != 1 && c != 3 {
        return Err(Error::Usage(format!("cannot preview {c}-channel images")));
    }
    let (gw, gh) = grid_size(rows, cols, h, w);
    let (gw, gh) = (
        u32::try_from(gw).map_err(|_| Error::Usage("grid too wide".into()))?,
        u32::try_from(gh).map_err(|_| Error::Usage("grid too tall".into()))?,
    );
    let mut out = RgbImage::new(gw, gh);
    for cell in 0..rows * cols {
        let (r, col) = (cell / cols, cell % cols);
        let top = PAD + r * (h + PAD);
        let left = PAD + col * (w + PAD);
        for y in 0..h {
            for x in 0..w {
                let px = if c == 1 {
                    let g = quantize(images.get(cell, 0, y, x));
                    [g, g, g]
                } else {
                    std::array::from_fn(|ch| quantize(images.get(cell, ch, y, x)))
                };
                out.put_pixel((left + x) as u32, (top + y) as u32, Rgb(px));
            }
        }
    }
    Ok(out)
}

pub fn save_png(image: &RgbImage, path: &Path) -> Result<()> {
    image
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => Error::io(path, source),
            other => Error::Image(other),
        })
}
