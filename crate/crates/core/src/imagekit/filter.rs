use rayon::prelude::*;

use super::{ImageGray, ImageRgb};
use crate::error::{Error, Result};

/// Rec. 601 luma, rounded to nearest.
pub fn to_grayscale(img: &ImageRgb) -> ImageGray {
    let data = img
        .pixels()
        .iter()
        .map(|&[r, g, b]| {
            let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    ImageGray::new(img.width(), img.height(), data).expect("same dimensions")
}

/// Normalized 1-D Gaussian weights for offsets `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Separable Gaussian convolution with edge-clamp borders.
///
/// Both passes accumulate in `f64`; the result is rounded once at the end.
pub fn gaussian_smooth(img: &ImageGray, sigma: f64, radius: usize) -> Result<ImageGray> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if radius == 0 {
        return Err(Error::InvalidParameter("radius must be >= 1".into()));
    }
    let (w, h) = (img.width(), img.height());
    let size = 2 * radius + 1;
    let dim = w.min(h);
    if size > dim {
        return Err(Error::KernelTooLarge { size, dim });
    }
    let kernel = gaussian_kernel(sigma, radius);
    let r = radius as isize;
    let src = img.pixels();

    let mut horiz = vec![0.0f64; w * h];
    horiz.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let line = &src[y * w..(y + 1) * w];
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sx = (x as isize + i as isize - r).clamp(0, w as isize - 1) as usize;
                acc += k * f64::from(line[sx]);
            }
            *out = acc;
        }
    });

    let mut data = vec![0u8; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sy = (y as isize + i as isize - r).clamp(0, h as isize - 1) as usize;
                acc += k * horiz[sy * w + x];
            }
            *out = acc.round().clamp(0.0, 255.0) as u8;
        }
    });
    ImageGray::new(w, h, data)
}
