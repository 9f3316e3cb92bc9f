//! Pixel buffers, image file I/O, grayscale conversion, Gaussian smoothing
//! and RGB to HSV conversion.
//!
//! Rasters are row-major with the origin at the top-left corner, x growing
//! to the right and y growing downwards.

mod codec;
mod filter;
mod hsv;

pub use codec::{decode_image, encode_image, encode_pgm, encode_png};
pub use filter::{gaussian_kernel, gaussian_smooth, to_grayscale};
pub use hsv::{hsv_to_rgb, rgb_to_hsv, HsvPixel};

use crate::error::{Error, Result};

/// 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    /// Image of the given size filled with one color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    /// Bounds-checked access with signed coordinates.
    pub fn get_checked(&self, x: i64, y: i64) -> Option<[u8; 3]> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.data[y * self.width + x] = rgb;
    }

    pub fn into_pixels(self) -> Vec<[u8; 3]> {
        self.data
    }
}

/// 8-bit single-channel raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGray {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ImageGray {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn put(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::InvalidImage("dimensions overflow".into()))?;
    if len != expected {
        return Err(Error::InvalidImage(format!(
            "expected {expected} pixels for {width}x{height}, got {len}"
        )));
    }
    Ok(())
}
