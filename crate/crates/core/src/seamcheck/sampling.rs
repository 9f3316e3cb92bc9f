use serde::{Deserialize, Serialize};

use super::{classify_pixel, ColorBand, ColorClass};
use crate::error::{Error, Result};
use crate::hough::{Point, SeamPath};
use crate::imagekit::{rgb_to_hsv, ImageRgb};

/// Perpendicular offsets of the 5x1 window, nearest to the path first.
const WINDOW: [i32; 5] = [0, -1, 1, -2, 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub position: Point,
    pub arclength: f64,
    pub class: ColorClass,
}

/// Classified samples taken every `step` pixels of arclength.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    pub path: SeamPath,
    pub step: f64,
    pub image_width: usize,
    pub image_height: usize,
    pub samples: Vec<Sample>,
}

impl SampleSequence {
    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.arclength)
    }

    /// Arclength just past the last sample, capped at the path length.
    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| {
            (s.arclength + self.step).min(self.path.length().max(s.arclength))
        })
    }

    pub fn thread_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let thread = self
            .samples
            .iter()
            .filter(|s| s.class != ColorClass::Background)
            .count();
        thread as f64 / self.samples.len() as f64
    }

    pub fn count(&self, class: ColorClass) -> usize {
        self.samples.iter().filter(|s| s.class == class).count()
    }
}

/// Samples `path` every `step` pixels. At each sample the five pixels
/// centered on the path along its normal are classified and the most
/// frequent thread class wins; ties go to the class of the pixel nearest
/// the path, and a window of pure background yields background.
///
/// Samples whose center falls outside the image are dropped from both ends
/// of the sequence; interior window pixels outside the image count as
/// background.
pub fn sample_path(img: &ImageRgb, path: &SeamPath, step: f64, bands: &[ColorBand]) -> Result<SampleSequence> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample step must be > 0, got {step}")));
    }
    let len = path.length();
    let count = if path.is_full_circle() {
        // The last sample stops short of the starting point.
        ((len / step) - 1e-9).ceil().max(1.0) as usize
    } else {
        (len / step + 1e-9).floor() as usize + 1
    };
    let inside = |p: Point| {
        let (x, y) = (p.x.round(), p.y.round());
        x >= 0.0 && y >= 0.0 && x < img.width() as f64 && y < img.height() as f64
    };

    let mut samples: Vec<Sample> = (0..count)
        .map(|k| {
            let s = k as f64 * step;
            let position = path.point_at(s);
            let normal = path.normal_at(s);
            Sample {
                position,
                arclength: s,
                class: classify_window(img, position, normal, bands),
            }
        })
        .collect();
    let first = samples.iter().position(|s| inside(s.position));
    let last = samples.iter().rposition(|s| inside(s.position));
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::PathOutsideImage);
    };
    samples.truncate(last + 1);
    samples.drain(..first);
    Ok(SampleSequence {
        path: *path,
        step,
        image_width: img.width(),
        image_height: img.height(),
        samples,
    })
}

fn classify_window(img: &ImageRgb, center: Point, normal: (f64, f64), bands: &[ColorBand]) -> ColorClass {
    let mut classes = [ColorClass::Background; 5];
    let mut counts = [0usize; 3];
    let index = |c: ColorClass| match c {
        ColorClass::NeedleRed => Some(0),
        ColorClass::BobbinGreen => Some(1),
        ColorClass::LooperOrange => Some(2),
        ColorClass::Background => None,
    };
    for (slot, &k) in classes.iter_mut().zip(WINDOW.iter()) {
        let k = f64::from(k);
        let x = (center.x + k * normal.0).round() as i64;
        let y = (center.y + k * normal.1).round() as i64;
        if let Some([r, g, b]) = img.get_checked(x, y) {
            *slot = classify_pixel(&rgb_to_hsv(r, g, b), bands);
            if let Some(i) = index(*slot) {
                counts[i] += 1;
            }
        }
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return ColorClass::Background;
    }
    classes
        .iter()
        .copied()
        .find(|&c| index(c).is_some_and(|i| counts[i] == best))
        .unwrap_or(ColorClass::Background)
}
