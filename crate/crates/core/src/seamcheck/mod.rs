//! Thread-color classification, sampling along recognized paths, stitch
//! rule validation and the end-to-end inspection pipeline.

mod annotate;
mod config;
mod pipeline;
mod rules;
mod sampling;

pub use annotate::annotate;
pub use config::{
    CircleConfig, GeometryMode, InspectionConfig, LineConfig, PathConfig, SamplingConfig, SmoothingConfig,
};
pub use pipeline::{inspect, inspect_with_artifacts, Artifacts, InspectedPath, InspectionReport, Verdict};
pub use rules::{
    detect_missing, detect_skipped, detect_superimposed, merge_defects, BoundingBox, Defect, DefectKind, StitchRule,
    StitchType,
};
pub use sampling::{sample_path, Sample, SampleSequence};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagekit::HsvPixel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorClass {
    NeedleRed,
    BobbinGreen,
    LooperOrange,
    Background,
}

/// HSV decision region for one thread color. The hue interval is closed
/// and wraps through 360 when `hue_lo > hue_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorBand {
    pub class: ColorClass,
    pub hue_lo: f64,
    pub hue_hi: f64,
    pub s_min: f64,
    pub v_min: f64,
}

impl ColorBand {
    pub fn contains(&self, p: &HsvPixel) -> bool {
        if p.s < self.s_min || p.v < self.v_min {
            return false;
        }
        if self.hue_lo <= self.hue_hi {
            p.h >= self.hue_lo && p.h <= self.hue_hi
        } else {
            p.h >= self.hue_lo || p.h <= self.hue_hi
        }
    }

    fn hue_segments(&self) -> Vec<(f64, f64)> {
        if self.hue_lo <= self.hue_hi {
            vec![(self.hue_lo, self.hue_hi)]
        } else {
            vec![(self.hue_lo, 360.0), (0.0, self.hue_hi)]
        }
    }

    fn overlaps(&self, other: &ColorBand) -> bool {
        // Saturation and value are lower bounds only, so two bands share
        // (h, s, v) points exactly when their hue intervals meet.
        self.hue_segments()
            .iter()
            .any(|a| other.hue_segments().iter().any(|b| a.0 <= b.1 && b.0 <= a.1))
    }
}

/// Default bands centered on the nominal thread hues.
pub fn default_bands() -> Vec<ColorBand> {
    let band = |class, hue_lo, hue_hi| ColorBand {
        class,
        hue_lo,
        hue_hi,
        s_min: 0.25,
        v_min: 0.15,
    };
    vec![
        band(ColorClass::NeedleRed, 345.0, 15.0),
        band(ColorClass::BobbinGreen, 90.0, 150.0),
        band(ColorClass::LooperOrange, 16.0, 45.0),
    ]
}

/// Rejects malformed or overlapping bands.
pub fn validate_bands(bands: &[ColorBand]) -> Result<()> {
    for b in bands {
        if b.class == ColorClass::Background {
            return Err(Error::InvalidConfig("a band cannot have class background".into()));
        }
        let hue_ok = |h: f64| (0.0..360.0).contains(&h);
        if !hue_ok(b.hue_lo) || !hue_ok(b.hue_hi) {
            return Err(Error::InvalidConfig(format!(
                "{:?} hue bounds must lie in [0, 360)",
                b.class
            )));
        }
        if !(b.s_min > 0.0 && b.s_min <= 1.0) || !(0.0..=1.0).contains(&b.v_min) {
            return Err(Error::InvalidConfig(format!(
                "{:?} needs 0 < s_min <= 1 and 0 <= v_min <= 1",
                b.class
            )));
        }
    }
    for (i, a) in bands.iter().enumerate() {
        for b in &bands[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::OverlappingBands(format!("{:?} and {:?}", a.class, b.class)));
            }
        }
    }
    Ok(())
}

/// Class of the band containing `p`, or background.
pub fn classify_pixel(p: &HsvPixel, bands: &[ColorBand]) -> ColorClass {
    bands
        .iter()
        .find(|b| b.contains(p))
        .map_or(ColorClass::Background, |b| b.class)
}
