use serde::{Deserialize, Serialize};

use super::rules::{StitchRule, StitchType};
use super::{default_bands, validate_bands, ColorBand};
use crate::binarization::Polarity;
use crate::error::{Error, Result};
use crate::hough::CircleSearch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryMode {
    Lines,
    Circles,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    pub sigma: f64,
    pub radius: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { sigma: 1.0, radius: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineConfig {
    pub theta_step_deg: f64,
    pub rho_step: f64,
    pub vote_threshold: u32,
    pub nms_radius: usize,
    pub max_paths: usize,
    /// Interior stretches without support longer than this are reported
    /// as diagnostics.
    pub gap_tolerance: f64,
}

impl Default for LineConfig {
    fn default() -> Self {
        Self {
            theta_step_deg: 1.0,
            rho_step: 1.0,
            vote_threshold: 55,
            nms_radius: 2,
            max_paths: 8,
            gap_tolerance: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    pub r_min: u32,
    pub r_max: u32,
    pub r_step: u32,
    pub vote_fraction: f64,
    pub max_paths: usize,
    /// Smallest angular gap in degrees that makes a circle an arc.
    pub min_arc_gap_deg: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        Self {
            r_min: 20,
            r_max: 80,
            r_step: 1,
            vote_fraction: 0.35,
            max_paths: 4,
            min_arc_gap_deg: 90.0,
        }
    }
}

impl CircleConfig {
    pub fn search(&self) -> CircleSearch {
        CircleSearch {
            r_min: self.r_min,
            r_max: self.r_max,
            r_step: self.r_step,
            vote_fraction: self.vote_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub step: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { step: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    /// Half-width of the band used to refine a Hough candidate.
    pub band_half_width: f64,
    /// Candidates closer than this (px) and `duplicate_angle_deg` to a
    /// stronger path are treated as the same seam.
    pub duplicate_distance: f64,
    pub duplicate_angle_deg: f64,
    /// Paths whose samples are mostly fabric are not seams.
    pub min_thread_fraction: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            band_half_width: 4.0,
            duplicate_distance: 8.0,
            duplicate_angle_deg: 5.0,
            min_thread_fraction: 0.1,
        }
    }
}

/// Complete set of inspection parameters. Every field has a default, so
/// a config file only needs the values it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InspectionConfig {
    pub polarity: Polarity,
    pub smoothing: SmoothingConfig,
    pub geometry: GeometryMode,
    pub lines: LineConfig,
    pub circles: CircleConfig,
    pub sampling: SamplingConfig,
    pub path: PathConfig,
    pub bands: Vec<ColorBand>,
    pub rules: Vec<StitchRule>,
}

impl Default for InspectionConfig {
    fn default() -> Self {
        Self {
            polarity: Polarity::DarkForeground,
            smoothing: SmoothingConfig::default(),
            geometry: GeometryMode::Both,
            lines: LineConfig::default(),
            circles: CircleConfig::default(),
            sampling: SamplingConfig::default(),
            path: PathConfig::default(),
            bands: default_bands(),
            rules: vec![
                StitchRule::new(StitchType::Lockstitch301, 16.0),
                StitchRule::new(StitchType::Chainstitch401, 16.0),
            ],
        }
    }
}

impl InspectionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        validate_bands(&self.bands)?;
        if self.rules.is_empty() {
            return bad("at least one stitch rule is required");
        }
        for r in &self.rules {
            r.validate()?;
        }
        if !(self.smoothing.sigma > 0.0) {
            return bad("smoothing.sigma must be > 0");
        }
        if !(self.lines.theta_step_deg > 0.0 && self.lines.theta_step_deg <= 90.0) {
            return bad("lines.theta_step_deg must be in (0, 90]");
        }
        if !(self.lines.rho_step > 0.0) {
            return bad("lines.rho_step must be > 0");
        }
        if self.lines.vote_threshold == 0 {
            return bad("lines.vote_threshold must be > 0");
        }
        self.circles
            .search()
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if !(self.sampling.step > 0.0) {
            return bad("sampling.step must be > 0");
        }
        if !(self.path.band_half_width > 0.0) {
            return bad("path.band_half_width must be > 0");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
