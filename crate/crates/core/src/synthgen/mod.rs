//! Synthetic seam scenes with injected defects and known ground truth,
//! and scoring of inspection reports against that truth.
//!
//! A stitch of pitch `P` is drawn as a block of needle color over the
//! first quarter of each period, a block of the rule's second color over
//! the second quarter, and bare fabric over the second half. Thread
//! coverage of a conforming seam is therefore one half.
//!
//! Fabric noise is per-channel additive Gaussian drawn from
//! [`SplitMix64`] seeded with `rng_seed`, consumed pixel by pixel in
//! row-major order, red then green then blue.

mod eval;
mod fixtures;
mod rng;

pub use eval::{evaluate, span_iou, DefectMatch, EvalResult};
pub use fixtures::fixture_suite;
pub use rng::SplitMix64;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hough::{CircleParams, LineParams, Point, SeamPath};
use crate::imagekit::ImageRgb;
use crate::seamcheck::{ColorClass, DefectKind, StitchRule, StitchType};

pub const NEEDLE_RED_RGB: [u8; 3] = [200, 30, 30];
pub const BOBBIN_GREEN_RGB: [u8; 3] = [30, 150, 50];
pub const LOOPER_ORANGE_RGB: [u8; 3] = [230, 120, 20];

pub fn thread_rgb(class: ColorClass) -> Option<[u8; 3]> {
    match class {
        ColorClass::NeedleRed => Some(NEEDLE_RED_RGB),
        ColorClass::BobbinGreen => Some(BOBBIN_GREEN_RGB),
        ColorClass::LooperOrange => Some(LOOPER_ORANGE_RGB),
        ColorClass::Background => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Linear {
        p0: Point,
        p1: Point,
    },
    /// A full circle unless `arc_deg` gives start and end angles in
    /// degrees, measured like `atan2(y - cy, x - cx)`.
    Circular {
        center: Point,
        radius: f64,
        #[serde(default)]
        arc_deg: Option<(f64, f64)>,
    },
}

impl Geometry {
    pub fn seam_path(&self) -> SeamPath {
        match *self {
            Geometry::Linear { p0, p1 } => {
                let (dx, dy) = (p1.x - p0.x, p1.y - p0.y);
                let theta = dx.atan2(-dy);
                let rho = p0.x * theta.cos() + p0.y * theta.sin();
                SeamPath::Linear {
                    line: LineParams::normalized(rho, theta),
                    p0,
                    p1,
                }
            }
            Geometry::Circular {
                center,
                radius,
                arc_deg,
            } => {
                let circle = CircleParams {
                    cx: center.x,
                    cy: center.y,
                    radius,
                    score: 0,
                };
                match arc_deg {
                    None => SeamPath::Circular {
                        circle,
                        arc_start: 0.0,
                        arc_end: TAU,
                        full: true,
                    },
                    Some((a, b)) => {
                        let start = a.to_radians().rem_euclid(TAU);
                        let mut sweep = (b - a).to_radians().rem_euclid(TAU);
                        if sweep == 0.0 {
                            sweep = TAU;
                        }
                        SeamPath::Circular {
                            circle,
                            arc_start: start,
                            arc_end: start + sweep,
                            full: false,
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectedDefect {
    pub kind: DefectKind,
    /// Arclength interval on the parent path.
    pub span: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub geometry: Geometry,
    pub rule: StitchRule,
    pub thread_width: u32,
    #[serde(default)]
    pub injected: Vec<InjectedDefect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub fabric_rgb: [u8; 3],
    #[serde(default)]
    pub fabric_noise_sigma: f64,
    pub paths: Vec<PathSpec>,
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthPath {
    pub path: SeamPath,
    pub stitch_type: StitchType,
    pub pitch: f64,
    pub thread_width: u32,
    pub defects: Vec<InjectedDefect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub paths: Vec<TruthPath>,
}

impl GroundTruth {
    pub fn defect_count(&self) -> usize {
        self.paths.iter().map(|p| p.defects.len()).sum()
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.width == 0 || self.height == 0 {
            return bad("canvas must be non-empty".into());
        }
        if !(self.fabric_noise_sigma >= 0.0 && self.fabric_noise_sigma.is_finite()) {
            return bad(format!(
                "fabric_noise_sigma must be >= 0, got {}",
                self.fabric_noise_sigma
            ));
        }
        let (w, h) = (self.width as f64 - 1.0, self.height as f64 - 1.0);
        let inside = |p: Point| p.x >= 0.0 && p.y >= 0.0 && p.x <= w && p.y <= h;
        for (i, p) in self.paths.iter().enumerate() {
            if p.thread_width < 3 {
                return bad(format!("path {i}: thread_width must be >= 3, got {}", p.thread_width));
            }
            p.rule
                .validate()
                .map_err(|e| Error::SpecInvalid(format!("path {i}: {e}")))?;
            match p.geometry {
                Geometry::Linear { p0, p1 } => {
                    if !inside(p0) || !inside(p1) {
                        return bad(format!("path {i}: endpoints must lie on the canvas"));
                    }
                    if p0.dist(&p1) < 1.0 {
                        return bad(format!("path {i}: segment is shorter than 1 px"));
                    }
                }
                Geometry::Circular {
                    center,
                    radius,
                    arc_deg,
                } => {
                    if !(radius >= 1.0) {
                        return bad(format!("path {i}: radius must be >= 1"));
                    }
                    let corners = [
                        Point::new(center.x - radius, center.y - radius),
                        Point::new(center.x + radius, center.y + radius),
                    ];
                    if !corners.iter().all(|&c| inside(c)) {
                        return bad(format!("path {i}: circle must lie on the canvas"));
                    }
                    if let Some((a, b)) = arc_deg {
                        if !a.is_finite() || !b.is_finite() {
                            return bad(format!("path {i}: arc angles must be finite"));
                        }
                    }
                }
            }
            let len = p.geometry.seam_path().length();
            let mut spans: Vec<(f64, f64)> = p.injected.iter().map(|d| d.span).collect();
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            for s in &spans {
                if !(s.0 >= 0.0 && s.0 < s.1 && s.1 <= len) {
                    return bad(format!("path {i}: span [{}, {}] outside [0, {len:.1}]", s.0, s.1));
                }
            }
            if spans.windows(2).any(|w| w[1].0 < w[0].1) {
                return bad(format!("path {i}: injected spans overlap"));
            }
        }
        Ok(())
    }
}

/// Renders `spec` and returns the image with its ground truth.
pub fn render_scene(spec: &SceneSpec) -> Result<(ImageRgb, GroundTruth)> {
    spec.validate()?;
    let mut img = fabric(spec);
    for p in &spec.paths {
        draw_seam(&mut img, p);
    }
    let truth = GroundTruth {
        width: spec.width,
        height: spec.height,
        paths: spec
            .paths
            .iter()
            .map(|p| TruthPath {
                path: p.geometry.seam_path(),
                stitch_type: p.rule.stitch_type,
                pitch: p.rule.pitch,
                thread_width: p.thread_width,
                defects: p.injected.clone(),
            })
            .collect(),
    };
    Ok((img, truth))
}

fn fabric(spec: &SceneSpec) -> ImageRgb {
    let n = spec.width * spec.height;
    let sigma = spec.fabric_noise_sigma;
    let data = if sigma == 0.0 {
        vec![spec.fabric_rgb; n]
    } else {
        let mut rng = SplitMix64::new(spec.rng_seed);
        (0..n)
            .map(|_| {
                spec.fabric_rgb
                    .map(|c| (f64::from(c) + sigma * rng.next_gaussian()).round().clamp(0.0, 255.0) as u8)
            })
            .collect()
    };
    ImageRgb::new(spec.width, spec.height, data).expect("dimensions checked")
}

/// Thread color at arclength `s`, or `None` for bare fabric.
fn stitch_color(p: &PathSpec, s: f64) -> Option<ColorClass> {
    let [needle, second] = p.rule.required_colors();
    let pitch = p.rule.pitch;
    let kind = p
        .injected
        .iter()
        .find(|d| s >= d.span.0 && s < d.span.1)
        .map(|d| d.kind);
    let phase = s.rem_euclid(pitch) / pitch;
    match kind {
        Some(DefectKind::MissingStitch) => None,
        Some(DefectKind::SkippedStitch) => (phase < 0.5).then_some(needle),
        Some(DefectKind::SuperimposedSeam) => {
            // The second pass is shifted by half a pitch.
            let shifted = (phase + 0.5).fract();
            let first = |q: f64| {
                if q < 0.25 {
                    Some(needle)
                } else if q < 0.5 {
                    Some(second)
                } else {
                    None
                }
            };
            first(phase).or_else(|| first(shifted))
        }
        None => {
            if phase < 0.25 {
                Some(needle)
            } else if phase < 0.5 {
                Some(second)
            } else {
                None
            }
        }
    }
}

fn draw_seam(img: &mut ImageRgb, p: &PathSpec) {
    let path = p.geometry.seam_path();
    let len = path.length();
    let half = f64::from(p.thread_width) / 2.0;
    let (x0, y0, x1, y1) = match p.geometry {
        Geometry::Linear { p0, p1 } => (
            p0.x.min(p1.x) - half,
            p0.y.min(p1.y) - half,
            p0.x.max(p1.x) + half,
            p0.y.max(p1.y) + half,
        ),
        Geometry::Circular { center, radius, .. } => (
            center.x - radius - half,
            center.y - radius - half,
            center.x + radius + half,
            center.y + radius + half,
        ),
    };
    let clamp_x = |v: f64| v.floor().clamp(0.0, img.width() as f64 - 1.0) as usize;
    let clamp_y = |v: f64| v.floor().clamp(0.0, img.height() as f64 - 1.0) as usize;
    let (xa, xb, ya, yb) = (clamp_x(x0), clamp_x(x1 + 1.0), clamp_y(y0), clamp_y(y1 + 1.0));
    for y in ya..=yb {
        for x in xa..=xb {
            let q = Point::new(x as f64, y as f64);
            let Some((s, d)) = path_coordinates(&path, q) else {
                continue;
            };
            if d.abs() >= half || s < 0.0 || s > len {
                continue;
            }
            if let Some(rgb) = stitch_color(p, s).and_then(thread_rgb) {
                img.put(x, y, rgb);
            }
        }
    }
}

/// Arclength of the closest path point and signed distance from the path.
fn path_coordinates(path: &SeamPath, q: Point) -> Option<(f64, f64)> {
    match *path {
        SeamPath::Linear { p0, p1, .. } => {
            let len = p0.dist(&p1);
            let (ux, uy) = ((p1.x - p0.x) / len, (p1.y - p0.y) / len);
            let (vx, vy) = (q.x - p0.x, q.y - p0.y);
            Some((vx * ux + vy * uy, vx * -uy + vy * ux))
        }
        SeamPath::Circular {
            circle,
            arc_start,
            arc_end,
            full,
        } => {
            let (dx, dy) = (q.x - circle.cx, q.y - circle.cy);
            let r = dx.hypot(dy);
            if r == 0.0 {
                return None;
            }
            let phi = (dy.atan2(dx) - arc_start).rem_euclid(TAU);
            if !full && phi > arc_end - arc_start {
                return None;
            }
            Some((phi * circle.radius, r - circle.radius))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seamcheck::{default_bands, sample_path};

    const FABRIC: [u8; 3] = [220, 220, 220];

    fn line_spec(injected: Vec<InjectedDefect>) -> SceneSpec {
        SceneSpec {
            width: 200,
            height: 60,
            fabric_rgb: FABRIC,
            fabric_noise_sigma: 0.0,
            paths: vec![PathSpec {
                geometry: Geometry::Linear {
                    p0: Point::new(10.0, 30.0),
                    p1: Point::new(190.0, 30.0),
                },
                rule: StitchRule::new(StitchType::Lockstitch301, 16.0),
                thread_width: 5,
                injected,
            }],
            rng_seed: 1,
        }
    }

    #[test]
    fn conforming_scene_alternates_along_true_path() {
        let (img, truth) = render_scene(&line_spec(vec![])).unwrap();
        let seq = sample_path(&img, &truth.paths[0].path, 1.0, &default_bands()).unwrap();
        for s in &seq.samples {
            // Oracle: the period layout, sampled at integer arclength.
            let phase = s.arclength.rem_euclid(16.0);
            let expected = if phase < 4.0 {
                ColorClass::NeedleRed
            } else if phase < 8.0 {
                ColorClass::BobbinGreen
            } else {
                ColorClass::Background
            };
            assert_eq!(s.class, expected, "s={}", s.arclength);
        }
        assert!((seq.thread_fraction() - 0.5).abs() < 0.02);
    }

    #[test]
    fn missing_span_is_bare_fabric() {
        let spec = line_spec(vec![InjectedDefect {
            kind: DefectKind::MissingStitch,
            span: (48.0, 96.0),
        }]);
        let (img, _) = render_scene(&spec).unwrap();
        for x in 58..106 {
            for y in 20..40 {
                assert_eq!(img.get(x, y), FABRIC);
            }
        }
        assert_eq!(img.get(10, 30), NEEDLE_RED_RGB);
    }

    #[test]
    fn skipped_and_superimposed_patterns() {
        let spec = line_spec(vec![
            InjectedDefect {
                kind: DefectKind::SkippedStitch,
                span: (32.0, 64.0),
            },
            InjectedDefect {
                kind: DefectKind::SuperimposedSeam,
                span: (96.0, 160.0),
            },
        ]);
        let (img, _) = render_scene(&spec).unwrap();
        // Skipped: red over the whole first half of each period.
        for x in 42..50 {
            assert_eq!(img.get(x, 30), NEEDLE_RED_RGB);
        }
        assert_eq!(img.get(52, 30), FABRIC);
        // Superimposed: no bare fabric left on the path.
        for x in 106..170 {
            assert_ne!(img.get(x, 30), FABRIC, "x={x}");
        }
    }

    #[test]
    fn thread_width_is_exact() {
        let (img, _) = render_scene(&line_spec(vec![])).unwrap();
        let rows: Vec<usize> = (0..60).filter(|&y| img.get(11, y) != FABRIC).collect();
        assert_eq!(rows, vec![28, 29, 30, 31, 32]);
    }

    #[test]
    fn deterministic_noise() {
        let mut spec = line_spec(vec![]);
        spec.fabric_noise_sigma = 8.0;
        let a = render_scene(&spec).unwrap().0;
        let b = render_scene(&spec).unwrap().0;
        assert_eq!(a, b);
        spec.rng_seed = 2;
        assert_ne!(render_scene(&spec).unwrap().0, a);
    }

    #[test]
    fn circle_geometry_and_truth() {
        let spec = SceneSpec {
            width: 120,
            height: 120,
            fabric_rgb: FABRIC,
            fabric_noise_sigma: 0.0,
            paths: vec![PathSpec {
                geometry: Geometry::Circular {
                    center: Point::new(60.0, 60.0),
                    radius: 40.0,
                    arc_deg: None,
                },
                rule: StitchRule::new(StitchType::Chainstitch401, 16.0),
                thread_width: 5,
                injected: vec![],
            }],
            rng_seed: 0,
        };
        let (img, truth) = render_scene(&spec).unwrap();
        assert_eq!(img.get(100, 60), NEEDLE_RED_RGB);
        assert_eq!(img.get(60, 60), FABRIC);
        let seq = sample_path(&img, &truth.paths[0].path, 1.0, &default_bands()).unwrap();
        assert!(seq.count(ColorClass::LooperOrange) > 50);
        assert_eq!(seq.count(ColorClass::BobbinGreen), 0);
    }

    #[test]
    fn line_truth_is_consistent() {
        let path = Geometry::Linear {
            p0: Point::new(3.0, 4.0),
            p1: Point::new(50.0, 20.0),
        }
        .seam_path();
        let SeamPath::Linear { line, p0, p1 } = path else {
            unreachable!()
        };
        assert!(line.signed_distance(p0).abs() < 1e-9);
        assert!(line.signed_distance(p1).abs() < 1e-9);
    }

    #[test]
    fn invalid_specs() {
        let mut s = line_spec(vec![]);
        s.paths[0].thread_width = 1;
        assert!(matches!(render_scene(&s), Err(Error::SpecInvalid(_))));
        let s = line_spec(vec![
            InjectedDefect {
                kind: DefectKind::MissingStitch,
                span: (10.0, 50.0),
            },
            InjectedDefect {
                kind: DefectKind::SkippedStitch,
                span: (40.0, 60.0),
            },
        ]);
        assert!(render_scene(&s).is_err());
        let s = line_spec(vec![InjectedDefect {
            kind: DefectKind::MissingStitch,
            span: (10.0, 500.0),
        }]);
        assert!(render_scene(&s).is_err());
        let mut s = line_spec(vec![]);
        s.paths[0].geometry = Geometry::Linear {
            p0: Point::new(-1.0, 0.0),
            p1: Point::new(10.0, 0.0),
        };
        assert!(render_scene(&s).is_err());
        let json = r#"{"width": 10, "height": 10, "fabric_rgb": [1,2,3], "paths": [], "bogus": 1}"#;
        assert!(serde_json::from_str::<SceneSpec>(json).is_err());
    }
}
