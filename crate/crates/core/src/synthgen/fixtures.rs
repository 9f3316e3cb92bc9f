use super::{Geometry, InjectedDefect, PathSpec, SceneSpec};
use crate::hough::Point;
use crate::seamcheck::{DefectKind, StitchRule, StitchType};

const PITCH: f64 = 16.0;

/// The reference suite: linear and circular seams in both stitch types,
/// conforming and with each defect kind. Spans are whole stitches inside
/// the path. All scenes share `noise_sigma` and a per-scene seed.
pub fn fixture_suite(noise_sigma: f64) -> Vec<(String, SceneSpec)> {
    use DefectKind::*;
    use StitchType::*;
    let line_a = Geometry::Linear {
        p0: Point::new(30.0, 60.0),
        p1: Point::new(290.0, 110.0),
    };
    let line_b = Geometry::Linear {
        p0: Point::new(60.0, 220.0),
        p1: Point::new(240.0, 30.0),
    };
    let circle_a = Geometry::Circular {
        center: Point::new(160.0, 120.0),
        radius: 64.0,
        arc_deg: None,
    };
    let circle_b = Geometry::Circular {
        center: Point::new(150.0, 125.0),
        radius: 55.0,
        arc_deg: None,
    };
    let d = |kind, start: f64, stitches: f64| InjectedDefect {
        kind,
        span: (start * PITCH, (start + stitches) * PITCH),
    };
    let cases: Vec<(&str, Geometry, StitchType, Vec<InjectedDefect>)> = vec![
        ("line_301_conforming", line_a, Lockstitch301, vec![]),
        (
            "line_301_missing",
            line_a,
            Lockstitch301,
            vec![d(MissingStitch, 5.0, 3.0)],
        ),
        (
            "line_301_superimposed",
            line_b,
            Lockstitch301,
            vec![d(SuperimposedSeam, 6.0, 4.0)],
        ),
        ("line_401_conforming", line_b, Chainstitch401, vec![]),
        (
            "line_401_skipped",
            line_a,
            Chainstitch401,
            vec![d(SkippedStitch, 8.0, 3.0)],
        ),
        (
            "line_401_missing_skipped",
            line_b,
            Chainstitch401,
            vec![d(MissingStitch, 2.0, 3.0), d(SkippedStitch, 10.0, 3.0)],
        ),
        ("circle_301_conforming", circle_a, Lockstitch301, vec![]),
        (
            "circle_301_skipped",
            circle_a,
            Lockstitch301,
            vec![d(SkippedStitch, 9.0, 3.0)],
        ),
        (
            "circle_301_superimposed",
            circle_b,
            Lockstitch301,
            vec![d(SuperimposedSeam, 4.0, 4.0)],
        ),
        ("circle_401_conforming", circle_b, Chainstitch401, vec![]),
        (
            "circle_401_missing",
            circle_a,
            Chainstitch401,
            vec![d(MissingStitch, 14.0, 3.0)],
        ),
        (
            "circle_401_superimposed",
            circle_a,
            Chainstitch401,
            vec![d(SuperimposedSeam, 12.0, 4.0)],
        ),
    ];
    cases
        .into_iter()
        .enumerate()
        .map(|(i, (name, geometry, stitch, injected))| {
            let spec = SceneSpec {
                width: 320,
                height: 240,
                fabric_rgb: [220, 220, 220],
                fabric_noise_sigma: noise_sigma,
                paths: vec![PathSpec {
                    geometry,
                    rule: StitchRule::new(stitch, PITCH),
                    thread_width: 5,
                    injected,
                }],
                rng_seed: 0x5EA3_0000 + i as u64,
            };
            (name.to_string(), spec)
        })
        .collect()
}
