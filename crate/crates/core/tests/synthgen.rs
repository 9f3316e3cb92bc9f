use seamcheck::hough::{Point, SeamPath};
use seamcheck::imagekit::encode_image;
use seamcheck::seamcheck::{
    inspect, BoundingBox, Defect, DefectKind, InspectedPath, InspectionConfig, InspectionReport, StitchRule,
    StitchType, Verdict,
};
use seamcheck::synthgen::{
    evaluate, render_scene, span_iou, Geometry, InjectedDefect, PathSpec, SceneSpec, SplitMix64, BOBBIN_GREEN_RGB,
    NEEDLE_RED_RGB,
};
use seamcheck::Error;

fn horizontal(injected: Vec<InjectedDefect>) -> SceneSpec {
    SceneSpec {
        width: 200,
        height: 60,
        fabric_rgb: [210, 210, 205],
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
        rng_seed: 7,
    }
}

fn report_with(path: SeamPath, defects: Vec<Defect>) -> InspectionReport {
    InspectionReport {
        image_id: "t".into(),
        threshold: Some(100),
        paths: vec![InspectedPath {
            path,
            score: 100,
            rule: StitchRule::new(StitchType::Lockstitch301, 16.0),
            thread_fraction: 1.0,
        }],
        verdict: if defects.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        defects,
        failure: None,
        diagnostics: vec![],
        params: InspectionConfig::default(),
    }
}

fn defect(kind: DefectKind, span: (f64, f64)) -> Defect {
    Defect {
        kind,
        path_index: 0,
        span,
        bbox: BoundingBox {
            x0: 0,
            y0: 0,
            x1: 1,
            y1: 1,
        },
        detail: String::new(),
    }
}

#[test]
fn same_spec_gives_identical_bytes() {
    let mut spec = horizontal(vec![]);
    spec.fabric_noise_sigma = 10.0;
    let a = encode_image(&render_scene(&spec).unwrap().0);
    let b = encode_image(&render_scene(&spec).unwrap().0);
    assert_eq!(a, b);
    spec.rng_seed += 1;
    assert_ne!(a, encode_image(&render_scene(&spec).unwrap().0));
}

#[test]
fn stitch_pattern_follows_the_pitch() {
    let (img, truth) = render_scene(&horizontal(vec![])).unwrap();
    // Needle red over the first quarter pitch, the second color next,
    // then bare fabric.
    assert_eq!(img.get(12, 30), NEEDLE_RED_RGB);
    assert_eq!(img.get(16, 30), BOBBIN_GREEN_RGB);
    assert_eq!(img.get(22, 30), [210, 210, 205]);
    assert_eq!(img.get(12, 5), [210, 210, 205]);
    assert_eq!(truth.paths.len(), 1);
    assert_eq!(truth.defect_count(), 0);
}

#[test]
fn missing_span_is_bare_fabric() {
    let (img, truth) = render_scene(&horizontal(vec![InjectedDefect {
        kind: DefectKind::MissingStitch,
        span: (32.0, 80.0),
    }]))
    .unwrap();
    assert!((44..88).all(|x| img.get(x, 30) == [210, 210, 205]));
    assert_eq!(truth.paths[0].defects[0].span, (32.0, 80.0));
}

#[test]
fn noise_has_the_requested_spread() {
    let mut spec = horizontal(vec![]);
    spec.paths.clear();
    spec.fabric_rgb = [128, 128, 128];
    spec.fabric_noise_sigma = 12.0;
    let (img, _) = render_scene(&spec).unwrap();
    let vals: Vec<f64> = img
        .pixels()
        .iter()
        .flat_map(|p| p.iter().map(|&v| f64::from(v)))
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((mean - 128.0).abs() < 0.5, "mean {mean}");
    assert!((sd - 12.0).abs() < 0.5, "sd {sd}");
}

#[test]
fn splitmix_is_reproducible() {
    let mut a = SplitMix64::new(42);
    let mut b = SplitMix64::new(42);
    assert!((0..100).all(|_| a.next_u64() == b.next_u64()));
    let mut c = SplitMix64::new(0);
    assert_eq!(c.next_u64(), 0xE220A8397B1DCDAF);
    let u = SplitMix64::new(5).next_f64();
    assert!((0.0..1.0).contains(&u));
}

#[test]
fn invalid_specs_are_rejected() {
    let mut thin = horizontal(vec![]);
    thin.paths[0].thread_width = 1;
    assert!(matches!(render_scene(&thin), Err(Error::SpecInvalid(_))));

    let mut off = horizontal(vec![]);
    off.paths[0].geometry = Geometry::Linear {
        p0: Point::new(-5.0, 3.0),
        p1: Point::new(50.0, 3.0),
    };
    assert!(matches!(render_scene(&off), Err(Error::SpecInvalid(_))));

    let overlapping = horizontal(vec![
        InjectedDefect {
            kind: DefectKind::MissingStitch,
            span: (16.0, 64.0),
        },
        InjectedDefect {
            kind: DefectKind::SkippedStitch,
            span: (48.0, 96.0),
        },
    ]);
    assert!(matches!(render_scene(&overlapping), Err(Error::SpecInvalid(_))));

    let beyond = horizontal(vec![InjectedDefect {
        kind: DefectKind::MissingStitch,
        span: (150.0, 200.0),
    }]);
    assert!(matches!(render_scene(&beyond), Err(Error::SpecInvalid(_))));
}

#[test]
fn iou_of_intervals() {
    assert_eq!(span_iou((0.0, 10.0), (0.0, 10.0)), 1.0);
    assert_eq!(span_iou((0.0, 10.0), (5.0, 15.0)), 5.0 / 15.0);
    assert_eq!(span_iou((0.0, 1.0), (2.0, 3.0)), 0.0);
}

#[test]
fn scoring_counts() {
    let spec = horizontal(vec![InjectedDefect {
        kind: DefectKind::MissingStitch,
        span: (32.0, 80.0),
    }]);
    let (_, truth) = render_scene(&spec).unwrap();
    let path = truth.paths[0].path;

    let none = evaluate(&report_with(path, vec![]), &truth, 0.3);
    assert_eq!((none.true_positives, none.false_negatives), (0, 1));
    assert_eq!(none.recall, 0.0);

    let exact = evaluate(
        &report_with(path, vec![defect(DefectKind::MissingStitch, (32.0, 80.0))]),
        &truth,
        0.3,
    );
    assert_eq!((exact.precision, exact.recall, exact.f1), (1.0, 1.0, 1.0));

    let wrong_kind = evaluate(
        &report_with(path, vec![defect(DefectKind::SkippedStitch, (32.0, 80.0))]),
        &truth,
        0.3,
    );
    assert_eq!((wrong_kind.false_positives, wrong_kind.false_negatives), (1, 1));
    assert_eq!(wrong_kind.f1, 0.0);

    let far = evaluate(
        &report_with(path, vec![defect(DefectKind::MissingStitch, (120.0, 160.0))]),
        &truth,
        0.3,
    );
    assert_eq!(far.true_positives, 0);
}

#[test]
fn rendered_scenes_are_recovered() {
    for (i, kind) in [
        DefectKind::MissingStitch,
        DefectKind::SkippedStitch,
        DefectKind::SuperimposedSeam,
    ]
    .into_iter()
    .enumerate()
    {
        let mut spec = horizontal(vec![InjectedDefect {
            kind,
            span: (48.0, 112.0),
        }]);
        spec.rng_seed = i as u64;
        let (img, truth) = render_scene(&spec).unwrap();
        let report = inspect(&img, &InspectionConfig::default(), "r");
        let eval = evaluate(&report, &truth, 0.3);
        assert_eq!(
            (eval.precision, eval.recall),
            (1.0, 1.0),
            "{kind:?}: {:?}",
            report.defects
        );
        // Geometry is recovered within a pixel of the drawn line.
        let SeamPath::Linear { line, .. } = report.paths[0].path else {
            panic!("linear")
        };
        assert!((line.signed_distance(Point::new(100.0, 30.0))).abs() <= 1.0);
    }
}
