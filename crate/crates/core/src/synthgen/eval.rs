use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::GroundTruth;
use crate::hough::SeamPath;
use crate::seamcheck::InspectionReport;

/// Geometry tolerances for pairing a detected path with a true one.
const LINE_ANGLE_TOL: f64 = 2.0 * PI / 180.0;
const LINE_OFFSET_TOL: f64 = 3.0;
const CIRCLE_TOL: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectMatch {
    /// Index into the report's defect list.
    pub reported: usize,
    pub truth_path: usize,
    /// Index into that truth path's injected defects.
    pub injected: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matches: Vec<DefectMatch>,
}

/// Intersection over union of two intervals.
pub fn span_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Index of the true path that `detected` recognizes, if any.
fn match_path(detected: &SeamPath, truth: &GroundTruth) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, t) in truth.paths.iter().enumerate() {
        let err = match (detected, &t.path) {
            (SeamPath::Linear { line: a, p0, p1 }, SeamPath::Linear { line: b, .. }) => {
                let mut dtheta = (a.theta - b.theta).abs();
                if dtheta > PI / 2.0 {
                    dtheta = PI - dtheta;
                }
                let mid = crate::hough::Point::new((p0.x + p1.x) / 2.0, (p0.y + p1.y) / 2.0);
                let offset = b.signed_distance(mid).abs();
                (dtheta <= LINE_ANGLE_TOL && offset <= LINE_OFFSET_TOL).then_some(offset)
            }
            (SeamPath::Circular { circle: a, .. }, SeamPath::Circular { circle: b, .. }) => {
                let d = a.center().dist(&b.center());
                let dr = (a.radius - b.radius).abs();
                (d <= CIRCLE_TOL && dr <= CIRCLE_TOL).then_some(d + dr)
            }
            _ => None,
        };
        if let Some(e) = err {
            if best.is_none_or(|(b, _)| e < b) {
                best = Some((e, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

/// Maps a span on `detected` into arclength on `truth`.
fn to_truth_frame(detected: &SeamPath, truth: &SeamPath, span: (f64, f64)) -> (f64, f64) {
    match (detected, truth) {
        (SeamPath::Linear { .. }, SeamPath::Linear { p0, p1, .. }) => {
            let len = p0.dist(p1);
            let (ux, uy) = ((p1.x - p0.x) / len, (p1.y - p0.y) / len);
            let proj = |s: f64| {
                let q = detected.point_at(s);
                (q.x - p0.x) * ux + (q.y - p0.y) * uy
            };
            let (a, b) = (proj(span.0), proj(span.1));
            (a.min(b), a.max(b))
        }
        (
            SeamPath::Circular {
                circle: dc,
                arc_start: da,
                ..
            },
            SeamPath::Circular {
                circle: tc,
                arc_start: ta,
                ..
            },
        ) => {
            let phi = da + span.0 / dc.radius;
            let a = (phi - ta).rem_euclid(TAU) * tc.radius;
            (a, a + (span.1 - span.0) * tc.radius / dc.radius)
        }
        _ => span,
    }
}

/// Best IoU of `a` against `b`, allowing `a` to be shifted by a whole
/// turn on closed paths.
fn path_iou(truth: &SeamPath, a: (f64, f64), b: (f64, f64)) -> f64 {
    match truth {
        SeamPath::Circular { circle, .. } => {
            let c = TAU * circle.radius;
            [-c, 0.0, c]
                .iter()
                .map(|&k| span_iou((a.0 + k, a.1 + k), b))
                .fold(0.0, f64::max)
        }
        SeamPath::Linear { .. } => span_iou(a, b),
    }
}

/// Greedy one-to-one matching of reported to injected defects by
/// descending IoU. A pair qualifies when the kinds agree, the reported
/// path recognizes the injected defect's path and the IoU reaches
/// `iou_min`.
pub fn evaluate(report: &InspectionReport, truth: &GroundTruth, iou_min: f64) -> EvalResult {
    let path_map: Vec<Option<usize>> = report.paths.iter().map(|p| match_path(&p.path, truth)).collect();

    let mut candidates = Vec::new();
    for (ri, d) in report.defects.iter().enumerate() {
        let Some(Some(ti)) = path_map.get(d.path_index) else {
            continue;
        };
        let detected = &report.paths[d.path_index].path;
        let tpath = &truth.paths[*ti];
        let span = to_truth_frame(detected, &tpath.path, d.span);
        for (ii, inj) in tpath.defects.iter().enumerate() {
            if inj.kind != d.kind {
                continue;
            }
            let iou = path_iou(&tpath.path, span, inj.span);
            if iou >= iou_min && iou > 0.0 {
                candidates.push(DefectMatch {
                    reported: ri,
                    truth_path: *ti,
                    injected: ii,
                    iou,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.reported.cmp(&b.reported))
            .then((a.truth_path, a.injected).cmp(&(b.truth_path, b.injected)))
    });

    let mut used_reported = vec![false; report.defects.len()];
    let mut used_injected = std::collections::BTreeSet::new();
    let mut matches = Vec::new();
    for c in candidates {
        if used_reported[c.reported] || used_injected.contains(&(c.truth_path, c.injected)) {
            continue;
        }
        used_reported[c.reported] = true;
        used_injected.insert((c.truth_path, c.injected));
        matches.push(c);
    }
    matches.sort_by_key(|m| m.reported);

    let tp = matches.len();
    let fp = report.defects.len() - tp;
    let fn_ = truth.defect_count() - tp;
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    EvalResult {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        f1,
        matches,
    }
}
