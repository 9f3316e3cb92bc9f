use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{GeometryMode, InspectionConfig};
use super::rules::{detect_missing, detect_skipped, detect_superimposed, merge_defects, Defect, StitchRule};
use super::sampling::{sample_path, SampleSequence};
use crate::binarization::{binarize, histogram, otsu_threshold, BinaryImage};
use crate::error::Error;
use crate::hough::{
    circle_arc, extract_line_peaks, hough_circles, hough_lines, line_extent, refine_circle, refine_line, CircleParams,
    LineAccumulator, LineParams, Point, SeamPath,
};
use crate::imagekit::{gaussian_smooth, to_grayscale, ImageRgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectedPath {
    pub path: SeamPath,
    /// Hough votes of the path's accumulator peak.
    pub score: u32,
    pub rule: StitchRule,
    pub thread_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionReport {
    pub image_id: String,
    pub threshold: Option<u8>,
    pub paths: Vec<InspectedPath>,
    pub defects: Vec<Defect>,
    pub verdict: Verdict,
    /// Why the pipeline could not assess the seam, if it could not.
    pub failure: Option<String>,
    pub diagnostics: Vec<String>,
    pub params: InspectionConfig,
}

/// Intermediate products kept for debugging.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub binary: Option<BinaryImage>,
    pub line_accumulator: Option<LineAccumulator>,
    /// Wall-clock duration of each stage in milliseconds.
    pub timings: Vec<(String, f64)>,
}

struct Candidate {
    path: SeamPath,
    score: u32,
}

struct Stopwatch {
    last: Instant,
    laps: Vec<(String, f64)>,
}

impl Stopwatch {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            laps: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.laps
            .push((stage.to_string(), (now - self.last).as_secs_f64() * 1e3));
        self.last = now;
    }
}

pub fn inspect(img: &ImageRgb, cfg: &InspectionConfig, image_id: &str) -> InspectionReport {
    inspect_with_artifacts(img, cfg, image_id).0
}

/// Runs grayscale conversion, smoothing, Otsu binarization, Hough path
/// recognition and per-path stitch validation.
///
/// Stages that cannot proceed produce a failing report with the reason in
/// `failure` rather than an error.
pub fn inspect_with_artifacts(img: &ImageRgb, cfg: &InspectionConfig, image_id: &str) -> (InspectionReport, Artifacts) {
    let mut report = InspectionReport {
        image_id: image_id.to_string(),
        threshold: None,
        paths: Vec::new(),
        defects: Vec::new(),
        verdict: Verdict::Fail,
        failure: None,
        diagnostics: Vec::new(),
        params: cfg.clone(),
    };
    let mut artifacts = Artifacts::default();
    let mut clock = Stopwatch::new();
    let outcome = run(img, cfg, &mut report, &mut artifacts, &mut clock);
    if let Err(reason) = outcome {
        report.failure = Some(reason);
    }
    report.verdict = if report.failure.is_none() && report.defects.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    artifacts.timings = clock.laps;
    (report, artifacts)
}

fn run(
    img: &ImageRgb,
    cfg: &InspectionConfig,
    report: &mut InspectionReport,
    artifacts: &mut Artifacts,
    clock: &mut Stopwatch,
) -> Result<(), String> {
    let gray = to_grayscale(img);
    clock.lap("grayscale");
    let smooth = gaussian_smooth(&gray, cfg.smoothing.sigma, cfg.smoothing.radius).map_err(|e| e.to_string())?;
    clock.lap("smooth");
    let threshold = match otsu_threshold(&histogram(&smooth)) {
        Ok(r) => r.t,
        Err(Error::DegenerateHistogram) => return Err("no seam path detected: uniform image".into()),
        Err(e) => return Err(e.to_string()),
    };
    report.threshold = Some(threshold);
    let bin = binarize(&smooth, threshold, cfg.polarity);
    clock.lap("binarize");

    let mut candidates = Vec::new();
    if matches!(cfg.geometry, GeometryMode::Lines | GeometryMode::Both) {
        let (lines, acc) = detect_lines(&bin, cfg, &mut report.diagnostics);
        candidates.extend(lines);
        artifacts.line_accumulator = acc;
        clock.lap("hough_lines");
    }
    if matches!(cfg.geometry, GeometryMode::Circles | GeometryMode::Both) {
        let circles = detect_circles(&bin, cfg, &mut report.diagnostics);
        let rings: Vec<CircleParams> = circles
            .iter()
            .filter_map(|c| match c.path {
                SeamPath::Circular { circle, .. } => Some(circle),
                SeamPath::Linear { .. } => None,
            })
            .collect();
        let notes = &mut report.diagnostics;
        candidates.retain(|c| {
            let explained = explained_by_circles(&bin, &c.path, &rings, cfg.path.band_half_width);
            if explained {
                notes.push(format!(
                    "line candidate with {} votes lies on a detected circle",
                    c.score
                ));
            }
            !explained
        });
        candidates.extend(circles);
        clock.lap("hough_circles");
    }
    artifacts.binary = Some(bin);
    candidates.sort_by_key(|c| std::cmp::Reverse(c.score));

    let checked: Vec<_> = candidates.par_iter().map(|c| check_path(img, c, cfg)).collect();
    for (c, outcome) in candidates.iter().zip(checked) {
        match outcome {
            Ok((path, rule, thread_fraction, defects)) => {
                let index = report.paths.len();
                report.paths.push(InspectedPath {
                    path,
                    score: c.score,
                    rule,
                    thread_fraction,
                });
                report
                    .defects
                    .extend(defects.into_iter().map(|d| Defect { path_index: index, ..d }));
            }
            Err(note) => report.diagnostics.push(note),
        }
    }
    clock.lap("validate");
    if report.paths.is_empty() {
        return Err("no seam path detected".into());
    }
    Ok(())
}

fn detect_lines(
    bin: &BinaryImage,
    cfg: &InspectionConfig,
    notes: &mut Vec<String>,
) -> (Vec<Candidate>, Option<LineAccumulator>) {
    let lc = &cfg.lines;
    let theta_step = lc.theta_step_deg.to_radians();
    let acc = match hough_lines(bin, theta_step, lc.rho_step) {
        Ok(acc) => acc,
        Err(e) => {
            notes.push(format!("line search skipped: {e}"));
            return (Vec::new(), None);
        }
    };
    let half = cfg.path.band_half_width;
    let mut out: Vec<(LineParams, Candidate)> = Vec::new();
    let mut merged: Vec<usize> = Vec::new();
    for peak in extract_line_peaks(&acc, lc.vote_threshold, lc.nms_radius) {
        let mut line = peak.line;
        for _ in 0..2 {
            line = refine_line(bin, line, half, 2.0 * theta_step);
        }
        let ext = match line_extent(bin, line, lc.gap_tolerance) {
            Ok(ext) => ext,
            Err(e) => {
                notes.push(format!("line (rho {:.1}) dropped: {e}", line.rho));
                continue;
            }
        };
        if let Some(k) = out.iter().position(|(k, _)| same_line(k, &ext.path, cfg)) {
            merged[k] += 1;
            continue;
        }
        if out.len() == lc.max_paths {
            notes.push(format!("line limit {} reached", lc.max_paths));
            break;
        }
        for (a, b) in &ext.long_gaps {
            notes.push(format!(
                "line (rho {:.1}, theta {:.1} deg) unsupported over [{a:.0}, {b:.0}]",
                line.rho,
                line.theta.to_degrees()
            ));
        }
        merged.push(0);
        out.push((
            line,
            Candidate {
                path: ext.path,
                score: peak.votes,
            },
        ));
    }
    for ((line, _), n) in out.iter().zip(&merged) {
        if *n > 0 {
            notes.push(format!(
                "line (rho {:.1}, theta {:.1} deg) absorbed {n} near-duplicate peak(s): possible superimposed seam",
                line.rho,
                line.theta.to_degrees()
            ));
        }
    }
    let out = out.into_iter().map(|(_, c)| c).collect();
    (out, Some(acc))
}

/// Whether `seg` runs along `kept`: nearly parallel, with its midpoint
/// close to the kept line.
fn same_line(kept: &LineParams, seg: &SeamPath, cfg: &InspectionConfig) -> bool {
    let SeamPath::Linear { line, p0, p1 } = seg else {
        return false;
    };
    let mut dtheta = (kept.theta - line.theta).abs();
    if dtheta > PI / 2.0 {
        dtheta = PI - dtheta;
    }
    let mid = Point::new((p0.x + p1.x) / 2.0, (p0.y + p1.y) / 2.0);
    dtheta <= cfg.path.duplicate_angle_deg.to_radians()
        && kept.signed_distance(mid).abs() <= cfg.path.duplicate_distance
}

/// Whether most foreground support of a linear path lies on one of the
/// circles, as happens for chords and tangents of a dense ring.
fn explained_by_circles(bin: &BinaryImage, path: &SeamPath, circles: &[CircleParams], half: f64) -> bool {
    let SeamPath::Linear { line, .. } = path else {
        return false;
    };
    let (nx, ny) = line.normal();
    let (mut hits, mut on_ring) = (0usize, 0usize);
    let len = path.length();
    let mut s = 0.0;
    while s <= len {
        let p = path.point_at(s);
        for k in -1..=1 {
            let q = Point::new(p.x + f64::from(k) * nx, p.y + f64::from(k) * ny);
            if bin.get_checked(q.x.round() as i64, q.y.round() as i64) {
                hits += 1;
                if circles.iter().any(|c| (q.dist(&c.center()) - c.radius).abs() <= half) {
                    on_ring += 1;
                }
            }
        }
        s += 1.0;
    }
    hits > 0 && 2 * on_ring >= hits
}

fn detect_circles(bin: &BinaryImage, cfg: &InspectionConfig, notes: &mut Vec<String>) -> Vec<Candidate> {
    let cc = &cfg.circles;
    let found = match hough_circles(bin, &cc.search()) {
        Ok(found) => found,
        Err(e) => {
            notes.push(format!("circle search skipped: {e}"));
            return Vec::new();
        }
    };
    let half = cfg.path.band_half_width;
    let mut kept: Vec<CircleParams> = Vec::new();
    for c in found {
        let mut fitted = c;
        for _ in 0..2 {
            fitted = refine_circle(bin, fitted, half);
        }
        let dup = kept.iter().any(|k| {
            k.center().dist(&fitted.center()) <= cfg.path.duplicate_distance
                && (k.radius - fitted.radius).abs() <= cfg.path.duplicate_distance
        });
        if dup {
            continue;
        }
        if kept.len() == cc.max_paths {
            notes.push(format!("circle limit {} reached", cc.max_paths));
            break;
        }
        kept.push(fitted);
    }
    kept.into_iter()
        .filter_map(|c| match circle_arc(bin, c, half, cc.min_arc_gap_deg.to_radians()) {
            Ok(path) => Some(Candidate { path, score: c.score }),
            Err(e) => {
                notes.push(format!("circle ({:.1}, {:.1}) dropped: {e}", c.cx, c.cy));
                None
            }
        })
        .collect()
}

type Checked = (SeamPath, StitchRule, f64, Vec<Defect>);

fn check_path(img: &ImageRgb, c: &Candidate, cfg: &InspectionConfig) -> Result<Checked, String> {
    let step = cfg.sampling.step;
    let seq = sample_path(img, &c.path, step, &cfg.bands).map_err(|e| format!("path dropped: {e}"))?;
    let fraction = seq.thread_fraction();
    if fraction < cfg.path.min_thread_fraction {
        return Err(format!(
            "path dropped: thread fraction {fraction:.3} below {}",
            cfg.path.min_thread_fraction
        ));
    }
    let rule = select_rule(&seq, &cfg.rules);
    let mut defects = detect_all(&seq, &rule);
    let mut seq = seq;

    // A closed seam has no natural start; restart it inside the longest
    // defect-free stretch so no defect is cut at the seam origin.
    if seq.path.is_full_circle() && touches_ends(&seq, &defects) {
        if let SeamPath::Circular { circle, arc_start, .. } = seq.path {
            let shift = clear_midpoint(&seq, &defects);
            let start = (arc_start + shift / circle.radius).rem_euclid(TAU);
            let path = SeamPath::Circular {
                circle,
                arc_start: start,
                arc_end: start + TAU,
                full: true,
            };
            seq = sample_path(img, &path, step, &cfg.bands).map_err(|e| format!("path dropped: {e}"))?;
            defects = detect_all(&seq, &rule);
        }
    }
    Ok((seq.path, rule, fraction, defects))
}

fn detect_all(seq: &SampleSequence, rule: &StitchRule) -> Vec<Defect> {
    let mut all = detect_missing(seq, rule);
    all.extend(detect_skipped(seq, rule));
    all.extend(detect_superimposed(seq, rule));
    merge_defects(all, rule.pitch)
}

/// The rule whose second color appears most often; ties keep the earlier
/// rule.
fn select_rule(seq: &SampleSequence, rules: &[StitchRule]) -> StitchRule {
    let mut best = rules[0];
    let mut best_count = seq.count(best.required_colors()[1]);
    for r in &rules[1..] {
        let n = seq.count(r.required_colors()[1]);
        if n > best_count {
            best = *r;
            best_count = n;
        }
    }
    best
}

fn touches_ends(seq: &SampleSequence, defects: &[Defect]) -> bool {
    let margin = 2.0 * seq.step;
    defects
        .iter()
        .any(|d| d.span.0 <= seq.start() + margin || d.span.1 >= seq.end() - margin)
}

/// Arclength offset of the middle of the longest stretch between
/// defects, treating the sequence as closed.
fn clear_midpoint(seq: &SampleSequence, defects: &[Defect]) -> f64 {
    let len = seq.path.length();
    let mut spans: Vec<(f64, f64)> = defects.iter().map(|d| d.span).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (0.0, 0.0);
    for (i, s) in spans.iter().enumerate() {
        let next = if i + 1 < spans.len() {
            spans[i + 1].0
        } else {
            spans[0].0 + len
        };
        let gap = next - s.1;
        if gap > best.0 {
            best = (gap, s.1 + gap / 2.0);
        }
    }
    best.1.rem_euclid(len)
}
