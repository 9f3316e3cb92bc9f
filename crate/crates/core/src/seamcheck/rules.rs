//! Stitch rules and the three defect detectors.
//!
//! All detectors work on a [`SampleSequence`] and report arclength spans on
//! the sampled path:
//!
//! * missing stitch: a background run longer than `max_gap_stitches · pitch`;
//! * skipped stitch: a pitch-long window with thread that lacks one of the
//!   rule's two colors;
//! * superimposed seam: a `4 · pitch` window whose thread coverage exceeds
//!   `nominal_coverage · coverage_max`.

use serde::{Deserialize, Serialize};

use super::{ColorClass, SampleSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StitchType {
    /// ISO 4915 type 301: needle thread interlocked with a bobbin thread.
    #[serde(rename = "lockstitch_301")]
    Lockstitch301,
    /// ISO 4915 type 401: needle thread interlooped with a looper thread.
    #[serde(rename = "chainstitch_401")]
    Chainstitch401,
}

impl StitchType {
    pub fn required_colors(self) -> [ColorClass; 2] {
        match self {
            StitchType::Lockstitch301 => [ColorClass::NeedleRed, ColorClass::BobbinGreen],
            StitchType::Chainstitch401 => [ColorClass::NeedleRed, ColorClass::LooperOrange],
        }
    }
}

fn default_nominal_coverage() -> f64 {
    0.5
}

fn default_min_consecutive() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StitchRule {
    pub stitch_type: StitchType,
    /// Nominal stitch spacing along the path, in pixels.
    pub pitch: f64,
    pub max_gap_stitches: f64,
    pub coverage_max: f64,
    /// Expected thread fraction of a conforming seam.
    #[serde(default = "default_nominal_coverage")]
    pub nominal_coverage: f64,
    /// Consecutive offending windows needed for a skipped-stitch defect.
    #[serde(default = "default_min_consecutive")]
    pub min_consecutive: usize,
}

impl StitchRule {
    pub fn new(stitch_type: StitchType, pitch: f64) -> Self {
        Self {
            stitch_type,
            pitch,
            max_gap_stitches: 1.5,
            coverage_max: 1.5,
            nominal_coverage: default_nominal_coverage(),
            min_consecutive: default_min_consecutive(),
        }
    }

    pub fn required_colors(&self) -> [ColorClass; 2] {
        self.stitch_type.required_colors()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return bad(format!("pitch must be > 0, got {}", self.pitch));
        }
        if !(self.max_gap_stitches >= 1.0) {
            return bad(format!("max_gap_stitches must be >= 1, got {}", self.max_gap_stitches));
        }
        if !(self.coverage_max > 1.0) {
            return bad(format!("coverage_max must be > 1, got {}", self.coverage_max));
        }
        if !(self.nominal_coverage > 0.0 && self.nominal_coverage <= 1.0) {
            return bad(format!(
                "nominal_coverage must be in (0, 1], got {}",
                self.nominal_coverage
            ));
        }
        if self.min_consecutive == 0 {
            return bad("min_consecutive must be >= 1".into());
        }
        Ok(())
    }

    fn gap_limit(&self) -> f64 {
        self.max_gap_stitches * self.pitch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    MissingStitch,
    SkippedStitch,
    SuperimposedSeam,
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub path_index: usize,
    /// Arclength interval `[a, b]` on the path, `a < b`.
    pub span: (f64, f64),
    pub bbox: BoundingBox,
    pub detail: String,
}

/// Index ranges of samples, half-open.
type Run = (usize, usize);

fn make_defect(seq: &SampleSequence, kind: DefectKind, run: Run, detail: String) -> Defect {
    let span = run_span(seq, run);
    Defect {
        kind,
        path_index: 0,
        span,
        bbox: span_bbox(seq, span),
        detail,
    }
}

/// Arclength covered by samples `run.0..run.1`, each sample owning one step.
fn run_span(seq: &SampleSequence, run: Run) -> (f64, f64) {
    let a = seq.samples[run.0].arclength;
    let last = seq.samples[run.1 - 1].arclength;
    let b = (last + seq.step).min(seq.end());
    if b > a {
        (a, b)
    } else {
        ((a - seq.step).max(seq.start()), b)
    }
}

/// Bounding box of the path points in `span`, padded by the sampling
/// window half-width and clipped to the image.
fn span_bbox(seq: &SampleSequence, span: (f64, f64)) -> BoundingBox {
    let pad = 2.0;
    let mut pts: Vec<_> = seq
        .samples
        .iter()
        .filter(|s| s.arclength >= span.0 - 1e-9 && s.arclength <= span.1 + 1e-9)
        .map(|s| s.position)
        .collect();
    pts.push(seq.path.point_at(span.0));
    pts.push(seq.path.point_at(span.1));
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let clip = |v: f64, max: usize| v.round().clamp(0.0, max as f64 - 1.0) as usize;
    BoundingBox {
        x0: clip(x0 - pad, seq.image_width),
        y0: clip(y0 - pad, seq.image_height),
        x1: clip(x1 + pad, seq.image_width),
        y1: clip(y1 + pad, seq.image_height),
    }
}

/// Maximal background runs longer than the rule's gap limit.
fn missing_runs(seq: &SampleSequence, rule: &StitchRule) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut i = 0;
    let n = seq.samples.len();
    while i < n {
        if seq.samples[i].class != ColorClass::Background {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && seq.samples[i].class == ColorClass::Background {
            i += 1;
        }
        let extent = (i - start) as f64 * seq.step;
        if extent > rule.gap_limit() + 1e-9 {
            runs.push((start, i));
        }
    }
    runs
}

pub fn detect_missing(seq: &SampleSequence, rule: &StitchRule) -> Vec<Defect> {
    missing_runs(seq, rule)
        .into_iter()
        .map(|run| {
            let extent = (run.1 - run.0) as f64 * seq.step;
            make_defect(
                seq,
                DefectKind::MissingStitch,
                run,
                format!("no thread over {extent:.1} px (limit {:.1} px)", rule.gap_limit()),
            )
        })
        .collect()
}

/// Consecutive pitch-long windows starting at the first sample. A trailing
/// partial window is not judged.
fn pitch_windows(seq: &SampleSequence, pitch: f64) -> Vec<Run> {
    let start = seq.start();
    let mut windows = Vec::new();
    let mut lo = 0;
    let n = seq.samples.len();
    let mut k = 0usize;
    loop {
        let w_end = start + (k + 1) as f64 * pitch;
        if w_end > seq.end() + 1e-9 {
            break;
        }
        let mut hi = lo;
        while hi < n && seq.samples[hi].arclength < w_end - 1e-9 {
            hi += 1;
        }
        if hi > lo {
            windows.push((lo, hi));
        }
        lo = hi;
        k += 1;
    }
    windows
}

pub fn detect_skipped(seq: &SampleSequence, rule: &StitchRule) -> Vec<Defect> {
    let required = rule.required_colors();
    let missing = missing_runs(seq, rule);
    let windows = pitch_windows(seq, rule.pitch);
    let marked: Vec<bool> = windows
        .iter()
        .map(|&(lo, hi)| {
            let window = &seq.samples[lo..hi];
            let has_thread = window.iter().any(|s| s.class != ColorClass::Background);
            let lacks_color = required.iter().any(|&c| !window.iter().any(|s| s.class == c));
            // Windows touching a missing-stitch run belong to that defect.
            let in_gap = missing.iter().any(|&(a, b)| lo < b && a < hi);
            has_thread && lacks_color && !in_gap
        })
        .collect();

    let mut defects = Vec::new();
    let mut k = 0;
    while k < windows.len() {
        if !marked[k] {
            k += 1;
            continue;
        }
        let first = k;
        while k < windows.len() && marked[k] {
            k += 1;
        }
        if k - first < rule.min_consecutive {
            continue;
        }
        let run = (windows[first].0, windows[k - 1].1);
        let absent: Vec<String> = required
            .iter()
            .filter(|&&c| !seq.samples[run.0..run.1].iter().any(|s| s.class == c))
            .map(|c| format!("{c:?}"))
            .collect();
        let detail = if absent.is_empty() {
            format!("{} stitch window(s) missing a required color", k - first)
        } else {
            format!("{} stitch window(s) without {}", k - first, absent.join(", "))
        };
        defects.push(make_defect(seq, DefectKind::SkippedStitch, run, detail));
    }
    defects
}

pub fn detect_superimposed(seq: &SampleSequence, rule: &StitchRule) -> Vec<Defect> {
    let limit = rule.nominal_coverage * rule.coverage_max;
    let n = seq.samples.len();
    if n == 0 {
        return Vec::new();
    }
    let thread: Vec<usize> = {
        let mut acc = vec![0usize; n + 1];
        for (i, s) in seq.samples.iter().enumerate() {
            acc[i + 1] = acc[i] + usize::from(s.class != ColorClass::Background);
        }
        acc
    };
    let coverage = |lo: usize, hi: usize| (thread[hi] - thread[lo]) as f64 / (hi - lo) as f64;
    let index_at = |s: f64| seq.samples.partition_point(|x| x.arclength < s - 1e-9);

    let span_len = 4.0 * rule.pitch;
    let (start, end) = (seq.start(), seq.end());
    let mut windows = Vec::new();
    if end - start < span_len {
        if end - start >= 2.0 * rule.pitch {
            windows.push((0, n));
        }
    } else {
        let mut k = 0usize;
        loop {
            let lo_s = start + k as f64 * rule.pitch;
            if lo_s + span_len > end + 1e-9 {
                break;
            }
            windows.push((index_at(lo_s), index_at(lo_s + span_len).max(index_at(lo_s) + 1)));
            k += 1;
        }
        // One more window flush with the end so the tail is judged too.
        if windows.last().is_some_and(|w| w.1 < n) {
            windows.push((index_at(end - span_len), n));
        }
    }
    let marked: Vec<Run> = windows
        .into_iter()
        .filter(|&(lo, hi)| hi > lo && coverage(lo, hi) > limit + 1e-12)
        .collect();
    if marked.is_empty() {
        return Vec::new();
    }

    // Union of overlapping marked windows.
    let mut regions: Vec<Run> = Vec::new();
    for w in marked {
        match regions.last_mut() {
            Some(last) if w.0 <= last.1 => last.1 = last.1.max(w.1),
            _ => regions.push(w),
        }
    }

    // Trim each region to the samples whose centered pitch-long
    // neighborhood is itself over the limit.
    let half = ((rule.pitch / seq.step) / 2.0).round().max(1.0) as usize;
    regions
        .into_iter()
        .map(|(lo, hi)| {
            let dense = |i: usize| {
                let a = i.saturating_sub(half);
                let b = (i + half + 1).min(n);
                coverage(a, b) > limit + 1e-12
            };
            let first = (lo..hi).find(|&i| dense(i));
            let last = (lo..hi).rev().find(|&i| dense(i));
            let run = match (first, last) {
                (Some(a), Some(b)) if b > a => (a, b + 1),
                _ => (lo, hi),
            };
            let cov = coverage(lo, hi);
            make_defect(
                seq,
                DefectKind::SuperimposedSeam,
                run,
                format!("thread coverage {cov:.2} exceeds {limit:.2}"),
            )
        })
        .collect()
}

/// Merges same-kind defects on the same path that are less than one pitch
/// apart, then orders by path and span start.
pub fn merge_defects(mut defects: Vec<Defect>, pitch: f64) -> Vec<Defect> {
    defects.sort_by(|a, b| {
        (a.path_index, a.kind)
            .cmp(&(b.path_index, b.kind))
            .then(a.span.0.total_cmp(&b.span.0))
    });
    let mut out: Vec<Defect> = Vec::new();
    for d in defects {
        if let Some(last) = out.last_mut() {
            if last.path_index == d.path_index && last.kind == d.kind && d.span.0 - last.span.1 < pitch {
                last.span.1 = last.span.1.max(d.span.1);
                last.bbox = BoundingBox {
                    x0: last.bbox.x0.min(d.bbox.x0),
                    y0: last.bbox.y0.min(d.bbox.y0),
                    x1: last.bbox.x1.max(d.bbox.x1),
                    y1: last.bbox.y1.max(d.bbox.y1),
                };
                last.detail = format!("{}; {}", last.detail, d.detail);
                continue;
            }
        }
        out.push(d);
    }
    out.sort_by(|a, b| {
        a.path_index
            .cmp(&b.path_index)
            .then(a.span.0.total_cmp(&b.span.0))
            .then(a.kind.cmp(&b.kind))
    });
    out
}
