use std::f64::consts::PI;

use rayon::prelude::*;

use super::LineParams;
use crate::binarization::BinaryImage;
use crate::error::{Error, Result};
use crate::imagekit::ImageGray;

/// Vote grid over `(theta_index, rho_index)`.
///
/// Theta bin `k` is centered at `k·theta_step`; rho bin `j` at
/// `(j - rho_offset)·rho_step`, so `rho = 0` always has its own bin.
#[derive(Debug, Clone, PartialEq)]
pub struct LineAccumulator {
    bins: Vec<u32>,
    theta_bins: usize,
    rho_bins: usize,
    theta_step: f64,
    rho_step: f64,
    rho_offset: usize,
}

impl LineAccumulator {
    pub fn theta_bins(&self) -> usize {
        self.theta_bins
    }

    pub fn rho_bins(&self) -> usize {
        self.rho_bins
    }

    pub fn theta_step(&self) -> f64 {
        self.theta_step
    }

    pub fn rho_step(&self) -> f64 {
        self.rho_step
    }

    pub fn rho_offset(&self) -> usize {
        self.rho_offset
    }

    pub fn get(&self, theta_index: usize, rho_index: usize) -> u32 {
        self.bins[theta_index * self.rho_bins + rho_index]
    }

    pub fn theta(&self, theta_index: usize) -> f64 {
        theta_index as f64 * self.theta_step
    }

    pub fn rho(&self, rho_index: usize) -> f64 {
        (rho_index as f64 - self.rho_offset as f64) * self.rho_step
    }

    pub fn total_votes(&self) -> u64 {
        self.bins.iter().map(|&v| u64::from(v)).sum()
    }

    pub fn max_votes(&self) -> u32 {
        self.bins.iter().copied().max().unwrap_or(0)
    }

    /// Grid scaled to 0..=255; rows are theta bins, columns rho bins.
    pub fn to_gray_image(&self) -> ImageGray {
        let max = self.max_votes().max(1);
        let data = self
            .bins
            .iter()
            .map(|&v| ((u64::from(v) * 255 + u64::from(max) / 2) / u64::from(max)) as u8)
            .collect();
        ImageGray::new(self.rho_bins, self.theta_bins, data).expect("non-empty grid")
    }

    /// `(theta_index, rho_index)` of the neighbor displaced by `(dt, dr)`,
    /// wrapping across `theta = π` where `(rho, theta)` and
    /// `(-rho, theta - π)` describe the same line.
    fn neighbor(&self, ti: usize, ri: usize, dt: i64, dr: i64) -> Option<(usize, usize)> {
        let n = self.theta_bins as i64;
        let mut t = ti as i64 + dt;
        let mut r = ri as i64 + dr;
        let wraps = ((n as f64) * self.theta_step - PI).abs() < 1e-9;
        if t < 0 || t >= n {
            if !wraps {
                return None;
            }
            t = t.rem_euclid(n);
            r = 2 * self.rho_offset as i64 - r;
        }
        (r >= 0 && r < self.rho_bins as i64).then_some((t as usize, r as usize))
    }
}

/// Accumulates votes for every foreground pixel and theta bin.
///
/// Each pixel `(x, y)` votes once per theta bin, in the rho bin nearest
/// to `x·cos(theta) + y·sin(theta)`.
pub fn hough_lines(bin: &BinaryImage, theta_step: f64, rho_step: f64) -> Result<LineAccumulator> {
    if !(theta_step > 0.0 && theta_step.is_finite()) || !(rho_step > 0.0 && rho_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "theta_step {theta_step} and rho_step {rho_step} must be positive"
        )));
    }
    let pixels: Vec<(f64, f64)> = bin.foreground().map(|(x, y)| (x as f64, y as f64)).collect();
    if pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    let theta_bins = ((PI / theta_step) - 1e-9).ceil().max(1.0) as usize;
    let diagonal = (bin.width() as f64).hypot(bin.height() as f64);
    let half = (diagonal / rho_step).ceil() as usize;
    let rho_bins = 2 * half + 1;
    let mut bins = vec![0u32; theta_bins * rho_bins];

    bins.par_chunks_mut(rho_bins).enumerate().for_each(|(ti, row)| {
        let (s, c) = (ti as f64 * theta_step).sin_cos();
        for &(x, y) in &pixels {
            let r = x * c + y * s;
            let ri = (r / rho_step).round() as i64 + half as i64;
            row[ri as usize] += 1;
        }
    });

    Ok(LineAccumulator {
        bins,
        theta_bins,
        rho_bins,
        theta_step,
        rho_step,
        rho_offset: half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePeak {
    pub line: LineParams,
    pub votes: u32,
    pub theta_index: usize,
    pub rho_index: usize,
}

/// Bins with at least `vote_threshold` votes that are strict maxima of
/// their `(2·nms_radius + 1)²` neighborhood, sorted by descending votes.
///
/// Equal-vote neighbors are resolved toward the smaller theta index, then
/// the smaller rho index.
pub fn extract_line_peaks(acc: &LineAccumulator, vote_threshold: u32, nms_radius: usize) -> Vec<LinePeak> {
    let threshold = vote_threshold.max(1);
    let r = nms_radius as i64;
    let mut peaks = Vec::new();
    for ti in 0..acc.theta_bins {
        for ri in 0..acc.rho_bins {
            let v = acc.get(ti, ri);
            if v < threshold {
                continue;
            }
            let mut is_peak = true;
            'nbhd: for dt in -r..=r {
                for dr in -r..=r {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    let Some((nt, nr)) = acc.neighbor(ti, ri, dt, dr) else {
                        continue;
                    };
                    if (nt, nr) == (ti, ri) {
                        continue;
                    }
                    let nv = acc.get(nt, nr);
                    if nv > v || (nv == v && (nt, nr) < (ti, ri)) {
                        is_peak = false;
                        break 'nbhd;
                    }
                }
            }
            if is_peak {
                peaks.push(LinePeak {
                    line: LineParams {
                        rho: acc.rho(ri),
                        theta: acc.theta(ti),
                    },
                    votes: v,
                    theta_index: ti,
                    rho_index: ri,
                });
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.theta_index.cmp(&b.theta_index))
            .then(a.rho_index.cmp(&b.rho_index))
    });
    peaks
}
