use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CircleParams;
use crate::binarization::BinaryImage;
use crate::error::{Error, Result};

/// Radius grid and acceptance threshold for circle voting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSearch {
    pub r_min: u32,
    pub r_max: u32,
    pub r_step: u32,
    /// Fraction of the rasterized perimeter that must vote for a center.
    pub vote_fraction: f64,
}

impl CircleSearch {
    pub fn radii(&self) -> impl Iterator<Item = u32> + '_ {
        (self.r_min..=self.r_max).step_by(self.r_step.max(1) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_min == 0 || self.r_min > self.r_max || self.r_step == 0 {
            return Err(Error::InvalidParameter(format!(
                "circle search needs 0 < r_min <= r_max and r_step > 0, got {}..{} step {}",
                self.r_min, self.r_max, self.r_step
            )));
        }
        if !(self.vote_fraction > 0.0 && self.vote_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "vote_fraction must be in (0, 1], got {}",
                self.vote_fraction
            )));
        }
        Ok(())
    }
}

/// Distinct offsets of the midpoint (Bresenham) circle of radius `r`,
/// sorted.
pub fn midpoint_circle_offsets(r: u32) -> Vec<(i32, i32)> {
    let r = r as i32;
    let mut set = BTreeSet::new();
    let (mut x, mut y) = (r, 0i32);
    let mut err = 1 - r;
    while x >= y {
        for (a, b) in [(x, y), (y, x)] {
            set.insert((a, b));
            set.insert((-a, b));
            set.insert((a, -b));
            set.insert((-a, -b));
        }
        y += 1;
        if err < 0 {
            err += 2 * y + 1;
        } else {
            x -= 1;
            err += 2 * (y - x) + 1;
        }
    }
    set.into_iter().collect()
}

/// Finds circles whose center collects at least
/// `ceil(vote_fraction · perimeter_offsets)` votes.
///
/// Every foreground pixel votes along the rasterized circle of radius `R`
/// around itself into an image-sized center grid, one grid per radius.
/// Local maxima within a 5x5 window are candidates; across radii, a
/// candidate whose center lies closer than `2·r_step` to a stronger one is
/// dropped. Output is sorted by descending score.
pub fn hough_circles(bin: &BinaryImage, search: &CircleSearch) -> Result<Vec<CircleParams>> {
    search.validate()?;
    let pixels: Vec<(i32, i32)> = bin.foreground().map(|(x, y)| (x as i32, y as i32)).collect();
    if pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    let (w, h) = (bin.width(), bin.height());
    let radii: Vec<u32> = search.radii().collect();

    let per_radius: Vec<Vec<CircleParams>> = radii
        .par_iter()
        .map(|&radius| {
            let offsets = midpoint_circle_offsets(radius);
            let needed = (search.vote_fraction * offsets.len() as f64 - 1e-9).ceil().max(1.0) as u32;
            let mut acc = vec![0u32; w * h];
            for &(x, y) in &pixels {
                for &(dx, dy) in &offsets {
                    let (cx, cy) = (x + dx, y + dy);
                    if cx >= 0 && cy >= 0 && (cx as usize) < w && (cy as usize) < h {
                        acc[cy as usize * w + cx as usize] += 1;
                    }
                }
            }
            local_maxima(&acc, w, h, needed, 2)
                .into_iter()
                .map(|(cx, cy, score)| CircleParams {
                    cx: cx as f64,
                    cy: cy as f64,
                    radius: f64::from(radius),
                    score,
                })
                .collect()
        })
        .collect();

    let mut all: Vec<CircleParams> = per_radius.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(a.radius.total_cmp(&b.radius))
            .then(a.cy.total_cmp(&b.cy))
            .then(a.cx.total_cmp(&b.cx))
    });
    let min_sep = 2.0 * f64::from(search.r_step);
    let mut kept: Vec<CircleParams> = Vec::new();
    for c in all {
        if kept.iter().all(|k| k.center().dist(&c.center()) >= min_sep) {
            kept.push(c);
        }
    }
    Ok(kept)
}

fn local_maxima(acc: &[u32], w: usize, h: usize, needed: u32, radius: i64) -> Vec<(usize, usize, u32)> {
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = acc[y * w + x];
            if v < needed {
                continue;
            }
            let mut is_max = true;
            'nbhd: for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nv = acc[ny as usize * w + nx as usize];
                    if nv > v || (nv == v && (ny, nx) < (y as i64, x as i64)) {
                        is_max = false;
                        break 'nbhd;
                    }
                }
            }
            if is_max {
                out.push((x, y, v));
            }
        }
    }
    out
}
