//! Hough transforms for straight and circular seam paths.
//!
//! Lines use the normal parameterization `rho = x·cos(theta) + y·sin(theta)`
//! with the origin at the top-left pixel, x right, y down and `theta`
//! measured from the x axis in `[0, π)`. Circles are found radius by radius
//! in a center accumulator of image size.

mod circles;
mod extent;
mod lines;

pub use circles::{hough_circles, midpoint_circle_offsets, CircleSearch};
pub use extent::{circle_arc, line_extent, refine_circle, refine_line, LineExtent};
pub use lines::{extract_line_peaks, hough_lines, LineAccumulator, LinePeak};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// A line in normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    pub rho: f64,
    pub theta: f64,
}

impl LineParams {
    /// Normalizes `theta` into `[0, π)`, flipping the sign of `rho` as needed.
    pub fn normalized(rho: f64, theta: f64) -> Self {
        let mut theta = theta.rem_euclid(TAU);
        let mut rho = rho;
        if theta >= PI {
            theta -= PI;
            rho = -rho;
        }
        if theta >= PI {
            theta = 0.0;
        }
        Self { rho, theta }
    }

    pub fn normal(&self) -> (f64, f64) {
        (self.theta.cos(), self.theta.sin())
    }

    /// Unit vector along the line.
    pub fn direction(&self) -> (f64, f64) {
        (-self.theta.sin(), self.theta.cos())
    }

    /// Signed distance of `p` from the line.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let (c, s) = self.normal();
        p.x * c + p.y * s - self.rho
    }

    /// Foot of the perpendicular from the origin.
    pub fn foot(&self) -> Point {
        let (c, s) = self.normal();
        Point::new(self.rho * c, self.rho * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleParams {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    /// Accumulator votes at the detected maximum.
    pub score: u32,
}

impl CircleParams {
    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }
}

/// Recognized seam geometry with its finite extent.
///
/// Arclength runs from `p0` to `p1` for lines. For circles it starts at
/// `arc_start` and follows increasing `atan2(y - cy, x - cx)`, which is
/// clockwise on screen since y points down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeamPath {
    Linear {
        line: LineParams,
        p0: Point,
        p1: Point,
    },
    Circular {
        circle: CircleParams,
        arc_start: f64,
        arc_end: f64,
        full: bool,
    },
}

impl SeamPath {
    pub fn length(&self) -> f64 {
        match self {
            SeamPath::Linear { p0, p1, .. } => p0.dist(p1),
            SeamPath::Circular {
                circle,
                arc_start,
                arc_end,
                ..
            } => circle.radius * (arc_end - arc_start),
        }
    }

    pub fn point_at(&self, s: f64) -> Point {
        match self {
            SeamPath::Linear { p0, p1, .. } => {
                let len = p0.dist(p1);
                if len == 0.0 {
                    return *p0;
                }
                let f = s / len;
                Point::new(p0.x + f * (p1.x - p0.x), p0.y + f * (p1.y - p0.y))
            }
            SeamPath::Circular { circle, arc_start, .. } => {
                let phi = arc_start + s / circle.radius;
                Point::new(
                    circle.cx + circle.radius * phi.cos(),
                    circle.cy + circle.radius * phi.sin(),
                )
            }
        }
    }

    /// Unit normal at arclength `s`: the line normal or the outward radius.
    pub fn normal_at(&self, s: f64) -> (f64, f64) {
        match self {
            SeamPath::Linear { line, .. } => line.normal(),
            SeamPath::Circular { circle, arc_start, .. } => {
                let phi = arc_start + s / circle.radius;
                (phi.cos(), phi.sin())
            }
        }
    }

    pub fn is_full_circle(&self) -> bool {
        matches!(self, SeamPath::Circular { full: true, .. })
    }
}
