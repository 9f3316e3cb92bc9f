use std::f64::consts::TAU;

use super::{CircleParams, LineParams, Point, SeamPath};
use crate::binarization::BinaryImage;
use crate::error::{Error, Result};

/// A finite linear path plus the interior stretches without support.
#[derive(Debug, Clone, PartialEq)]
pub struct LineExtent {
    pub path: SeamPath,
    /// Unsupported stretches longer than the gap tolerance, as arclength
    /// intervals from `p0`. They stay inside the path.
    pub long_gaps: Vec<(f64, f64)>,
}

/// Walks the infinite line across the image in 1 px steps and keeps the
/// span between the first and the last foreground hit within 1 px of it.
pub fn line_extent(bin: &BinaryImage, line: LineParams, gap_tolerance: f64) -> Result<LineExtent> {
    let foot = line.foot();
    let (dx, dy) = line.direction();
    let (nx, ny) = line.normal();
    let Some((t_lo, t_hi)) = clip_to_image(foot, (dx, dy), bin.width(), bin.height()) else {
        return Err(Error::NoSupport);
    };
    let mut hits = Vec::new();
    let mut t = t_lo.ceil();
    while t <= t_hi {
        let p = Point::new(foot.x + t * dx, foot.y + t * dy);
        let hit = (-1..=1).any(|k| {
            let k = f64::from(k);
            bin.get_checked((p.x + k * nx).round() as i64, (p.y + k * ny).round() as i64)
        });
        if hit {
            hits.push(t);
        }
        t += 1.0;
    }
    let (Some(&first), Some(&last)) = (hits.first(), hits.last()) else {
        return Err(Error::NoSupport);
    };
    let long_gaps = hits
        .windows(2)
        .filter(|w| w[1] - w[0] - 1.0 > gap_tolerance)
        .map(|w| (w[0] - first, w[1] - first))
        .collect();
    let at = |t: f64| Point::new(foot.x + t * dx, foot.y + t * dy);
    Ok(LineExtent {
        path: SeamPath::Linear {
            line,
            p0: at(first),
            p1: at(last),
        },
        long_gaps,
    })
}

/// Parameter interval where `origin + t·dir` stays inside the pixel grid.
fn clip_to_image(origin: Point, dir: (f64, f64), w: usize, h: usize) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (o, d, max) in [(origin.x, dir.0, w as f64 - 0.5), (origin.y, dir.1, h as f64 - 0.5)] {
        let min = -0.5;
        if d.abs() < 1e-12 {
            if o < min || o > max {
                return None;
            }
        } else {
            let (a, b) = ((min - o) / d, (max - o) / d);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Total least-squares fit of the foreground pixels within `half_width`
/// of `line`. The fit is accepted only when it stays within `half_width`
/// in rho and `max_turn` radians in theta of the original.
pub fn refine_line(bin: &BinaryImage, line: LineParams, half_width: f64, max_turn: f64) -> LineParams {
    let (c, s) = line.normal();
    let pts: Vec<(f64, f64)> = bin
        .foreground()
        .map(|(x, y)| (x as f64, y as f64))
        .filter(|&(x, y)| (x * c + y * s - line.rho).abs() <= half_width)
        .collect();
    if pts.len() < 3 {
        return line;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x / n, ay + y / n));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    // Principal axis angle; the normal is perpendicular to it.
    let axis = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = axis + std::f64::consts::FRAC_PI_2;
    let rho = mx * normal.cos() + my * normal.sin();
    let fitted = LineParams::normalized(rho, normal);

    let mut turn = (fitted.theta - line.theta).abs();
    let mut rho_ref = line.rho;
    if turn > std::f64::consts::FRAC_PI_2 {
        turn = std::f64::consts::PI - turn;
        rho_ref = -line.rho;
    }
    if turn <= max_turn && (fitted.rho - rho_ref).abs() <= half_width {
        fitted
    } else {
        line
    }
}

/// Algebraic (Kåsa) circle fit of the foreground pixels within
/// `half_width` of the ring. Rejected if the center or radius moves by
/// more than `half_width`.
pub fn refine_circle(bin: &BinaryImage, circle: CircleParams, half_width: f64) -> CircleParams {
    let pts: Vec<(f64, f64)> = bin
        .foreground()
        .map(|(x, y)| (x as f64, y as f64))
        .filter(|&(x, y)| ((x - circle.cx).hypot(y - circle.cy) - circle.radius).abs() <= half_width)
        .collect();
    if pts.len() < 3 {
        return circle;
    }
    // Solve x² + y² + D·x + E·y + F = 0 in the least-squares sense,
    // centered on the current estimate for conditioning.
    let (ox, oy) = (circle.cx, circle.cy);
    let mut m = [[0.0f64; 3]; 3];
    let mut v = [0.0f64; 3];
    for &(x, y) in &pts {
        let (x, y) = (x - ox, y - oy);
        let row = [x, y, 1.0];
        let rhs = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            v[i] += row[i] * rhs;
        }
    }
    let Some([d, e, f]) = solve3(m, v) else {
        return circle;
    };
    let (cx, cy) = (-d / 2.0, -e / 2.0);
    let r2 = cx * cx + cy * cy - f;
    if !(r2 > 0.0) {
        return circle;
    }
    let fitted = CircleParams {
        cx: cx + ox,
        cy: cy + oy,
        radius: r2.sqrt(),
        score: circle.score,
    };
    if fitted.center().dist(&circle.center()) <= half_width && (fitted.radius - circle.radius).abs() <= half_width {
        fitted
    } else {
        circle
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        let (pivot_row, pivot_v) = (m[col], v[col]);
        for (row, (mr, vr)) in m.iter_mut().zip(v.iter_mut()).enumerate() {
            if row != col {
                let f = mr[col] / pivot_row[col];
                for k in col..3 {
                    mr[k] -= f * pivot_row[k];
                }
                *vr -= f * pivot_v;
            }
        }
    }
    Some([v[0] / m[0][0], v[1] / m[1][1], v[2] / m[2][2]])
}

/// Angular extent of a circle's support.
///
/// Foreground pixels within `half_width` of the ring are binned by angle
/// at roughly 1 px of arclength per bin. If the largest unsupported
/// angular gap reaches `min_arc_gap` radians the path is the arc that
/// excludes it; otherwise it is the full circle starting at angle 0.
pub fn circle_arc(bin: &BinaryImage, circle: CircleParams, half_width: f64, min_arc_gap: f64) -> Result<SeamPath> {
    let nbins = ((TAU * circle.radius).ceil() as usize).max(8);
    let mut supported = vec![false; nbins];
    let mut any = false;
    for (x, y) in bin.foreground() {
        let (dx, dy) = (x as f64 - circle.cx, y as f64 - circle.cy);
        if (dx.hypot(dy) - circle.radius).abs() <= half_width {
            let phi = dy.atan2(dx).rem_euclid(TAU);
            let k = ((phi / TAU * nbins as f64) as usize).min(nbins - 1);
            supported[k] = true;
            any = true;
        }
    }
    if !any {
        return Err(Error::NoSupport);
    }
    // Longest circular run of unsupported bins.
    let start = supported.iter().position(|&s| s).expect("some bin is supported");
    let (mut best_len, mut best_end, mut run) = (0usize, start, 0usize);
    for i in 1..=nbins {
        let k = (start + i) % nbins;
        if supported[k] {
            if run > best_len {
                best_len = run;
                best_end = k;
            }
            run = 0;
        } else {
            run += 1;
        }
    }
    let bin_angle = TAU / nbins as f64;
    let gap = best_len as f64 * bin_angle;
    if best_len == 0 || gap < min_arc_gap {
        return Ok(SeamPath::Circular {
            circle,
            arc_start: 0.0,
            arc_end: TAU,
            full: true,
        });
    }
    // Arc runs from the first supported bin after the gap to the end of
    // the last supported bin before it.
    let arc_start = best_end as f64 * bin_angle;
    let arc_end = arc_start + TAU - gap;
    Ok(SeamPath::Circular {
        circle,
        arc_start,
        arc_end,
        full: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn image_with(w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> BinaryImage {
        let mut b = BinaryImage::empty(w, h).unwrap();
        for y in 0..h {
            for x in 0..w {
                b.set(x, y, f(x, y));
            }
        }
        b
    }

    fn endpoints(path: &SeamPath) -> (Point, Point) {
        match path {
            SeamPath::Linear { p0, p1, .. } => (*p0, *p1),
            _ => panic!("not linear"),
        }
    }

    #[test]
    fn full_width_line_reaches_borders() {
        let b = image_with(40, 20, |_, y| y == 7);
        let line = LineParams {
            rho: 7.0,
            theta: PI / 2.0,
        };
        let ext = line_extent(&b, line, 3.0).unwrap();
        let (p0, p1) = endpoints(&ext.path);
        let (lo, hi) = if p0.x < p1.x { (p0, p1) } else { (p1, p0) };
        assert!(lo.x.abs() < 1e-9 && (hi.x - 39.0).abs() < 1e-9);
        assert!((lo.y - 7.0).abs() < 1e-9);
        assert!(ext.long_gaps.is_empty());
    }

    #[test]
    fn partial_support_clips_to_outermost_hits() {
        // Direct scan oracle: hits occupy columns 10..=40 on row 12.
        let b = image_with(64, 30, |x, y| y == 12 && (10..=40).contains(&x));
        let line = LineParams {
            rho: 12.0,
            theta: PI / 2.0,
        };
        let (p0, p1) = endpoints(&line_extent(&b, line, 2.0).unwrap().path);
        let (lo, hi) = if p0.x < p1.x { (p0, p1) } else { (p1, p0) };
        assert!((lo.x - 10.0).abs() < 1e-9 && (hi.x - 40.0).abs() < 1e-9);
    }

    #[test]
    fn long_gaps_do_not_split() {
        let b = image_with(64, 30, |x, y| y == 5 && !(20..35).contains(&x));
        let line = LineParams {
            rho: 5.0,
            theta: PI / 2.0,
        };
        let ext = line_extent(&b, line, 4.0).unwrap();
        assert!((ext.path.length() - 63.0).abs() < 1e-9);
        assert_eq!(ext.long_gaps.len(), 1);
        let (a, z) = ext.long_gaps[0];
        assert!((z - a - 16.0).abs() < 1e-9);
    }

    #[test]
    fn endpoints_lie_on_line() {
        let b = image_with(80, 80, |x, y| (x as i64 - y as i64).abs() <= 1 && x > 5 && x < 70);
        let line = LineParams::normalized(0.0, 3.0 * PI / 4.0);
        let (p0, p1) = endpoints(&line_extent(&b, line, 2.0).unwrap().path);
        assert!(line.signed_distance(p0).abs() < 0.5);
        assert!(line.signed_distance(p1).abs() < 0.5);
    }

    #[test]
    fn no_support() {
        let b = image_with(30, 30, |x, _| x == 3);
        let line = LineParams { rho: 20.0, theta: 0.0 };
        assert_eq!(line_extent(&b, line, 1.0), Err(Error::NoSupport));
        let outside = LineParams { rho: 500.0, theta: 0.0 };
        assert_eq!(line_extent(&b, outside, 1.0), Err(Error::NoSupport));
    }

    #[test]
    fn refine_centers_thick_band() {
        let b = image_with(100, 60, |_, y| (20..=24).contains(&y));
        let coarse = LineParams {
            rho: 20.0,
            theta: PI / 2.0 + 0.01,
        };
        let fine = refine_line(&b, coarse, 4.0, 0.05);
        assert!((fine.rho - 22.0).abs() < 1e-6, "{fine:?}");
        assert!((fine.theta - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn refine_circle_recovers_ring_center() {
        let b = image_with(120, 120, |x, y| {
            let d = (x as f64 - 61.3).hypot(y as f64 - 58.6);
            (d - 30.0).abs() <= 2.0
        });
        let coarse = CircleParams {
            cx: 60.0,
            cy: 58.0,
            radius: 32.0,
            score: 9,
        };
        let fine = refine_circle(&b, coarse, 4.0);
        assert!((fine.cx - 61.3).abs() < 0.3 && (fine.cy - 58.6).abs() < 0.3, "{fine:?}");
        assert!((fine.radius - 30.0).abs() < 0.5);
        assert_eq!(fine.score, 9);
    }

    #[test]
    fn arc_versus_full_circle() {
        let c = CircleParams {
            cx: 50.0,
            cy: 50.0,
            radius: 30.0,
            score: 1,
        };
        let ring = |lo: f64, hi: f64| {
            image_with(100, 100, move |x, y| {
                let (dx, dy) = (x as f64 - 50.0, y as f64 - 50.0);
                let phi = dy.atan2(dx).rem_euclid(TAU);
                (dx.hypot(dy) - 30.0).abs() <= 1.0 && !(phi > lo && phi < hi)
            })
        };
        // Small gap: still a full circle.
        let full = circle_arc(&ring(1.0, 1.3), c, 2.0, PI / 2.0).unwrap();
        assert!(full.is_full_circle());
        // Half missing: an arc that skips the gap.
        match circle_arc(&ring(PI / 2.0, 3.0 * PI / 2.0), c, 2.0, PI / 2.0).unwrap() {
            SeamPath::Circular {
                arc_start,
                arc_end,
                full,
                ..
            } => {
                assert!(!full);
                assert!((arc_start - 3.0 * PI / 2.0).abs() < 0.05, "{arc_start}");
                assert!((arc_end - arc_start - PI).abs() < 0.1);
            }
            _ => unreachable!(),
        }
        let empty = BinaryImage::empty(100, 100).unwrap();
        assert_eq!(circle_arc(&empty, c, 2.0, 1.0), Err(Error::NoSupport));
    }
}
