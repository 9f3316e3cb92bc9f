use super::pipeline::InspectionReport;
use crate::hough::SeamPath;
use crate::imagekit::ImageRgb;

const GREEN: [u8; 3] = [0, 255, 0];
const RED: [u8; 3] = [255, 0, 0];

/// Copy of `img` with every path drawn 1 px wide in green and every defect
/// box outlined in red on top.
pub fn annotate(img: &ImageRgb, report: &InspectionReport) -> ImageRgb {
    let mut out = img.clone();
    for p in &report.paths {
        draw_path(&mut out, &p.path);
    }
    for d in &report.defects {
        let b = d.bbox;
        for x in b.x0..=b.x1 {
            put(&mut out, x as i64, b.y0 as i64, RED);
            put(&mut out, x as i64, b.y1 as i64, RED);
        }
        for y in b.y0..=b.y1 {
            put(&mut out, b.x0 as i64, y as i64, RED);
            put(&mut out, b.x1 as i64, y as i64, RED);
        }
    }
    out
}

fn put(img: &mut ImageRgb, x: i64, y: i64, rgb: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
        img.put(x as usize, y as usize, rgb);
    }
}

fn draw_path(img: &mut ImageRgb, path: &SeamPath) {
    let len = path.length();
    let n = (len * 2.0).ceil() as usize;
    for k in 0..=n {
        let p = path.point_at((k as f64 * 0.5).min(len));
        put(img, p.x.round() as i64, p.y.round() as i64, GREEN);
    }
}
