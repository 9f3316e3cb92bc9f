use serde::{Deserialize, Serialize};

/// Hexcone HSV: `h` in degrees `[0, 360)`, `s` and `v` in `[0, 1]`.
///
/// Achromatic pixels (`s == 0`) carry `h == 0`; classifiers test `s` first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let (rf, gf, bf) = (f64::from(r), f64::from(g), f64::from(b));
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = f64::from(max) / 255.0;
    if max == 0 {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let delta = f64::from(max - min);
    let s = delta / f64::from(max);
    if max == min {
        return HsvPixel { h: 0.0, s, v };
    }
    let sector = if max == r {
        (gf - bf) / delta
    } else if max == g {
        2.0 + (bf - rf) / delta
    } else {
        4.0 + (rf - gf) / delta
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvPixel { h, s, v }
}

/// Inverse hexcone map, rounded to bytes.
pub fn hsv_to_rgb(p: HsvPixel) -> [u8; 3] {
    let c = p.v * p.s;
    let hp = (p.h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = p.v - c;
    let to_byte = |f: f64| ((f + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_byte(r1), to_byte(g1), to_byte(b1)]
}
