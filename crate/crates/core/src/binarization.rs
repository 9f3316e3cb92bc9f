//! Intensity histogram, Otsu threshold selection and binarization.
//!
//! The threshold minimizes the weighted within-class variance
//! `S_w²(t) = w₁(t)·S₁²(t) + w₂(t)·S₂²(t)` where class 1 holds intensities
//! `<= t` and class 2 holds intensities `> t`. The search is carried out in
//! exact integer arithmetic: with `n_k` pixels and intensity sum `A_k` per
//! class, `N·S_w² = Σ nᵢ·i² − A₁²/n₁ − A₂²/n₂`, so minimizing `S_w²` is
//! maximizing `A₁²/n₁ + A₂²/n₂`, compared by cross multiplication.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagekit::ImageGray;

/// Largest pixel count for which the exact search cannot overflow.
const MAX_TOTAL: u64 = 1 << 36;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Probability `p(i)` of intensity `i`.
    pub fn p(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = (0..256).map(|i| i as f64 * self.p(i)).sum();
        sum
    }

    fn distinct_levels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

pub fn histogram(img: &ImageGray) -> Histogram256 {
    let mut counts = [0u64; 256];
    for &v in img.pixels() {
        counts[v as usize] += 1;
    }
    Histogram256::from_counts(counts)
}

/// Class probabilities, means and variances at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub w1: f64,
    pub w2: f64,
    pub m1: f64,
    pub m2: f64,
    pub var1: f64,
    pub var2: f64,
    /// `w1·var1 + w2·var2`.
    pub within: f64,
}

/// Evaluates the class statistics at `t` term by term; `None` when either
/// class is empty.
pub fn class_stats(h: &Histogram256, t: usize) -> Option<ClassStats> {
    if t > 254 || h.total == 0 {
        return None;
    }
    let n1: u64 = h.counts[..=t].iter().sum();
    if n1 == 0 || n1 == h.total {
        return None;
    }
    let lower = 0..=t;
    let upper = t + 1..=255;
    let w1: f64 = lower.clone().map(|i| h.p(i)).sum();
    let w2: f64 = upper.clone().map(|i| h.p(i)).sum();
    let m1: f64 = lower.clone().map(|i| i as f64 * h.p(i) / w1).sum();
    let m2: f64 = upper.clone().map(|i| i as f64 * h.p(i) / w2).sum();
    let var1: f64 = lower.map(|i| (i as f64 - m1).powi(2) * h.p(i) / w1).sum();
    let var2: f64 = upper.map(|i| (i as f64 - m2).powi(2) * h.p(i) / w2).sum();
    Some(ClassStats {
        w1,
        w2,
        m1,
        m2,
        var1,
        var2,
        within: w1 * var1 + w2 * var2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Class 1 is `intensity <= t`.
    pub t: u8,
    /// Within-class variance at `t`.
    pub objective: f64,
    pub stats: ClassStats,
}

/// Otsu threshold over `t ∈ [0, 254]`.
///
/// Thresholds leaving a class empty are skipped. When several thresholds
/// reach the minimum, the floor midpoint of the first contiguous run of
/// minimizers is returned.
pub fn otsu_threshold(h: &Histogram256) -> Result<ThresholdResult> {
    if h.distinct_levels() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    if h.total > MAX_TOTAL {
        return Err(Error::InvalidParameter(format!(
            "histogram total {} exceeds {MAX_TOTAL}",
            h.total
        )));
    }
    let total_n = u128::from(h.total);
    let total_a: u128 = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * u128::from(c))
        .sum();

    // (t, numerator, denominator) of A₁²/n₁ + A₂²/n₂ for every valid t.
    let mut candidates = Vec::with_capacity(255);
    let (mut n1, mut a1) = (0u128, 0u128);
    for t in 0..255usize {
        n1 += u128::from(h.counts[t]);
        a1 += t as u128 * u128::from(h.counts[t]);
        let n2 = total_n - n1;
        if n1 == 0 || n2 == 0 {
            continue;
        }
        let a2 = total_a - a1;
        let num = a1 * a1 * n2 + a2 * a2 * n1;
        let den = n1 * n2;
        candidates.push((t, num, den));
    }

    let mut best = 0;
    for (k, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        if compare_fractions(c.1, c.2, b.1, b.2) == std::cmp::Ordering::Greater {
            best = k;
        }
    }
    let mut last = best;
    while last + 1 < candidates.len() {
        let (n, c) = (&candidates[last + 1], &candidates[best]);
        let adjacent = n.0 == candidates[last].0 + 1;
        if adjacent && compare_fractions(n.1, n.2, c.1, c.2) == std::cmp::Ordering::Equal {
            last += 1;
        } else {
            break;
        }
    }
    let t = (candidates[best].0 + candidates[last].0) / 2;
    let stats = class_stats(h, t).expect("t lies inside a valid run");
    Ok(ThresholdResult {
        t: t as u8,
        objective: stats.within,
        stats,
    })
}

/// Compares `a/b` with `c/d` exactly via 256-bit products.
fn compare_fractions(a: u128, b: u128, c: u128, d: u128) -> std::cmp::Ordering {
    wide_mul(a, d).cmp(&wide_mul(c, b))
}

/// Full 256-bit product as `(high, low)`.
fn wide_mul(x: u128, y: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (x_hi, x_lo) = (x >> 64, x & MASK);
    let (y_hi, y_lo) = (y >> 64, y & MASK);
    let lo_lo = x_lo * y_lo;
    let hi_lo = x_hi * y_lo;
    let lo_hi = x_lo * y_hi;
    let hi_hi = x_hi * y_hi;
    let mid = (lo_lo >> 64) + (hi_lo & MASK) + (lo_hi & MASK);
    let low = (mid << 64) | (lo_lo & MASK);
    let high = hi_hi + (hi_lo >> 64) + (lo_hi >> 64) + (mid >> 64);
    (high, low)
}

/// Which side of the threshold is the seam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Foreground iff intensity `<= t`.
    #[default]
    DarkForeground,
    /// Foreground iff intensity `> t`.
    LightForeground,
}

/// Row-major foreground mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "binary image {width}x{height} with {} pixels",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn get_checked(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Coordinates of foreground pixels in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

pub fn binarize(img: &ImageGray, t: u8, polarity: Polarity) -> BinaryImage {
    let data = img
        .pixels()
        .iter()
        .map(|&v| match polarity {
            Polarity::DarkForeground => v <= t,
            Polarity::LightForeground => v > t,
        })
        .collect();
    BinaryImage::new(img.width(), img.height(), data).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hist(pairs: &[(usize, u64)]) -> Histogram256 {
        let mut c = [0u64; 256];
        for &(i, n) in pairs {
            c[i] += n;
        }
        Histogram256::from_counts(c)
    }

    #[test]
    fn constant_image_histogram() {
        let h = histogram(&ImageGray::filled(2, 2, 7).unwrap());
        assert_eq!(h.counts()[7], 4);
        assert_eq!(h.total(), 4);
        assert_eq!(h.counts().iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn two_level_histogram() {
        let h = histogram(&ImageGray::new(2, 1, vec![0, 255]).unwrap());
        assert_eq!((h.counts()[0], h.counts()[255]), (1, 1));
    }

    #[test]
    fn symmetric_spikes_use_midpoint() {
        // Every t in [50, 199] separates the spikes with zero variance.
        let r = otsu_threshold(&hist(&[(50, 50), (200, 50)])).unwrap();
        assert_eq!(r.t, 124);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn single_level_is_degenerate() {
        assert_eq!(otsu_threshold(&hist(&[(128, 100)])), Err(Error::DegenerateHistogram));
        assert_eq!(
            otsu_threshold(&Histogram256::from_counts([0; 256])),
            Err(Error::DegenerateHistogram)
        );
    }

    #[test]
    fn adjacent_levels() {
        let r = otsu_threshold(&hist(&[(254, 3), (255, 1)])).unwrap();
        assert_eq!(r.t, 254);
        let r = otsu_threshold(&hist(&[(0, 3), (1, 5)])).unwrap();
        assert_eq!(r.t, 0);
    }

    #[test]
    fn three_clusters_hand_checked() {
        // {0:1, 1:1, 10:2}: t=0 -> 1/4*0 + 3/4*var{1,10,10}=3/4*18 = 13.5
        // t in [1,9] -> 2/4*0.25 + 0 = 0.125 (minimum, midpoint 5)
        let r = otsu_threshold(&hist(&[(0, 1), (1, 1), (10, 2)])).unwrap();
        assert_eq!(r.t, 5);
        assert!((r.objective - 0.125).abs() < 1e-12);
    }

    #[test]
    fn wide_mul_matches_small_products() {
        assert_eq!(wide_mul(3, 7), (0, 21));
        assert_eq!(wide_mul(u128::MAX, 2), (1, u128::MAX - 1));
        assert_eq!(wide_mul(1 << 127, 4), (2, 0));
    }

    #[test]
    fn binarize_polarities() {
        let img = ImageGray::new(2, 1, vec![10, 200]).unwrap();
        let dark = binarize(&img, 124, Polarity::DarkForeground);
        assert_eq!(dark.pixels(), &[true, false]);
        let light = binarize(&img, 124, Polarity::LightForeground);
        assert_eq!(light.pixels(), &[false, true]);
        let zeros = ImageGray::filled(3, 3, 0).unwrap();
        assert!(binarize(&zeros, 0, Polarity::DarkForeground)
            .pixels()
            .iter()
            .all(|&b| b));
    }

    fn arb_hist() -> impl Strategy<Value = Histogram256> {
        proptest::collection::vec((0usize..256, 1u64..500), 2..40).prop_filter_map("needs two levels", |pairs| {
            let h = hist(&pairs);
            (h.distinct_levels() >= 2).then_some(h)
        })
    }

    proptest! {
        #[test]
        fn scaling_counts_keeps_threshold(h in arb_hist(), k in 2u64..50) {
            let mut scaled = *h.counts();
            scaled.iter_mut().for_each(|c| *c *= k);
            let a = otsu_threshold(&h).unwrap();
            let b = otsu_threshold(&Histogram256::from_counts(scaled)).unwrap();
            prop_assert_eq!(a.t, b.t);
        }

        #[test]
        fn class_weights_and_mean_decompose(h in arb_hist()) {
            let mean = h.mean();
            for t in 0..255 {
                if let Some(s) = class_stats(&h, t) {
                    prop_assert!((s.w1 + s.w2 - 1.0).abs() < 1e-12);
                    prop_assert!((s.w1 * s.m1 + s.w2 * s.m2 - mean).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn polarities_are_complements(data in proptest::collection::vec(any::<u8>(), 16), t in 0u8..255) {
            let img = ImageGray::new(4, 4, data).unwrap();
            let a = binarize(&img, t, Polarity::DarkForeground);
            let b = binarize(&img, t, Polarity::LightForeground);
            prop_assert!(a.pixels().iter().zip(b.pixels()).all(|(x, y)| x != y));
        }
    }
}
