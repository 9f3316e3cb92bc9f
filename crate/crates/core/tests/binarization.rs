use proptest::prelude::*;
use seamcheck::binarization::{binarize, class_stats, histogram, otsu_threshold, Histogram256, Polarity};
use seamcheck::imagekit::ImageGray;
use seamcheck::Error;

fn counts() -> impl Strategy<Value = [u64; 256]> {
    prop::collection::vec(0u64..500, 256)
        .prop_map(|v| {
            let mut c = [0u64; 256];
            c.copy_from_slice(&v);
            c
        })
        .prop_filter("two levels", |c| c.iter().filter(|&&x| x > 0).count() >= 2)
}

proptest! {
    #[test]
    fn threshold_is_scale_invariant(c in counts(), k in 2u64..50) {
        let scaled = c.map(|x| x * k);
        let a = otsu_threshold(&Histogram256::from_counts(c)).unwrap();
        let b = otsu_threshold(&Histogram256::from_counts(scaled)).unwrap();
        prop_assert_eq!(a.t, b.t);
    }

    #[test]
    fn class_weights_and_means_decompose(c in counts()) {
        let h = Histogram256::from_counts(c);
        let mean = h.mean();
        for t in 0..255 {
            if let Some(s) = class_stats(&h, t) {
                prop_assert!((s.w1 + s.w2 - 1.0).abs() < 1e-12);
                prop_assert!((s.w1 * s.m1 + s.w2 * s.m2 - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn returned_objective_is_the_sweep_minimum(c in counts()) {
        let h = Histogram256::from_counts(c);
        let r = otsu_threshold(&h).unwrap();
        let best = (0..255).filter_map(|t| class_stats(&h, t)).map(|s| s.within).fold(f64::INFINITY, f64::min);
        prop_assert!(r.objective <= best * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn polarities_are_complements(w in 1usize..12, h in 1usize..12, t in any::<u8>(), seed in any::<u8>()) {
        let data: Vec<u8> = (0..w * h).map(|i| (i as u8).wrapping_mul(37).wrapping_add(seed)).collect();
        let img = ImageGray::new(w, h, data).unwrap();
        let dark = binarize(&img, t, Polarity::DarkForeground);
        let light = binarize(&img, t, Polarity::LightForeground);
        prop_assert!(dark.pixels().iter().zip(light.pixels()).all(|(a, b)| a != b));
    }
}

#[test]
fn bimodal_image_splits_between_modes() {
    let data: Vec<u8> = (0..100).map(|i| if i < 40 { 10 } else { 200 }).collect();
    let img = ImageGray::new(10, 10, data).unwrap();
    let r = otsu_threshold(&histogram(&img)).unwrap();
    assert!((10..200).contains(&r.t));
    let b = binarize(&img, r.t, Polarity::DarkForeground);
    assert_eq!(b.foreground_count(), 40);
}

#[test]
fn symmetric_tie_resolves_to_midpoint() {
    let mut c = [0u64; 256];
    c[50] = 100;
    c[150] = 100;
    let r = otsu_threshold(&Histogram256::from_counts(c)).unwrap();
    assert_eq!(r.t, 99);
    assert_eq!(r.objective, 0.0);
}

#[test]
fn uniform_image_is_degenerate() {
    let img = ImageGray::filled(8, 8, 77).unwrap();
    assert_eq!(
        otsu_threshold(&histogram(&img)).unwrap_err(),
        Error::DegenerateHistogram
    );
}

#[test]
fn all_zero_dark_threshold_zero_is_all_foreground() {
    let img = ImageGray::filled(5, 3, 0).unwrap();
    assert_eq!(binarize(&img, 0, Polarity::DarkForeground).foreground_count(), 15);
}
