use proptest::prelude::*;
use seamcheck::imagekit::{
    decode_image, encode_image, encode_png, gaussian_kernel, gaussian_smooth, hsv_to_rgb, rgb_to_hsv, to_grayscale,
    ImageGray, ImageRgb,
};
use seamcheck::Error;

fn raster(max: usize) -> impl Strategy<Value = ImageRgb> {
    (1..max, 1..max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<[u8; 3]>(), w * h).prop_map(move |d| ImageRgb::new(w, h, d).unwrap())
    })
}

fn gray(min: usize, max: usize) -> impl Strategy<Value = ImageGray> {
    (min..max, min..max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h).prop_map(move |d| ImageGray::new(w, h, d).unwrap())
    })
}

proptest! {
    #[test]
    fn ppm_round_trip_is_exact(img in raster(12)) {
        prop_assert_eq!(decode_image(&encode_image(&img)).unwrap(), img);
    }

    #[test]
    fn png_round_trip_is_exact(img in raster(12)) {
        prop_assert_eq!(decode_image(&encode_png(&img)).unwrap(), img);
    }

    #[test]
    fn grayscale_commutes_with_pixel_permutation(img in raster(10), seed in any::<u64>()) {
        let n = img.pixels().len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted = ImageRgb::new(img.width(), img.height(), order.iter().map(|&i| img.pixels()[i]).collect()).unwrap();
        let g = to_grayscale(&img);
        let gp = to_grayscale(&permuted);
        for (k, &i) in order.iter().enumerate() {
            prop_assert_eq!(gp.pixels()[k], g.pixels()[i]);
        }
    }

    #[test]
    fn smoothing_stays_within_input_range(img in gray(5, 14)) {
        let out = gaussian_smooth(&img, 1.0, 2).unwrap();
        let lo = *img.pixels().iter().min().unwrap();
        let hi = *img.pixels().iter().max().unwrap();
        prop_assert!(out.pixels().iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn smoothing_preserves_constants(v in any::<u8>(), w in 5usize..20, h in 5usize..20) {
        let img = ImageGray::filled(w, h, v).unwrap();
        prop_assert_eq!(gaussian_smooth(&img, 1.7, 2).unwrap(), img);
    }

    #[test]
    fn kernel_is_normalized(sigma in 0.1f64..10.0, radius in 1usize..12) {
        let k = gaussian_kernel(sigma, radius);
        prop_assert_eq!(k.len(), 2 * radius + 1);
        prop_assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hsv_inverse_within_one(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
        let back = hsv_to_rgb(rgb_to_hsv(r, g, b));
        for (x, y) in [r, g, b].iter().zip(back) {
            prop_assert!((i32::from(*x) - i32::from(y)).abs() <= 1);
        }
    }
}

#[test]
fn p6_pixels_read_back_in_row_major_order() {
    let mut bytes = b"P6\n# comment\n2 2\n255\n".to_vec();
    for v in 1..=12u8 {
        bytes.push(v);
    }
    let img = decode_image(&bytes).unwrap();
    assert_eq!(img.get(1, 0), [4, 5, 6]);
    assert_eq!(img.get(0, 1), [7, 8, 9]);
}

#[test]
fn decode_rejects_bad_input() {
    assert!(matches!(
        decode_image(b"P6\n2 2\n255\n\x00\x01"),
        Err(Error::MalformedFile(_))
    ));
    assert!(matches!(decode_image(b"GIF89a...."), Err(Error::MalformedFile(_))));
    assert!(matches!(decode_image(b"P6\n1 1\n65535\n\0\0\0\0\0\0"), Err(Error::UnsupportedFormat(_))));
}

#[test]
fn kernel_larger_than_image_is_rejected() {
    let img = ImageGray::filled(4, 30, 9).unwrap();
    assert_eq!(
        gaussian_smooth(&img, 1.0, 2),
        Err(Error::KernelTooLarge { size: 5, dim: 4 })
    );
}

#[test]
fn single_bright_pixel_spreads_symmetrically() {
    let mut img = ImageGray::filled(9, 9, 0).unwrap();
    img.put(4, 4, 255);
    let out = gaussian_smooth(&img, 1.0, 2).unwrap();
    assert_eq!(out.get(3, 4), out.get(5, 4));
    assert_eq!(out.get(4, 3), out.get(3, 4));
    assert!(out.get(4, 4) > out.get(3, 4));
    assert_eq!(out.get(0, 0), 0);
}

#[test]
fn analytic_hsv_values() {
    let cases = [
        ((255, 0, 0), (0.0, 1.0, 1.0)),
        ((0, 255, 0), (120.0, 1.0, 1.0)),
        ((0, 0, 255), (240.0, 1.0, 1.0)),
        ((255, 255, 0), (60.0, 1.0, 1.0)),
        ((128, 128, 128), (0.0, 0.0, 128.0 / 255.0)),
    ];
    for ((r, g, b), (h, s, v)) in cases {
        let p = rgb_to_hsv(r, g, b);
        assert!(
            (p.h - h).abs() < 1e-9 && (p.s - s).abs() < 1e-9 && (p.v - v).abs() < 1e-9,
            "{r},{g},{b}: {p:?}"
        );
    }
}
