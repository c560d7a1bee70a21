//! Preprocessing and view extraction.

use evidfuse::views::{
    centroid, extract_views, otsu_threshold, resample, run_pipeline, segment_foreground, Mask, RasterImage, ViewGeometry,
};
use evidfuse::Error;

fn image(h: usize, w: usize, f: impl Fn(usize, usize) -> f64, spacing: (f64, f64)) -> RasterImage {
    let pixels = (0..h * w).map(|i| f(i / w, i % w)).collect();
    RasterImage::new(h, w, pixels, spacing).unwrap()
}

fn mask_of(img: &RasterImage) -> Mask {
    segment_foreground(img, 0.5).unwrap()
}

#[test]
fn bilinear_resample_reproduces_bilinear_functions() {
    // a + b·y + c·x + d·x·y is interpolated exactly.
    let f = |y: f64, x: f64| 3.0 + 0.5 * y - 2.0 * x + 0.25 * x * y;
    let img = image(30, 24, |r, c| f(r as f64, c as f64), (2.0, 2.0));
    let out = resample(&img, (1.5, 1.5)).unwrap();
    assert_eq!((out.height, out.width), (40, 32));
    assert_eq!(out.spacing, (1.5, 1.5));
    for r in 0..out.height {
        for c in 0..out.width {
            let y = (r as f64 * 0.75).min(29.0);
            let x = (c as f64 * 0.75).min(23.0);
            assert!((out.get(r, c) - f(y, x)).abs() < 1e-9, "({r}, {c})");
        }
    }
}

#[test]
fn anisotropic_spacing_resamples_each_axis() {
    let img = image(20, 30, |r, c| (r * 100 + c) as f64, (1.0, 3.0));
    let out = resample(&img, (1.5, 1.5)).unwrap();
    // Width follows the x spacing, height the y spacing.
    assert_eq!((out.height, out.width), (40, 20));
    assert_eq!(resample(&out, (1.5, 1.5)).unwrap(), out);
}

#[test]
fn default_geometry_gives_nine_exact_windows() {
    let img = image(256, 256, |r, c| (r * 1000 + c) as f64, (1.5, 1.5));
    let set = extract_views(&img, (128, 128), ViewGeometry::default()).unwrap();
    assert_eq!(set.local.len(), 9);
    assert_eq!(set.roi_origin, (48, 48));
    let (r0, c0) = set.roi_origin;
    for (view, &(wr, wc)) in set.local.iter().zip(&set.window_origins) {
        assert_eq!((view.height, view.width), (96, 96));
        for i in 0..96 {
            for j in 0..96 {
                assert_eq!(view.get(i, j).to_bits(), img.get(r0 + wr + i, c0 + wc + j).to_bits());
            }
        }
    }
    assert_eq!(
        set.window_origins,
        vec![(0, 0), (0, 32), (0, 64), (32, 0), (32, 32), (32, 64), (64, 0), (64, 32), (64, 64)]
    );
    assert_eq!(set.global, img.crop(48, 48, 160, 160).unwrap());
}

#[test]
fn roi_is_pushed_inside_near_edges() {
    let img = image(256, 256, |r, c| (r + c) as f64, (1.5, 1.5));
    let g = ViewGeometry::default();
    assert_eq!(extract_views(&img, (3, 250), g).unwrap().roi_origin, (0, 96));
    assert_eq!(extract_views(&img, (255, 0), g).unwrap().roi_origin, (96, 0));
    let small = image(100, 100, |_, _| 0.0, (1.5, 1.5));
    assert!(matches!(extract_views(&small, (50, 50), g), Err(Error::Geometry(_))));
}

#[test]
fn l_shape_centroid() {
    // Vertical bar rows 2..8 at cols 2..4 (12 px) and foot rows 6..8 at
    // cols 4..11 (14 px). Rows: (54 + 91) / 26 = 5.58, cols: (30 + 98) / 26
    // = 4.92, so the rounded centroid is (6, 5).
    let img = image(12, 12, |r, c| f64::from(((2..8).contains(&r) && (2..4).contains(&c)) || ((6..8).contains(&r) && (4..11).contains(&c))), (1.0, 1.0));
    let m = mask_of(&img);
    assert_eq!(m.count(), 26);
    assert_eq!(centroid(&m).unwrap(), (6, 5));
}

#[test]
fn largest_four_connected_component_wins() {
    // A 3×3 block and a diagonal chain of five pixels that only touch at
    // corners.
    let img = image(10, 10, |r, c| f64::from((r < 3 && c < 3) || (r >= 5 && r == c)), (1.0, 1.0));
    let m = mask_of(&img);
    assert_eq!(m.count(), 9);
    assert!(m.get(0, 0) && !m.get(5, 5));
    let empty = image(4, 4, |_, _| 0.0, (1.0, 1.0));
    assert!(matches!(segment_foreground(&empty, 0.5), Err(Error::EmptyMask)));
}

#[test]
fn otsu_splits_two_levels() {
    let img = image(10, 10, |r, _| if r < 6 { 10.0 } else { 200.0 }, (1.0, 1.0));
    let t = otsu_threshold(&img).unwrap();
    assert!(t > 10.0 && t < 200.0, "{t}");
    let flat = image(5, 5, |_, _| 7.0, (1.0, 1.0));
    assert!(matches!(otsu_threshold(&flat), Err(Error::ZeroVariance)));
}

#[test]
fn pipeline_is_deterministic_and_normalizes_foreground() {
    let img = image(
        220,
        200,
        |r, c| {
            let (y, x) = (r as f64 - 120.0, c as f64 - 90.0);
            if y * y / 3600.0 + x * x / 2500.0 < 1.0 {
                400.0 + ((r * 7 + c * 13) % 50) as f64
            } else {
                20.0
            }
        },
        (1.2, 1.4),
    );
    let a = run_pipeline(&img, None, ViewGeometry::default()).unwrap();
    let b = run_pipeline(&img, None, ViewGeometry::default()).unwrap();
    assert_eq!(a, b);
    let pre = &a.preprocessed;
    assert_eq!((pre.image.height, pre.image.width), (256, 256));
    let fg: Vec<f64> = pre.image.pixels.iter().copied().filter(|&p| p > pre.threshold).collect();
    let n = fg.len() as f64;
    let mean = fg.iter().sum::<f64>() / n;
    let var = fg.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9);
    assert_eq!(a.views.local.len(), 9);
}
