//! Extracting local and global views from a 2-D slice.
//!
//! The pipeline resamples to 1.5 mm pixels, center-crops or pads to
//! 256 × 256, segments the bright foreground, takes a square ROI around the
//! foreground centroid and slides an overlapping window over the ROI. Each
//! window is a local view; the whole ROI is the global view.

mod pgm;

pub use pgm::{read_pgm, read_spacing_sidecar, write_pgm, PgmDepth};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target pixel spacing of [`preprocess`], in millimetres.
pub const TARGET_SPACING_MM: f64 = 1.5;
/// Output side length of [`preprocess`].
pub const TARGET_SIZE: usize = 256;

/// A single-channel image with physical pixel spacing `(sx, sy)` in mm along
/// columns and rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
    pub spacing: (f64, f64),
}

impl RasterImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>, spacing: (f64, f64)) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Geometry("image dimensions must be positive".into()));
        }
        if pixels.len() != height * width {
            return Err(Error::Dimension {
                context: "raster pixels",
                expected: height * width,
                actual: pixels.len(),
            });
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.0.is_finite() && spacing.1.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "spacing",
                reason: format!("{spacing:?} must be positive"),
            });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pixels",
                reason: "non-finite pixel".into(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
            spacing,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Copies the `h × w` block whose top-left pixel is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, h: usize, w: usize) -> Result<RasterImage> {
        if row + h > self.height || col + w > self.width {
            return Err(Error::Geometry(format!(
                "crop {h}×{w} at ({row}, {col}) exceeds {}×{}",
                self.height, self.width
            )));
        }
        let mut pixels = Vec::with_capacity(h * w);
        for r in row..row + h {
            pixels.extend_from_slice(&self.pixels[r * self.width + col..r * self.width + col + w]);
        }
        RasterImage::new(h, w, pixels, self.spacing)
    }
}

/// Binary foreground mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub height: usize,
    pub width: usize,
    pub cells: Vec<bool>,
}

impl Mask {
    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }
}

/// Bilinear resampling onto a grid with the given spacing. Output pixel
/// `(r, c)` samples the input at `(r · ty / sy, c · tx / sx)`, so identical
/// spacings reproduce the input exactly.
pub fn resample(img: &RasterImage, target: (f64, f64)) -> Result<RasterImage> {
    let (sx, sy) = img.spacing;
    let (tx, ty) = target;
    if !(tx > 0.0 && ty > 0.0) {
        return Err(Error::InvalidParameter {
            name: "target spacing",
            reason: format!("{target:?} must be positive"),
        });
    }
    let out_w = ((img.width as f64 * sx / tx).round() as usize).max(1);
    let out_h = ((img.height as f64 * sy / ty).round() as usize).max(1);
    let (step_c, step_r) = (tx / sx, ty / sy);
    let mut pixels = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let y = (r as f64 * step_r).min((img.height - 1) as f64);
        let y0 = y.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let fy = y - y0 as f64;
        for c in 0..out_w {
            let x = (c as f64 * step_c).min((img.width - 1) as f64);
            let x0 = x.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let fx = x - x0 as f64;
            let top = img.get(y0, x0) * (1.0 - fx) + img.get(y0, x1) * fx;
            let bottom = img.get(y1, x0) * (1.0 - fx) + img.get(y1, x1) * fx;
            pixels.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    RasterImage::new(out_h, out_w, pixels, target)
}

/// Center crop or pad to `size × size`; padding uses `fill`.
pub fn center_crop_or_pad(img: &RasterImage, size: usize, fill: f64) -> Result<RasterImage> {
    let mut pixels = vec![fill; size * size];
    // Offsets of the output window in input coordinates (may be negative).
    let off_r = (img.height as isize - size as isize) / 2;
    let off_c = (img.width as isize - size as isize) / 2;
    for r in 0..size {
        let sr = r as isize + off_r;
        if sr < 0 || sr >= img.height as isize {
            continue;
        }
        for c in 0..size {
            let sc = c as isize + off_c;
            if sc < 0 || sc >= img.width as isize {
                continue;
            }
            pixels[r * size + c] = img.get(sr as usize, sc as usize);
        }
    }
    RasterImage::new(size, size, pixels, img.spacing)
}

/// Otsu's threshold over a 256-bin histogram of the pixel range. Returns
/// the upper edge of the last background bin.
pub fn otsu_threshold(img: &RasterImage) -> Result<f64> {
    let (lo, hi) = img
        .pixels
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| (a.min(p), b.max(p)));
    if hi <= lo {
        return Err(Error::ZeroVariance);
    }
    const BINS: usize = 256;
    let width = (hi - lo) / BINS as f64;
    let mut hist = [0usize; BINS];
    for &p in &img.pixels {
        hist[(((p - lo) / width) as usize).min(BINS - 1)] += 1;
    }
    let total = img.pixels.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &h)| i as f64 * h as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_var) = (0, -1.0);
    for (t, &h) in hist.iter().enumerate().take(BINS - 1) {
        w0 += h as f64;
        sum0 += t as f64 * h as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best_var {
            best_var = between;
            best = t;
        }
    }
    Ok(lo + (best + 1) as f64 * width)
}

/// Threshold mask reduced to its largest 4-connected component. Ties keep
/// the component reached first in raster order.
pub fn segment_foreground(img: &RasterImage, threshold: f64) -> Result<Mask> {
    let (h, w) = (img.height, img.width);
    let raw: Vec<bool> = img.pixels.iter().map(|&p| p > threshold).collect();
    let mut label = vec![0usize; h * w];
    let mut best = (0usize, 0usize); // (label, size)
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..h * w {
        if !raw[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            let (r, c) = (p / w, p % w);
            let mut visit = |q: usize| {
                if raw[q] && label[q] == 0 {
                    label[q] = next;
                    stack.push(q);
                }
            };
            if r > 0 {
                visit(p - w);
            }
            if r + 1 < h {
                visit(p + w);
            }
            if c > 0 {
                visit(p - 1);
            }
            if c + 1 < w {
                visit(p + 1);
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    if best.1 == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(Mask {
        height: h,
        width: w,
        cells: label.iter().map(|&l| l == best.0).collect(),
    })
}

/// Mean foreground coordinate `(row, col)`, rounded to the nearest pixel.
pub fn centroid(mask: &Mask) -> Result<(usize, usize)> {
    let (mut sr, mut sc, mut n) = (0.0, 0.0, 0usize);
    for r in 0..mask.height {
        for c in 0..mask.width {
            if mask.get(r, c) {
                sr += r as f64;
                sc += c as f64;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(((sr / n as f64).round() as usize, (sc / n as f64).round() as usize))
}

/// Z-score using the mean and standard deviation of the pixels above
/// `threshold`.
pub fn zscore_foreground(img: &RasterImage, threshold: f64) -> Result<RasterImage> {
    let fg: Vec<f64> = img.pixels.iter().copied().filter(|&p| p > threshold).collect();
    if fg.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = fg.len() as f64;
    let mean = fg.iter().sum::<f64>() / n;
    let var = fg.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0) {
        return Err(Error::ZeroVariance);
    }
    RasterImage::new(
        img.height,
        img.width,
        img.pixels.iter().map(|p| (p - mean) / std).collect(),
        img.spacing,
    )
}

/// Result of [`preprocess`] plus the threshold used for the foreground.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub image: RasterImage,
    /// Foreground threshold in the normalized intensity scale.
    pub threshold: f64,
    /// Threshold in the original intensity scale.
    pub raw_threshold: f64,
}

/// Resample to 1.5 mm, center crop/pad to 256 × 256 (padding with the image
/// minimum) and z-score over the foreground. `threshold` defaults to Otsu's.
pub fn preprocess(img: &RasterImage, threshold: Option<f64>) -> Result<Preprocessed> {
    let min = img.pixels.iter().copied().fold(f64::INFINITY, f64::min);
    let max = img.pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::ZeroVariance);
    }
    let resampled = resample(img, (TARGET_SPACING_MM, TARGET_SPACING_MM))?;
    let sized = center_crop_or_pad(&resampled, TARGET_SIZE, min)?;
    let raw_threshold = match threshold {
        Some(t) => t,
        None => otsu_threshold(&sized)?,
    };
    let fg: Vec<f64> = sized.pixels.iter().copied().filter(|&p| p > raw_threshold).collect();
    let image = zscore_foreground(&sized, raw_threshold)?;
    // Same affine map as the pixels, so the mask is unchanged.
    let n = fg.len() as f64;
    let mean = fg.iter().sum::<f64>() / n;
    let std = (fg.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n).sqrt();
    Ok(Preprocessed {
        image,
        threshold: (raw_threshold - mean) / std,
        raw_threshold,
    })
}

/// ROI side, window side and window stride in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewGeometry {
    pub roi: usize,
    pub window: usize,
    pub stride: usize,
}

impl Default for ViewGeometry {
    fn default() -> Self {
        Self {
            roi: 160,
            window: 96,
            stride: 32,
        }
    }
}

impl ViewGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.stride == 0 {
            return Err(Error::Geometry("window and stride must be positive".into()));
        }
        if self.window > self.roi {
            return Err(Error::Geometry(format!(
                "window {} exceeds ROI {}",
                self.window, self.roi
            )));
        }
        if !(self.roi - self.window).is_multiple_of(self.stride) {
            return Err(Error::Geometry(format!(
                "ROI {} minus window {} is not a multiple of stride {}",
                self.roi, self.window, self.stride
            )));
        }
        Ok(())
    }

    pub fn windows_per_axis(&self) -> usize {
        (self.roi - self.window) / self.stride + 1
    }

    pub fn num_views(&self) -> usize {
        self.windows_per_axis().pow(2)
    }

    /// Window origins relative to the ROI, row-major.
    pub fn origins(&self) -> Vec<(usize, usize)> {
        let steps: Vec<usize> = (0..self.windows_per_axis()).map(|i| i * self.stride).collect();
        steps
            .iter()
            .flat_map(|&r| steps.iter().map(move |&c| (r, c)))
            .collect()
    }
}

/// Local windows of the ROI plus the ROI itself as the global view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSet {
    pub geometry: ViewGeometry,
    /// Top-left of the ROI in image coordinates.
    pub roi_origin: (usize, usize),
    /// Window origins relative to the ROI.
    pub window_origins: Vec<(usize, usize)>,
    pub local: Vec<RasterImage>,
    pub global: RasterImage,
}

/// Crops an ROI centred on `center` (shifted inward when it would leave the
/// image) and slides the window over it.
pub fn extract_views(img: &RasterImage, center: (usize, usize), geometry: ViewGeometry) -> Result<ViewSet> {
    geometry.validate()?;
    let roi = geometry.roi;
    if roi > img.height || roi > img.width {
        return Err(Error::Geometry(format!(
            "ROI {roi} does not fit in {}×{}",
            img.height, img.width
        )));
    }
    let place = |c: usize, extent: usize| c.saturating_sub(roi / 2).min(extent - roi);
    let roi_origin = (place(center.0, img.height), place(center.1, img.width));
    let global = img.crop(roi_origin.0, roi_origin.1, roi, roi)?;
    let window_origins = geometry.origins();
    let local = window_origins
        .iter()
        .map(|&(r, c)| global.crop(r, c, geometry.window, geometry.window))
        .collect::<Result<Vec<_>>>()?;
    Ok(ViewSet {
        geometry,
        roi_origin,
        window_origins,
        local,
        global,
    })
}

/// Everything [`run_pipeline`] produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub preprocessed: Preprocessed,
    pub centroid: (usize, usize),
    pub views: ViewSet,
}

/// Preprocess, segment, locate the centroid and extract views.
pub fn run_pipeline(img: &RasterImage, threshold: Option<f64>, geometry: ViewGeometry) -> Result<PipelineOutput> {
    let preprocessed = preprocess(img, threshold)?;
    let mask = segment_foreground(&preprocessed.image, preprocessed.threshold)?;
    let center = centroid(&mask)?;
    let views = extract_views(&preprocessed.image, center, geometry)?;
    Ok(PipelineOutput {
        preprocessed,
        centroid: center,
        views,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> RasterImage {
        let pixels = (0..h * w).map(|i| f(i / w, i % w)).collect();
        RasterImage::new(h, w, pixels, (1.5, 1.5)).unwrap()
    }

    #[test]
    fn bright_square_segments_exactly() {
        let img = image(20, 20, |r, c| if (5..12).contains(&r) && (3..9).contains(&c) { 1.0 } else { 0.0 });
        let m = segment_foreground(&img, 0.5).unwrap();
        for r in 0..20 {
            for c in 0..20 {
                assert_eq!(m.get(r, c), img.get(r, c) > 0.5);
            }
        }
    }

    #[test]
    fn keeps_largest_blob() {
        let img = image(20, 20, |r, c| {
            let big = (2..8).contains(&r) && (2..8).contains(&c);
            let small = (12..14).contains(&r) && (12..15).contains(&c);
            if big || small { 1.0 } else { 0.0 }
        });
        let m = segment_foreground(&img, 0.5).unwrap();
        assert_eq!(m.count(), 36);
        assert!(!m.get(12, 12));
        // Diagonal neighbours are not 4-connected.
        let diag = image(4, 4, |r, c| if r == c { 1.0 } else { 0.0 });
        assert_eq!(segment_foreground(&diag, 0.5).unwrap().count(), 1);
    }

    #[test]
    fn empty_foreground() {
        let img = image(5, 5, |_, _| 0.0);
        assert!(matches!(segment_foreground(&img, 0.5), Err(Error::EmptyMask)));
        let m = Mask { height: 2, width: 2, cells: vec![false; 4] };
        assert!(centroid(&m).is_err());
    }

    #[test]
    fn centroid_examples() {
        let img = image(21, 21, |r, c| if (8..13).contains(&r) && (8..13).contains(&c) { 1.0 } else { 0.0 });
        assert_eq!(centroid(&segment_foreground(&img, 0.5).unwrap()).unwrap(), (10, 10));
        let single = image(9, 9, |r, c| if (r, c) == (2, 7) { 1.0 } else { 0.0 });
        assert_eq!(centroid(&segment_foreground(&single, 0.5).unwrap()).unwrap(), (2, 7));
    }

    #[test]
    fn geometry_counts() {
        let g = ViewGeometry::default();
        assert_eq!(g.num_views(), 9);
        assert_eq!(g.origins()[4], (32, 32));
        let g = ViewGeometry { roi: 128, window: 96, stride: 32 };
        assert_eq!(g.origins(), vec![(0, 0), (0, 32), (32, 0), (32, 32)]);
        assert!(ViewGeometry { roi: 96, window: 128, stride: 32 }.validate().is_err());
        assert!(ViewGeometry { roi: 160, window: 96, stride: 40 }.validate().is_err());
    }

    #[test]
    fn roi_equal_to_window_gives_one_view() {
        let img = image(64, 64, |r, c| (r * 64 + c) as f64);
        let g = ViewGeometry { roi: 32, window: 32, stride: 8 };
        let vs = extract_views(&img, (32, 32), g).unwrap();
        assert_eq!(vs.local.len(), 1);
        assert_eq!(vs.local[0], vs.global);
    }

    #[test]
    fn roi_is_shifted_inside_near_edges() {
        let img = image(200, 200, |r, c| (r + c) as f64);
        let vs = extract_views(&img, (5, 195), ViewGeometry::default()).unwrap();
        assert_eq!(vs.roi_origin, (0, 40));
        let small = image(100, 100, |_, _| 0.0);
        assert!(extract_views(&small, (50, 50), ViewGeometry::default()).is_err());
    }

    #[test]
    fn resample_identity_and_size() {
        let img = image(30, 20, |r, c| (r as f64).sin() + c as f64 * 0.1);
        assert_eq!(resample(&img, (1.5, 1.5)).unwrap(), img);
        let coarse = RasterImage::new(30, 20, img.pixels.clone(), (2.0, 3.0)).unwrap();
        let out = resample(&coarse, (1.5, 1.5)).unwrap();
        assert_eq!((out.height, out.width), (60, 27));
    }

    #[test]
    fn preprocess_rejects_constant_image() {
        let img = image(256, 256, |_, _| 4.0);
        assert!(matches!(preprocess(&img, None), Err(Error::ZeroVariance)));
    }

    #[test]
    fn preprocess_normalizes_foreground() {
        let img = image(256, 256, |r, c| {
            let d = ((r as f64 - 128.0).powi(2) + (c as f64 - 120.0).powi(2)).sqrt();
            if d < 70.0 { 100.0 + ((r * 7 + c * 3) % 13) as f64 } else { 5.0 }
        });
        let p = preprocess(&img, None).unwrap();
        assert!(p.raw_threshold > 5.0 && p.raw_threshold < 100.0);
        let fg: Vec<f64> = p.image.pixels.iter().copied().filter(|&v| v > p.threshold).collect();
        let n = fg.len() as f64;
        let mean = fg.iter().sum::<f64>() / n;
        let std = (fg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-6);
        assert!((std - 1.0).abs() < 1e-6);
    }
}
