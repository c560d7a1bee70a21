//! Draws a synthetic slice (a bright textured ellipse plus a small bright
//! speck), saves it as 16-bit PGM with a spacing sidecar, and runs the view
//! pipeline: resample to 1.5 mm, crop to 256², segment, centre the ROI on
//! the foreground centroid and cut nine overlapping windows.
//!
//! cargo run --example view_extraction -- [output_dir]

use std::fs;
use std::path::PathBuf;

use evidfuse::views::{read_pgm, run_pipeline, write_pgm, PgmDepth, RasterImage, ViewGeometry};

fn slice() -> evidfuse::Result<RasterImage> {
    let (h, w) = (300, 280);
    let pixels = (0..h * w)
        .map(|i| {
            let (r, c) = ((i / w) as f64, (i % w) as f64);
            let organ = ((r - 160.0) / 110.0).powi(2) + ((c - 120.0) / 95.0).powi(2) < 1.0;
            let speck = (r - 30.0).abs() < 4.0 && (c - 250.0).abs() < 4.0;
            if organ || speck {
                1800.0 + 300.0 * (r * 0.11).sin() * (c * 0.07).cos()
            } else {
                200.0 + (i % 17) as f64
            }
        })
        .collect();
    RasterImage::new(h, w, pixels, (1.2, 1.0))
}

fn main() -> evidfuse::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("evidfuse-views"));
    fs::create_dir_all(&dir)?;
    let path = dir.join("slice.pgm");
    write_pgm(fs::File::create(&path)?, &slice()?, PgmDepth::Sixteen)?;
    fs::write(dir.join("slice.pgm.spacing"), "spacing=1.2,1.0\n")?;

    let img = read_pgm(&path)?;
    let out = run_pipeline(&img, None, ViewGeometry::default())?;
    let p = &out.preprocessed;
    println!("input {}x{} at {:?} mm -> {}x{}", img.height, img.width, img.spacing, p.image.height, p.image.width);
    println!("otsu threshold {:.1} (normalized {:.3})", p.raw_threshold, p.threshold);
    println!("centroid {:?}, ROI origin {:?}", out.centroid, out.views.roi_origin);
    for (k, (v, o)) in out.views.local.iter().zip(&out.views.window_origins).enumerate() {
        let mean = v.pixels.iter().sum::<f64>() / v.pixels.len() as f64;
        println!("view {}: origin {:?} in ROI, {}x{}, mean {:+.3}", k + 1, o, v.height, v.width, mean);
    }
    println!("slice written to {}", path.display());
    Ok(())
}
