//! Binary PGM (P5) input and output with an optional spacing sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageFormat};
use log::warn;

use super::RasterImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

impl PgmDepth {
    pub fn max_value(self) -> u16 {
        match self {
            PgmDepth::Eight => u8::MAX as u16,
            PgmDepth::Sixteen => u16::MAX,
        }
    }
}

fn sidecar_path(image: &Path) -> PathBuf {
    let mut s = image.as_os_str().to_owned();
    s.push(".spacing");
    PathBuf::from(s)
}

/// Parses `<image>.spacing` containing `spacing=<sx>,<sy>`. A missing file
/// gives `(1.0, 1.0)` and a warning.
pub fn read_spacing_sidecar(image: &Path) -> Result<(f64, f64)> {
    let path = sidecar_path(image);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            warn!("no spacing sidecar for {}; assuming 1.0 mm", image.display());
            return Ok((1.0, 1.0));
        }
        Err(e) => return Err(e.into()),
    };
    let bad = || Error::Malformed(format!("{}: expected `spacing=<sx>,<sy>`", path.display()));
    let value = text
        .lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix("spacing="))
        .ok_or_else(bad)?;
    let (sx, sy) = value.split_once(',').ok_or_else(bad)?;
    let sx: f64 = sx.trim().parse().map_err(|_| bad())?;
    let sy: f64 = sy.trim().parse().map_err(|_| bad())?;
    if !(sx > 0.0 && sy > 0.0 && sx.is_finite() && sy.is_finite()) {
        return Err(bad());
    }
    Ok((sx, sy))
}

/// Reads an 8- or 16-bit grayscale PGM; spacing comes from the sidecar.
pub fn read_pgm(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).map_err(|e| Error::io_at(path, e))?;
    if !bytes.starts_with(b"P5") {
        return Err(Error::Malformed(format!("{}: not a binary PGM (P5)", path.display())));
    }
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)?;
    let (w, h, pixels): (u32, u32, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (b.width(), b.height(), b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLuma16(b) => (b.width(), b.height(), b.into_raw().into_iter().map(f64::from).collect()),
        other => {
            return Err(Error::Malformed(format!(
                "{}: unsupported PGM color type {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    RasterImage::new(h as usize, w as usize, pixels, read_spacing_sidecar(path)?)
}

/// Writes rounded pixel values, which must already lie in `[0, depth max]`.
pub fn write_pgm(writer: impl Write, img: &RasterImage, depth: PgmDepth) -> Result<()> {
    let max = f64::from(depth.max_value());
    if let Some(p) = img.pixels.iter().find(|&&p| !(0.0..=max).contains(&p.round())) {
        return Err(Error::InvalidParameter {
            name: "pixels",
            reason: format!("{p} outside [0, {max}]"),
        });
    }
    let (w, h) = (img.width as u32, img.height as u32);
    match depth {
        PgmDepth::Eight => {
            let data: Vec<u8> = img.pixels.iter().map(|p| p.round() as u8).collect();
            PnmEncoder::new(writer)
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
                .encode(&data[..], w, h, ExtendedColorType::L8)?;
        }
        PgmDepth::Sixteen => {
            // The encoder only emits 8-bit graymaps; 16-bit P5 is big-endian.
            let mut out = std::io::BufWriter::new(writer);
            write!(out, "P5\n{w} {h}\n{}\n", u16::MAX)?;
            for p in &img.pixels {
                out.write_all(&(p.round() as u16).to_be_bytes())?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
