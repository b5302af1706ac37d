//! Raster file I/O: 8-bit PNG (via the `image` crate), binary PGM (P5) and
//! binary PPM (P6). Pixels are rounded and clamped to [0, 255] on save.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{ColorType, DynamicImage, ImageReader};
use sigmap_core::Raster;

use crate::{CliError, CliResult};

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Loads an 8-bit grayscale or RGB image (PNG, PGM or PPM by extension).
pub fn load_raster(path: &Path) -> CliResult<Raster> {
    match extension(path) {
        "png" => load_png(path),
        "pgm" | "ppm" => load_pnm(path),
        other => Err(CliError::Usage(format!(
            "unsupported image extension '{other}' for {}",
            path.display()
        ))),
    }
}

/// Saves a raster as PNG, PGM (grayscale) or PPM (color) by extension.
pub fn save_raster(raster: &Raster, path: &Path) -> CliResult<()> {
    match extension(path) {
        "png" => save_png(raster, path),
        "pgm" => {
            if raster.channels() != 1 {
                return Err(CliError::Usage("PGM holds grayscale only; use .ppm".into()));
            }
            save_pnm(raster, path)
        }
        "ppm" => {
            if raster.channels() != 3 {
                return Err(CliError::Usage("PPM holds color only; use .pgm".into()));
            }
            save_pnm(raster, path)
        }
        other => Err(CliError::Usage(format!(
            "unsupported image extension '{other}' for {}",
            path.display()
        ))),
    }
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn load_png(path: &Path) -> CliResult<Raster> {
    let img = ImageReader::open(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        .decode()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, bytes) = match img {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw()),
        DynamicImage::ImageLumaA8(b) => {
            (1, b.pixels().map(|p| p.0[0]).collect())
        }
        DynamicImage::ImageRgba8(b) => {
            (3, b.pixels().flat_map(|p| [p.0[0], p.0[1], p.0[2]]).collect())
        }
        other => {
            return Err(CliError::Io(format!(
                "{}: unsupported bit depth or color type {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    let data = bytes.into_iter().map(f64::from).collect();
    Raster::from_vec(w, h, channels, data).map_err(Into::into)
}

fn save_png(raster: &Raster, path: &Path) -> CliResult<()> {
    let bytes: Vec<u8> = raster.data().iter().map(|&v| quantize(v)).collect();
    let color = if raster.channels() == 1 { ColorType::L8 } else { ColorType::Rgb8 };
    image::save_buffer(
        path,
        &bytes,
        raster.width() as u32,
        raster.height() as u32,
        color,
    )
    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parses the P5/P6 header: magic, whitespace/comment-separated width,
/// height and maxval, then a single whitespace byte before the raster.
fn load_pnm(path: &Path) -> CliResult<Raster> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |m: &str| CliError::Io(format!("{}: {m}", path.display()));
    if bytes.len() < 2 {
        return Err(bad("truncated file"));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(bad("not a binary PGM/PPM file")),
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // skip whitespace and '#' comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_digit() => break,
                _ => return Err(bad("malformed header")),
            }
        }
        let mut v = 0usize;
        while let Some(b) = bytes.get(pos).filter(|b| b.is_ascii_digit()) {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as usize))
                .ok_or_else(|| bad("dimension overflow"))?;
            pos += 1;
        }
        *field = v;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(bad("only 8-bit (maxval 255) PGM/PPM is supported"));
    }
    pos += 1; // single whitespace after maxval
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| bad("dimension overflow"))?;
    let raster_bytes = bytes.get(pos..pos + need).ok_or_else(|| bad("truncated pixel data"))?;
    let data = raster_bytes.iter().map(|&b| f64::from(b)).collect();
    Raster::from_vec(w, h, channels, data).map_err(Into::into)
}

fn save_pnm(raster: &Raster, path: &Path) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    let magic = if raster.channels() == 1 { "P5" } else { "P6" };
    write!(out, "{magic}\n{} {}\n255\n", raster.width(), raster.height())?;
    let bytes: Vec<u8> = raster.data().iter().map(|&v| quantize(v)).collect();
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}
