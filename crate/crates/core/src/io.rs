//! Image file I/O: 8-bit PNG and binary PPM/PGM, normalized on load.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameRole};
use crate::matting::AlphaMatte;
use crate::trimap::{Trimap, TrimapLabel};

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| match source {
        image::ImageError::IoError(io) => Error::Io {
            path: path.to_path_buf(),
            source: io,
        },
        other => Error::Image {
            path: path.to_path_buf(),
            source: other,
        },
    })
}

/// Loads an 8-bit image as a normalized frame (`byte / 255` exactly).
///
/// Grayscale inputs are replicated across the three channels; an alpha
/// channel, when present, is ignored.
pub fn load_frame(path: &Path, role: FrameRole) -> Result<Frame> {
    let img = open(path)?;
    let (rgb, w, h) = match img {
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            (buf.into_raw(), w, h)
        }
        DynamicImage::ImageRgba8(buf) => {
            let (w, h) = buf.dimensions();
            let rgb = buf
                .into_raw()
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect();
            (rgb, w, h)
        }
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            let rgb = buf.into_raw().iter().flat_map(|&v| [v, v, v]).collect();
            (rgb, w, h)
        }
        DynamicImage::ImageLumaA8(buf) => {
            let (w, h) = buf.dimensions();
            let rgb = buf
                .into_raw()
                .chunks_exact(2)
                .flat_map(|p| [p[0], p[0], p[0]])
                .collect();
            (rgb, w, h)
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("expected an 8-bit image, got {:?}", other.color()),
            })
        }
    };
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension {
            width: w,
            height: h,
        });
    }
    let mut i = 0;
    Frame::from_fn(w, h, role, |_, _| {
        let px: Vec<u8> = rgb[i..i + 3].to_vec();
        i += 3;
        [
            px[0] as f64 / 255.0,
            px[1] as f64 / 255.0,
            px[2] as f64 / 255.0,
        ]
    })
}

#[inline]
fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn extension_of(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Saves a frame as an 8-bit image, `byte = round(v * 255)` with half-up
/// rounding. PNG by extension `.png`, binary PPM (P6, maxval 255) by `.ppm`.
pub fn save_frame(frame: &Frame, path: &Path) -> Result<()> {
    let (w, h) = (frame.width(), frame.height());
    let bytes: Vec<u8> = frame.data().iter().map(|&v| quantize(v)).collect();
    match extension_of(path).as_str() {
        "png" => {
            let buf = image::RgbImage::from_raw(w, h, bytes).expect("sized buffer");
            buf.save(path).map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
        }
        "ppm" => write_pnm(path, b"P6", w, h, &bytes),
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("cannot encode '.{other}', use .png or .ppm"),
        }),
    }
}

fn write_pnm(path: &Path, magic: &[u8], w: u32, h: u32, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(magic).map_err(io_err)?;
    file.write_all(format!("\n{w} {h}\n255\n").as_bytes())
        .map_err(io_err)?;
    file.write_all(bytes).map_err(io_err)?;
    Ok(())
}

/// Loads a trimap from an 8-bit grayscale image: byte 0 is background,
/// 255 is foreground, anything else is unknown.
pub fn load_trimap(path: &Path) -> Result<Trimap> {
    let img = open(path)?;
    let (gray, w, h): (Vec<u8>, u32, u32) = match img {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            (buf.into_raw(), w, h)
        }
        DynamicImage::ImageLumaA8(buf) => {
            let (w, h) = buf.dimensions();
            let g = buf.into_raw().chunks_exact(2).map(|p| p[0]).collect();
            (g, w, h)
        }
        // Accept RGB files that are grayscale in content.
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            let raw = buf.into_raw();
            if raw.chunks_exact(3).any(|p| p[0] != p[1] || p[1] != p[2]) {
                return Err(Error::UnsupportedFormat {
                    path: path.to_path_buf(),
                    reason: "trimap must be grayscale".into(),
                });
            }
            (raw.chunks_exact(3).map(|p| p[0]).collect(), w, h)
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("expected 8-bit grayscale, got {:?}", other.color()),
            })
        }
    };
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension {
            width: w,
            height: h,
        });
    }
    let labels = gray
        .iter()
        .map(|&b| match b {
            0 => TrimapLabel::Background,
            255 => TrimapLabel::Foreground,
            _ => TrimapLabel::Unknown,
        })
        .collect();
    Trimap::from_labels(w, h, labels)
}

/// Saves an alpha matte as an 8-bit grayscale image (`round(alpha * 255)`).
/// PNG by extension `.png`, binary PGM (P5) by `.pgm`.
pub fn save_matte(matte: &AlphaMatte, path: &Path) -> Result<()> {
    let (w, h) = (matte.width(), matte.height());
    let bytes: Vec<u8> = matte.values().iter().map(|&a| quantize(a)).collect();
    match extension_of(path).as_str() {
        "png" => {
            let buf = image::GrayImage::from_raw(w, h, bytes).expect("sized buffer");
            buf.save(path).map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
        }
        "pgm" => write_pnm(path, b"P5", w, h, &bytes),
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("cannot encode '.{other}', use .png or .pgm"),
        }),
    }
}
