use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the compositing pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("unsupported image format for {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("zero-dimension image: {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("dimension mismatch: {what} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        what: &'static str,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("trimap has no foreground pixels")]
    NoForeground,
    #[error("trimap has no background pixels")]
    NoBackground,
    #[error("trimap region is empty")]
    EmptyRegion,
    #[error("trimap region has {0} connected components, expected exactly 1")]
    MultipleComponents(usize),
    #[error("point ({0}, {1}) lies outside the boundary polygon")]
    OutsidePolygon(f64, f64),
    #[error("boundary polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("search window radius {0} leaves the canvas for every boundary vertex")]
    WindowTooLarge(u32),
    #[error("contour flow is required for frames after the first")]
    FlowRequired,
    #[error("coordinate ({x}, {y}) is outside the {width}x{height} canvas")]
    OutOfBounds {
        x: u32,
        y: u32,
        width: u32,
        height: u32,
    },
    #[error("layer weights must satisfy alpha + beta = 1 with both non-negative, got alpha={alpha}, beta={beta}")]
    LayerWeights { alpha: f64, beta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
