//! Normalized RGB frame container shared by every stage of the pipeline.

use crate::error::{Error, Result};

/// What a frame represents within the pipeline. Purely informational;
/// no operation branches on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameRole {
    Source,
    Target,
    Cloned,
    MatteComposite,
    Layered,
    Reference,
}

/// An H x W x 3 grid of colour values normalized to `[0, 1]`.
///
/// Values are clamped whenever they are written into a frame; intermediate
/// arithmetic elsewhere stays unclamped so that the algebra remains linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Vec<f64>,
    pub role: FrameRole,
}

impl Frame {
    /// A frame filled with a single colour.
    pub fn filled(width: u32, height: u32, colour: [f64; 3], role: FrameRole) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        let colour = colour.map(|v| v.clamp(0.0, 1.0));
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&colour);
        }
        Ok(Self {
            width,
            height,
            data,
            role,
        })
    }

    /// Builds a frame from a per-pixel generator. Generated values are clamped.
    pub fn from_fn<F>(width: u32, height: u32, role: FrameRole, mut f: F) -> Result<Self>
    where
        F: FnMut(u32, u32) -> [f64; 3],
    {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                data.extend(px.iter().map(|v| v.clamp(0.0, 1.0)));
            }
        }
        Ok(Self {
            width,
            height,
            data,
            role,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Diagonal length of the canvas in pixels.
    pub fn diagonal(&self) -> f64 {
        ((self.width as f64).powi(2) + (self.height as f64).powi(2)).sqrt()
    }

    pub fn same_dimensions(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [f64; 3] {
        let i = self.index(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn channel(&self, x: u32, y: u32, c: usize) -> f64 {
        self.data[self.index(x, y) + c]
    }

    /// Writes a pixel, clamping each channel to `[0, 1]`.
    #[inline]
    pub fn set(&mut self, x: u32, y: u32, colour: [f64; 3]) {
        let i = self.index(x, y);
        for (c, v) in colour.iter().enumerate() {
            self.data[i + c] = v.clamp(0.0, 1.0);
        }
    }

    /// Raw channel data, row-major, 3 values per pixel.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable raw access for per-pixel parallel writers. Values written this
    /// way must already be clamped by the caller.
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn with_role(mut self, role: FrameRole) -> Self {
        self.role = role;
        self
    }

    /// Checks that `other` matches this frame's canvas.
    pub fn ensure_same_dimensions(&self, other: &Frame, what: &'static str) -> Result<()> {
        if self.same_dimensions(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what,
                got_w: other.width,
                got_h: other.height,
                want_w: self.width,
                want_h: self.height,
            })
        }
    }
}
