//! Finite-difference gradient fields of colour frames.

use crate::frame::Frame;

/// Per-pixel, per-channel (dx, dy) gradient vectors of a frame.
///
/// Forward differences everywhere except the last column/row, which fall back
/// to backward differences so the field keeps the frame's dimensions.
#[derive(Debug, Clone)]
pub struct GradientField {
    width: u32,
    height: u32,
    /// Layout: `((y * width + x) * 3 + channel) * 2 + component`.
    data: Vec<f64>,
}

impl GradientField {
    pub(crate) fn from_raw(width: u32, height: u32, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize * 6);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, channel: usize) -> (f64, f64) {
        let i = ((y as usize * self.width as usize + x as usize) * 3 + channel) * 2;
        (self.data[i], self.data[i + 1])
    }

    /// Squared magnitude at a pixel, pooled over both components and all
    /// three channels.
    pub fn squared_norm(&self, x: u32, y: u32) -> f64 {
        let mut s = 0.0;
        for c in 0..3 {
            let (dx, dy) = self.get(x, y, c);
            s += dx * dx + dy * dy;
        }
        s
    }

    pub fn same_dimensions(&self, other: &GradientField) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Gradient of one channel at one pixel, with full-frame neighbour access.
#[inline]
pub fn gradient_at(frame: &Frame, x: u32, y: u32, channel: usize) -> (f64, f64) {
    let w = frame.width();
    let h = frame.height();
    let v = frame.channel(x, y, channel);
    let dx = if w == 1 {
        0.0
    } else if x + 1 < w {
        frame.channel(x + 1, y, channel) - v
    } else {
        v - frame.channel(x - 1, y, channel)
    };
    let dy = if h == 1 {
        0.0
    } else if y + 1 < h {
        frame.channel(x, y + 1, channel) - v
    } else {
        v - frame.channel(x, y - 1, channel)
    };
    (dx, dy)
}

/// Computes the full gradient field of a frame.
pub fn compute_gradient(frame: &Frame) -> GradientField {
    let (w, h) = (frame.width(), frame.height());
    let mut data = Vec::with_capacity(w as usize * h as usize * 6);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let (dx, dy) = gradient_at(frame, x, y, c);
                data.push(dx);
                data.push(dy);
            }
        }
    }
    GradientField {
        width: w,
        height: h,
        data,
    }
}
