//! Illumination-aware gradient mixing weights.
//!
//! The per-pixel weight compares the squared gradient magnitudes of the
//! source and target frames and says how much of the source intensity
//! should survive in the cloned region when the two videos disagree on
//! illumination.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::gradient::{gradient_at, GradientField};
use crate::trimap::Trimap;

/// Squared-norm floor below which a pixel counts as gradient-free.
const DEGENERATE_NORM: f64 = 1e-12;

/// Per-pixel mixing weights derived from gradient magnitudes.
#[derive(Debug, Clone)]
pub struct MixingWeights {
    width: u32,
    height: u32,
    /// Primary weight in [0, 1]: `|Gs|^2 / (|Gs|^2 + |Gt|^2)`, 0.5 where
    /// both fields vanish.
    ma: Vec<f64>,
    /// Legacy weight `ma + mean(colour_shift)`; deliberately unclamped.
    legacy: Option<Vec<f64>>,
    /// Per-pixel colour shift fed into the legacy weight.
    colour_shift: Option<Vec<[f64; 3]>>,
}

impl MixingWeights {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn ma(&self, x: u32, y: u32) -> f64 {
        self.ma[y as usize * self.width as usize + x as usize]
    }

    pub fn ma_values(&self) -> &[f64] {
        &self.ma
    }

    /// Legacy weight, present only when built by [`legacy_mixing_weight`].
    pub fn legacy(&self, x: u32, y: u32) -> Option<f64> {
        self.legacy
            .as_ref()
            .map(|a| a[y as usize * self.width as usize + x as usize])
    }

    pub fn colour_shift(&self) -> Option<&[[f64; 3]]> {
        self.colour_shift.as_deref()
    }

    /// A uniform weight field, used to force the degenerate baseline limit.
    pub fn constant(width: u32, height: u32, value: f64) -> Self {
        Self {
            width,
            height,
            ma: vec![value; width as usize * height as usize],
            legacy: None,
            colour_shift: None,
        }
    }

    /// Default per-pixel selector for gradient blending: `(ma, ma)`.
    pub fn b_selector(&self) -> Vec<[f64; 2]> {
        self.ma.iter().map(|&m| [m, m]).collect()
    }

    pub fn matches_frame(&self, frame: &Frame) -> Result<()> {
        if self.width == frame.width() && self.height == frame.height() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what: "mixing weights",
                got_w: self.width,
                got_h: self.height,
                want_w: frame.width(),
                want_h: frame.height(),
            })
        }
    }
}

fn ensure_same_fields(gs: &GradientField, gt: &GradientField) -> Result<()> {
    if gs.same_dimensions(gt) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what: "gradient field",
            got_w: gt.width(),
            got_h: gt.height(),
            want_w: gs.width(),
            want_h: gs.height(),
        })
    }
}

#[inline]
fn weight_from_norms(sn: f64, tn: f64) -> f64 {
    if sn < DEGENERATE_NORM && tn < DEGENERATE_NORM {
        0.5
    } else {
        sn / (sn + tn)
    }
}

/// Computes the per-pixel mixing weight from two gradient fields.
pub fn mixing_weight(gs: &GradientField, gt: &GradientField) -> Result<MixingWeights> {
    ensure_same_fields(gs, gt)?;
    let (w, h) = (gs.width(), gs.height());
    let mut ma = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            ma.push(weight_from_norms(
                gs.squared_norm(x, y),
                gt.squared_norm(x, y),
            ));
        }
    }
    Ok(MixingWeights {
        width: w,
        height: h,
        ma,
        legacy: None,
        colour_shift: None,
    })
}

/// Legacy variant that adds the mean of a per-pixel colour shift on top of
/// the gradient ratio. Kept for side-by-side comparison; the result is not
/// clamped, downstream consumers clamp.
pub fn legacy_mixing_weight(
    gs: &GradientField,
    gt: &GradientField,
    colour_shift: &[[f64; 3]],
) -> Result<MixingWeights> {
    let mut weights = mixing_weight(gs, gt)?;
    let n = weights.ma.len();
    if colour_shift.len() != n {
        return Err(Error::InvalidParameter(format!(
            "colour shift has {} entries, expected {n}",
            colour_shift.len()
        )));
    }
    let legacy = weights
        .ma
        .iter()
        .zip(colour_shift)
        .map(|(&m, s)| m + (s[0] + s[1] + s[2]) / 3.0)
        .collect();
    weights.legacy = Some(legacy);
    weights.colour_shift = Some(colour_shift.to_vec());
    Ok(weights)
}

/// Global discolouration statistic between two consecutive source frames:
/// mean colour of `curr` minus mean colour of `prev`.
pub fn mean_colour_shift(curr: &Frame, prev: &Frame) -> [f64; 3] {
    let mean = |f: &Frame| {
        let mut m = [0.0f64; 3];
        for px in f.data().chunks_exact(3) {
            for c in 0..3 {
                m[c] += px[c];
            }
        }
        let n = (f.width() as f64) * (f.height() as f64);
        m.map(|v| v / n)
    };
    let mc = mean(curr);
    let mp = mean(prev);
    [mc[0] - mp[0], mc[1] - mp[1], mc[2] - mp[2]]
}

/// Blends two gradient fields with a per-pixel selector `b` in `[0,1]^2`:
/// `G = b .* Gs + (1 - b) .* Gt`, applied per component and channel.
pub fn mixed_gradient(
    gs: &GradientField,
    gt: &GradientField,
    b: &[[f64; 2]],
) -> Result<GradientField> {
    ensure_same_fields(gs, gt)?;
    let (w, h) = (gs.width(), gs.height());
    let n = w as usize * h as usize;
    if b.len() != n {
        return Err(Error::InvalidParameter(format!(
            "selector has {} entries, expected {n}",
            b.len()
        )));
    }
    if b.iter()
        .any(|s| !(0.0..=1.0).contains(&s[0]) || !(0.0..=1.0).contains(&s[1]))
    {
        return Err(Error::InvalidParameter(
            "selector components must lie in [0, 1]".into(),
        ));
    }
    let mut data = Vec::with_capacity(n * 6);
    for y in 0..h {
        for x in 0..w {
            let sel = b[y as usize * w as usize + x as usize];
            for c in 0..3 {
                let (sx, sy) = gs.get(x, y, c);
                let (tx, ty) = gt.get(x, y, c);
                data.push(sel[0] * sx + (1.0 - sel[0]) * tx);
                data.push(sel[1] * sy + (1.0 - sel[1]) * ty);
            }
        }
    }
    Ok(GradientField::from_raw(w, h, data))
}

/// Mixing weights evaluated only on the cloned region of a trimap, using
/// full-frame neighbour access for the differences. Off-region entries are
/// filled with 0.5 and must not be consumed.
pub fn region_mixing_weights(
    source: &Frame,
    target: &Frame,
    trimap: &Trimap,
) -> Result<MixingWeights> {
    source.ensure_same_dimensions(target, "target frame")?;
    trimap.ensure_matches_frame(source)?;
    let (w, h) = (source.width(), source.height());
    let mut ma = vec![0.5; w as usize * h as usize];
    for y in 0..h {
        for x in 0..w {
            if !trimap.in_region(x, y) {
                continue;
            }
            let mut sn = 0.0;
            let mut tn = 0.0;
            for c in 0..3 {
                let (sx, sy) = gradient_at(source, x, y, c);
                let (tx, ty) = gradient_at(target, x, y, c);
                sn += sx * sx + sy * sy;
                tn += tx * tx + ty * ty;
            }
            ma[y as usize * w as usize + x as usize] = weight_from_norms(sn, tn);
        }
    }
    Ok(MixingWeights {
        width: w,
        height: h,
        ma,
        legacy: None,
        colour_shift: None,
    })
}
