//! Sampling-based alpha matting for the unknown region: candidate gathering
//! with affinity suppression, projection-based alpha estimation, colour-
//! correlation smoothing, and the matte composites.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameRole};
use crate::pso::{derive_stream_seed, pso_select, PsoConfig};
use crate::trimap::{Trimap, TrimapLabel};

/// One colour sample taken from the foreground or background region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub colour: [f64; 3],
    pub pos: (u32, u32),
}

/// Foreground and background candidates gathered for one unknown pixel.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub f_list: Vec<Candidate>,
    pub b_list: Vec<Candidate>,
}

impl CandidateSet {
    /// Materializes the sample pair at the given candidate indices.
    pub fn pair(
        &self,
        f_index: usize,
        b_index: usize,
        z_colour: [f64; 3],
        z_pos: (u32, u32),
    ) -> SamplePair {
        let f = &self.f_list[f_index];
        let b = &self.b_list[b_index];
        SamplePair {
            f_index,
            b_index,
            f_colour: f.colour,
            b_colour: b.colour,
            f_pos: f.pos,
            b_pos: b.pos,
            z_colour,
            z_pos,
        }
    }
}

/// A candidate foreground/background explanation of one observed pixel.
#[derive(Debug, Clone, Copy)]
pub struct SamplePair {
    pub f_index: usize,
    pub b_index: usize,
    pub f_colour: [f64; 3],
    pub b_colour: [f64; 3],
    pub f_pos: (u32, u32),
    pub b_pos: (u32, u32),
    pub z_colour: [f64; 3],
    pub z_pos: (u32, u32),
}

/// Per-pixel opacity in [0, 1]: 1 on foreground, 0 on background, estimated
/// on unknown pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatte {
    width: u32,
    height: u32,
    alpha: Vec<f64>,
}

impl AlphaMatte {
    /// Matte seeded from trimap labels: foreground 1, background 0,
    /// unknown `fill`.
    pub fn from_trimap(trimap: &Trimap, fill: f64) -> Self {
        let (w, h) = (trimap.width(), trimap.height());
        let mut alpha = Vec::with_capacity(w as usize * h as usize);
        for y in 0..h {
            for x in 0..w {
                alpha.push(match trimap.label(x, y) {
                    TrimapLabel::Foreground => 1.0,
                    TrimapLabel::Background => 0.0,
                    TrimapLabel::Unknown => fill.clamp(0.0, 1.0),
                });
            }
        }
        Self {
            width: w,
            height: h,
            alpha,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.alpha[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: f64) {
        self.alpha[y as usize * self.width as usize + x as usize] = value.clamp(0.0, 1.0);
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    fn matches_frame(&self, frame: &Frame) -> Result<()> {
        if self.width == frame.width() && self.height == frame.height() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what: "alpha matte",
                got_w: self.width,
                got_h: self.height,
                want_w: frame.width(),
                want_h: frame.height(),
            })
        }
    }
}

#[inline]
fn colour_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[inline]
fn pixel_distance(a: (u32, u32), b: (u32, u32)) -> f64 {
    ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt()
}

/// Drops candidates whose colour repeats an already-kept one within
/// `epsilon`, scanning in the given (nearest-first) order.
fn suppress(cands: &[Candidate], epsilon: f64, keep: usize) -> Vec<Candidate> {
    let mut kept: Vec<Candidate> = Vec::with_capacity(keep);
    for c in cands {
        if kept.len() >= keep {
            break;
        }
        if kept
            .iter()
            .all(|k| colour_distance(k.colour, c.colour) >= epsilon)
        {
            kept.push(*c);
        }
    }
    kept
}

fn gather_nearest(
    frame: &Frame,
    trimap: &Trimap,
    z: (u32, u32),
    label: TrimapLabel,
    count: usize,
) -> Vec<Candidate> {
    let (w, h) = (trimap.width() as i64, trimap.height() as i64);
    let (zx, zy) = (z.0 as i64, z.1 as i64);
    let max_radius = w.max(h);
    let mut found: Vec<(i64, u32, u32)> = Vec::new();

    // Chebyshev rings; a ring at radius r can only contribute candidates at
    // Euclidean distance >= r, so the scan stops once `count` candidates sit
    // at or below the ring radius.
    let mut ring = 0i64;
    while ring <= max_radius {
        let mut visit = |x: i64, y: i64| {
            if x < 0 || y < 0 || x >= w || y >= h {
                return;
            }
            let (xu, yu) = (x as u32, y as u32);
            if trimap.label(xu, yu) == label {
                let d2 = (x - zx) * (x - zx) + (y - zy) * (y - zy);
                found.push((d2, xu, yu));
            }
        };
        if ring == 0 {
            visit(zx, zy);
        } else {
            for x in (zx - ring)..=(zx + ring) {
                visit(x, zy - ring);
                visit(x, zy + ring);
            }
            for y in (zy - ring + 1)..(zy + ring) {
                visit(zx - ring, y);
                visit(zx + ring, y);
            }
        }
        let within = found.iter().filter(|(d2, _, _)| *d2 <= ring * ring).count();
        if within >= count {
            break;
        }
        ring += 1;
    }

    found.sort_unstable_by_key(|&(d2, x, y)| (d2, y, x));
    found.truncate(count);
    found
        .into_iter()
        .map(|(_, x, y)| Candidate {
            colour: frame.get(x, y),
            pos: (x, y),
        })
        .collect()
}

/// Collects foreground and background candidates for one unknown pixel.
///
/// The `3 * max_per_side` nearest pixels of each side are gathered, near-
/// duplicate colours are suppressed nearest-first within `epsilon`, and each
/// list is truncated to `max_per_side`. If suppression empties a list it is
/// retried with `epsilon = 0`.
pub fn collect_samples(
    frame: &Frame,
    trimap: &Trimap,
    z: (u32, u32),
    max_per_side: usize,
    epsilon: f64,
) -> Result<CandidateSet> {
    trimap.ensure_matches_frame(frame)?;
    if trimap.label(z.0, z.1) != TrimapLabel::Unknown {
        return Err(Error::InvalidParameter(format!(
            "pixel ({}, {}) is not in the unknown region",
            z.0, z.1
        )));
    }
    if max_per_side == 0 {
        return Err(Error::InvalidParameter("max_per_side must be >= 1".into()));
    }
    let gather_side = |label: TrimapLabel| {
        let raw = gather_nearest(frame, trimap, z, label, max_per_side * 3);
        let kept = suppress(&raw, epsilon, max_per_side);
        if kept.is_empty() {
            suppress(&raw, 0.0, max_per_side)
        } else {
            kept
        }
    };
    Ok(CandidateSet {
        f_list: gather_side(TrimapLabel::Foreground),
        b_list: gather_side(TrimapLabel::Background),
    })
}

/// Projects the observed colour onto the foreground/background segment:
/// `alpha = (z - B) . (F - B) / |F - B|^2`, clamped to [0, 1]. Coincident
/// samples fall back to whichever endpoint is closer.
pub fn estimate_alpha(pair: &SamplePair) -> f64 {
    let d = [
        pair.f_colour[0] - pair.b_colour[0],
        pair.f_colour[1] - pair.b_colour[1],
        pair.f_colour[2] - pair.b_colour[2],
    ];
    let n2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if n2 < 1e-12 {
        let df = colour_distance(pair.z_colour, pair.f_colour);
        let db = colour_distance(pair.z_colour, pair.b_colour);
        return if df <= db { 1.0 } else { 0.0 };
    }
    let zb = [
        pair.z_colour[0] - pair.b_colour[0],
        pair.z_colour[1] - pair.b_colour[1],
        pair.z_colour[2] - pair.b_colour[2],
    ];
    let alpha = (zb[0] * d[0] + zb[1] * d[1] + zb[2] * d[2]) / n2;
    alpha.clamp(0.0, 1.0)
}

/// Weights for the pair-selection cost.
#[derive(Debug, Clone, Copy)]
pub struct FitnessParams {
    /// Spatial-term weight; colour distortion dominates at the default 0.1.
    pub eta: f64,
    /// Image diagonal in pixels, normalizing the spatial term.
    pub diagonal: f64,
}

/// Cost of explaining the observed pixel with this pair: chromatic
/// distortion of the alpha-projection plus a normalized spatial distance.
pub fn pair_fitness(pair: &SamplePair, params: &FitnessParams) -> f64 {
    let alpha = estimate_alpha(pair);
    let recomposed = [
        alpha * pair.f_colour[0] + (1.0 - alpha) * pair.b_colour[0],
        alpha * pair.f_colour[1] + (1.0 - alpha) * pair.b_colour[1],
        alpha * pair.f_colour[2] + (1.0 - alpha) * pair.b_colour[2],
    ];
    let distortion = colour_distance(pair.z_colour, recomposed);
    let spatial = (pixel_distance(pair.z_pos, pair.f_pos) + pixel_distance(pair.z_pos, pair.b_pos))
        / params.diagonal;
    distortion + params.eta * spatial
}

/// Colour-affinity smoothing of the matte over the unknown region.
///
/// Each unknown pixel becomes the Gaussian-colour-weighted average of the
/// matte in its `(2 radius + 1)^2` window; foreground and background pixels
/// contribute 1 and 0 and are themselves left untouched.
pub fn smooth_matte(
    raw: &AlphaMatte,
    frame: &Frame,
    trimap: &Trimap,
    radius: u32,
    sigma_c: f64,
) -> AlphaMatte {
    if radius == 0 {
        return raw.clone();
    }
    let (w, h) = (raw.width() as i64, raw.height() as i64);
    let sigma2 = (sigma_c * sigma_c).max(f64::MIN_POSITIVE);
    let mut out = raw.clone();
    for y in 0..h {
        for x in 0..w {
            if trimap.label(x as u32, y as u32) != TrimapLabel::Unknown {
                continue;
            }
            let zc = frame.get(x as u32, y as u32);
            let r = radius as i64;
            let mut num = 0.0;
            let mut den = 0.0;
            for qy in (y - r).max(0)..=(y + r).min(h - 1) {
                for qx in (x - r).max(0)..=(x + r).min(w - 1) {
                    let qc = frame.get(qx as u32, qy as u32);
                    let d2 =
                        (zc[0] - qc[0]).powi(2) + (zc[1] - qc[1]).powi(2) + (zc[2] - qc[2]).powi(2);
                    let wgt = (-d2 / sigma2).exp();
                    num += wgt * raw.get(qx as u32, qy as u32);
                    den += wgt;
                }
            }
            if den > 0.0 {
                out.set(x as u32, y as u32, num / den);
            }
        }
    }
    out
}

/// Per-pixel convex combination of the cloned frame and the target steered
/// by the matte. Foreground shows the clone, background the target.
pub fn matte_composite(matte: &AlphaMatte, cloned: &Frame, target: &Frame) -> Result<Frame> {
    cloned.ensure_same_dimensions(target, "target frame")?;
    matte.matches_frame(cloned)?;
    let mut out = target.clone().with_role(FrameRole::MatteComposite);
    for y in 0..cloned.height() {
        for x in 0..cloned.width() {
            let a = matte.get(x, y);
            let c = cloned.get(x, y);
            let t = target.get(x, y);
            out.set(
                x,
                y,
                [
                    a * c[0] + (1.0 - a) * t[0],
                    a * c[1] + (1.0 - a) * t[1],
                    a * c[2] + (1.0 - a) * t[2],
                ],
            );
        }
    }
    Ok(out)
}

/// Constant-alpha blend of the cloned frame over the target. The clone
/// equals the target outside the region, so background pixels pass through.
pub fn baseline_matte_composite(cloned: &Frame, target: &Frame, alpha: f64) -> Result<Frame> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "constant alpha {alpha} outside [0, 1]"
        )));
    }
    cloned.ensure_same_dimensions(target, "target frame")?;
    let mut out = target.clone().with_role(FrameRole::MatteComposite);
    for y in 0..cloned.height() {
        for x in 0..cloned.width() {
            let c = cloned.get(x, y);
            let t = target.get(x, y);
            out.set(
                x,
                y,
                [
                    alpha * c[0] + (1.0 - alpha) * t[0],
                    alpha * c[1] + (1.0 - alpha) * t[1],
                    alpha * c[2] + (1.0 - alpha) * t[2],
                ],
            );
        }
    }
    Ok(out)
}

/// Knobs for the correlation matting pass.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MattingConfig {
    pub max_per_side: usize,
    /// Affinity-suppression radius in colour space.
    pub epsilon_a: f64,
    pub smooth_radius: u32,
    pub sigma_c: f64,
    /// Spatial weight of the pair-selection cost.
    pub eta: f64,
}

impl Default for MattingConfig {
    fn default() -> Self {
        Self {
            max_per_side: 16,
            epsilon_a: 0.05,
            smooth_radius: 2,
            sigma_c: 0.1,
            eta: 0.1,
        }
    }
}

/// Full correlation matting pass: per unknown pixel, gather candidates,
/// swarm-select the best pair, estimate alpha, then smooth. Each pixel
/// draws its random stream from `(seed, pixel index)`, so the result does
/// not depend on scheduling.
pub fn correlation_matte(
    frame: &Frame,
    trimap: &Trimap,
    cfg: &MattingConfig,
    pso: &PsoConfig,
    seed: u64,
) -> Result<AlphaMatte> {
    trimap.ensure_matches_frame(frame)?;
    pso.validate()?;
    let fitness = FitnessParams {
        eta: cfg.eta,
        diagonal: frame.diagonal(),
    };

    let mut unknown = Vec::new();
    for y in 0..trimap.height() {
        for x in 0..trimap.width() {
            if trimap.label(x, y) == TrimapLabel::Unknown {
                unknown.push((x, y));
            }
        }
    }

    let width = frame.width() as u64;
    let estimates: Vec<((u32, u32), f64)> = unknown
        .par_iter()
        .map(|&(x, y)| {
            let cands = collect_samples(frame, trimap, (x, y), cfg.max_per_side, cfg.epsilon_a)
                .expect("unknown pixel with validated trimap");
            let stream = derive_stream_seed(seed, y as u64 * width + x as u64);
            let pair = pso_select(
                &cands,
                frame.get(x, y),
                (x, y),
                &PsoConfig {
                    seed: stream,
                    ..*pso
                },
                &fitness,
            );
            ((x, y), estimate_alpha(&pair))
        })
        .collect();

    let mut raw = AlphaMatte::from_trimap(trimap, 0.0);
    for ((x, y), a) in estimates {
        raw.set(x, y, a);
    }
    Ok(smooth_matte(
        &raw,
        frame,
        trimap,
        cfg.smooth_radius,
        cfg.sigma_c,
    ))
}
