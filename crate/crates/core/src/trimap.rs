//! Trimap labels, region boundary extraction, and frame-to-frame propagation.

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Per-pixel trimap label. `Foreground` and `Unknown` together form the
/// cloned region; matting is posed on `Unknown` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimapLabel {
    Foreground,
    Background,
    Unknown,
}

/// Per-pixel partition of a canvas into foreground / background / unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Trimap {
    width: u32,
    height: u32,
    labels: Vec<TrimapLabel>,
}

impl Trimap {
    /// Builds a trimap, enforcing that at least one foreground and one
    /// background pixel exist (matting is undefined otherwise).
    pub fn from_labels(width: u32, height: u32, labels: Vec<TrimapLabel>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        assert_eq!(labels.len(), width as usize * height as usize);
        if !labels.contains(&TrimapLabel::Foreground) {
            return Err(Error::NoForeground);
        }
        if !labels.contains(&TrimapLabel::Background) {
            return Err(Error::NoBackground);
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn label(&self, x: u32, y: u32) -> TrimapLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// True when the pixel belongs to the cloned region (foreground or unknown).
    #[inline]
    pub fn in_region(&self, x: u32, y: u32) -> bool {
        matches!(
            self.label(x, y),
            TrimapLabel::Foreground | TrimapLabel::Unknown
        )
    }

    /// (foreground, background, unknown) pixel counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for l in &self.labels {
            match l {
                TrimapLabel::Foreground => c.0 += 1,
                TrimapLabel::Background => c.1 += 1,
                TrimapLabel::Unknown => c.2 += 1,
            }
        }
        c
    }

    pub fn ensure_matches_frame(&self, frame: &Frame) -> Result<()> {
        if self.width == frame.width() && self.height == frame.height() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what: "trimap",
                got_w: self.width,
                got_h: self.height,
                want_w: frame.width(),
                want_h: frame.height(),
            })
        }
    }

    /// Trimap rigidly shifted by `(dx, dy)`. Pixels shifted off canvas are
    /// dropped; newly exposed pixels become background.
    pub fn translated(&self, dx: i32, dy: i32) -> Result<Trimap> {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut labels = vec![TrimapLabel::Background; self.labels.len()];
        for y in 0..h {
            for x in 0..w {
                let sx = x - dx as i64;
                let sy = y - dy as i64;
                if sx >= 0 && sx < w && sy >= 0 && sy < h {
                    labels[(y * w + x) as usize] = self.label(sx as u32, sy as u32);
                }
            }
        }
        Trimap::from_labels(self.width, self.height, labels)
    }
}

/// Ordered outer contour of the cloned region.
///
/// Contours produced by [`extract_boundary`] have 8-adjacent consecutive
/// vertices; hierarchically sampled contours keep order and closedness only.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    vertices: Vec<(u32, u32)>,
    closed: bool,
}

impl Boundary {
    pub fn new(vertices: Vec<(u32, u32)>, closed: bool) -> Self {
        Self { vertices, closed }
    }

    pub fn vertices(&self) -> &[(u32, u32)] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    /// Vertices as floating-point polygon points.
    pub fn polygon(&self) -> Vec<(f64, f64)> {
        self.vertices
            .iter()
            .map(|&(x, y)| (x as f64, y as f64))
            .collect()
    }
}

/// Estimated contour motion between two consecutive frames.
#[derive(Debug, Clone)]
pub struct ContourFlow {
    /// Best block-matching displacement per boundary vertex.
    pub displacements: Vec<(i32, i32)>,
    pub window_radius: u32,
    translation: (i32, i32),
}

impl ContourFlow {
    /// Whole-contour rigid translation: per-component median of the
    /// per-vertex displacements (lower median for even counts).
    pub fn translation(&self) -> (i32, i32) {
        self.translation
    }
}

// Moore neighbourhood in clockwise screen order starting at west.
const MOORE: [(i32, i32); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn region_mask(t: &Trimap) -> Vec<bool> {
    let mut mask = Vec::with_capacity(t.width as usize * t.height as usize);
    for y in 0..t.height {
        for x in 0..t.width {
            mask.push(t.in_region(x, y));
        }
    }
    mask
}

fn count_components(mask: &[bool], w: usize, h: usize) -> usize {
    let mut seen = vec![false; mask.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in MOORE {
                let (nx, ny) = (x + dx as i64, y + dy as i64);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let ni = ny as usize * w + nx as usize;
                if mask[ni] && !seen[ni] {
                    seen[ni] = true;
                    stack.push(ni);
                }
            }
        }
    }
    components
}

fn shoelace_doubled(vertices: &[(u32, u32)]) -> i64 {
    let n = vertices.len();
    let mut sum = 0i64;
    for i in 0..n {
        let (x0, y0) = vertices[i];
        let (x1, y1) = vertices[(i + 1) % n];
        sum += x0 as i64 * y1 as i64 - x1 as i64 * y0 as i64;
    }
    sum
}

/// Traces the outer contour of the foreground-plus-unknown region and
/// returns it together with the remaining region pixels.
///
/// Moore-neighbour tracing starts from the topmost-then-leftmost region
/// pixel; the returned vertex order is counter-clockwise in the Cartesian
/// reading of pixel coordinates, with no duplicate vertices.
pub fn extract_boundary(t: &Trimap) -> Result<(Boundary, Vec<(u32, u32)>)> {
    let (w, h) = (t.width as usize, t.height as usize);
    let mask = region_mask(t);
    let region_pixels = mask.iter().filter(|&&m| m).count();
    if region_pixels == 0 {
        return Err(Error::EmptyRegion);
    }
    let components = count_components(&mask, w, h);
    if components != 1 {
        return Err(Error::MultipleComponents(components));
    }

    let start_idx = mask.iter().position(|&m| m).expect("region is non-empty");
    let start = ((start_idx % w) as i64, (start_idx / w) as i64);
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && mask[y as usize * w + x as usize]
    };

    // Backtrack starts at the west neighbour, which is off-region because the
    // start pixel is first in scan order.
    let mut trace: Vec<(i64, i64)> = vec![start];
    let mut current = start;
    let mut backtrack_dir = 0usize;
    let initial_state = (current, backtrack_dir);
    let cap = 8 * region_pixels + 16;
    loop {
        let mut advanced = false;
        for step in 1..=8 {
            let dir = (backtrack_dir + step) % 8;
            let (dx, dy) = MOORE[dir];
            let next = (current.0 + dx as i64, current.1 + dy as i64);
            if at(next.0, next.1) {
                // New backtrack: the neighbour checked just before this one,
                // expressed as a direction from the new pixel.
                let prev_dir = (backtrack_dir + step - 1) % 8;
                let (px, py) = MOORE[prev_dir];
                let back_pixel = (current.0 + px as i64, current.1 + py as i64);
                let nb = MOORE
                    .iter()
                    .position(|&(bx, by)| (next.0 + bx as i64, next.1 + by as i64) == back_pixel)
                    .expect("backtrack pixel is adjacent to the next pixel");
                current = next;
                backtrack_dir = nb;
                advanced = true;
                break;
            }
        }
        if !advanced {
            break; // isolated single pixel
        }
        if (current, backtrack_dir) == initial_state {
            break;
        }
        trace.push(current);
        if trace.len() > cap {
            break;
        }
    }

    // Spur pixels can be visited twice; keep first occurrences only.
    let mut on_contour = vec![false; w * h];
    let mut vertices: Vec<(u32, u32)> = Vec::with_capacity(trace.len());
    for (x, y) in trace {
        let i = y as usize * w + x as usize;
        if !on_contour[i] {
            on_contour[i] = true;
            vertices.push((x as u32, y as u32));
        }
    }

    if vertices.len() >= 3 && shoelace_doubled(&vertices) < 0 {
        vertices[1..].reverse();
    }

    let mut inner = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if mask[i] && !on_contour[i] {
                inner.push((x as u32, y as u32));
            }
        }
    }

    Ok((Boundary::new(vertices, true), inner))
}

/// Keeps every `ceil(len / max_vertices)`-th contour vertex starting at
/// index 0. Contours already within budget pass through unchanged.
pub fn hierarchical_boundary_sample(boundary: &Boundary, max_vertices: usize) -> Boundary {
    let n = boundary.len();
    if n <= max_vertices {
        return boundary.clone();
    }
    let step = n.div_ceil(max_vertices);
    let vertices = boundary.vertices().iter().step_by(step).copied().collect();
    Boundary::new(vertices, boundary.closed())
}

const PATCH_HALF_WIDTH: i64 = 3;

fn window_on_canvas(cx: i64, cy: i64, margin: i64, w: i64, h: i64) -> bool {
    cx - margin >= 0 && cy - margin >= 0 && cx + margin < w && cy + margin < h
}

fn patch_sad(prev: &Frame, curr: &Frame, vx: i64, vy: i64, dx: i64, dy: i64) -> f64 {
    let mut sad = 0.0;
    for v in -PATCH_HALF_WIDTH..=PATCH_HALF_WIDTH {
        for u in -PATCH_HALF_WIDTH..=PATCH_HALF_WIDTH {
            let p = prev.get((vx + u) as u32, (vy + v) as u32);
            let q = curr.get((vx + dx + u) as u32, (vy + dy + v) as u32);
            for c in 0..3 {
                sad += (p[c] - q[c]).abs();
            }
        }
    }
    sad
}

fn lower_median(mut values: Vec<i32>) -> i32 {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

/// Propagates a trimap to the next frame.
///
/// Each boundary vertex is block-matched (sum of absolute colour differences
/// over a 7x7 patch) against the new frame within `±window_radius`; the
/// contour's rigid translation is the per-component median of the per-vertex
/// displacements, and the trimap is shifted by it. Ties prefer the smaller
/// displacement. Vertices whose search window leaves the canvas do not vote.
pub fn propagate_trimap(
    prev_trimap: &Trimap,
    prev_frame: &Frame,
    curr_frame: &Frame,
    window_radius: u32,
) -> Result<(Trimap, ContourFlow)> {
    prev_trimap.ensure_matches_frame(prev_frame)?;
    prev_trimap.ensure_matches_frame(curr_frame)?;
    let (boundary, _) = extract_boundary(prev_trimap)?;
    let (w, h) = (prev_frame.width() as i64, prev_frame.height() as i64);
    let r = window_radius as i64;
    let margin = r + PATCH_HALF_WIDTH;

    let mut displacements = Vec::new();
    for &(vx, vy) in boundary.vertices() {
        let (vx, vy) = (vx as i64, vy as i64);
        if !window_on_canvas(vx, vy, margin, w, h) {
            continue;
        }
        let mut best: Option<(f64, i64, (i32, i32))> = None;
        for dy in -r..=r {
            for dx in -r..=r {
                let sad = patch_sad(prev_frame, curr_frame, vx, vy, dx, dy);
                let d2 = dx * dx + dy * dy;
                let better = match &best {
                    None => true,
                    Some((bs, bd, _)) => sad < *bs || (sad == *bs && d2 < *bd),
                };
                if better {
                    best = Some((sad, d2, (dx as i32, dy as i32)));
                }
            }
        }
        displacements.push(best.expect("at least the zero displacement is evaluated").2);
    }

    if displacements.is_empty() {
        return Err(Error::WindowTooLarge(window_radius));
    }

    let tx = lower_median(displacements.iter().map(|d| d.0).collect());
    let ty = lower_median(displacements.iter().map(|d| d.1).collect());
    let propagated = prev_trimap.translated(tx, ty)?;
    Ok((
        propagated,
        ContourFlow {
            displacements,
            window_radius,
            translation: (tx, ty),
        },
    ))
}
