//! Mean-value-coordinate cloning: generalized barycentric weights over the
//! sampled region contour, the interpolated membrane of boundary colour
//! differences, and the region clone itself.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameRole};
use crate::mixing::MixingWeights;
use crate::trimap::{Boundary, ContourFlow, Trimap};

/// Distance below which a point is treated as coinciding with a vertex.
const VERTEX_EPS: f64 = 1e-9;

/// How the illumination weight enters the clone. The multiplicative form
/// scales the source intensity; the additive form offsets it and exists for
/// comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingForm {
    Multiplicative,
    Additive,
}

/// Clone controls: the membrane strength `k` (1 = full seamless correction)
/// and the illumination form used when mixing weights are supplied.
#[derive(Debug, Clone, Copy)]
pub struct CloneParams {
    pub k: f64,
    pub mixing_form: MixingForm,
}

impl Default for CloneParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            mixing_form: MixingForm::Multiplicative,
        }
    }
}

/// Mean-value coordinates of one point over the contour vertices.
#[derive(Debug, Clone)]
pub struct MeanValueWeights {
    pub point: (f64, f64),
    /// Normalized coordinates, summing to 1.
    pub weights: Vec<f64>,
    /// Raw tangent-half-angle weights before normalization.
    pub raw: Vec<f64>,
}

/// Where a query point sits relative to the polygon's vertices and edges.
enum PointClass {
    /// Coincides with vertex `i`.
    Vertex(usize),
    /// On the open edge between vertices `i` and `j`; weights are the
    /// distances to the opposite endpoint.
    Edge {
        i: usize,
        j: usize,
        wi: f64,
        wj: f64,
    },
    General,
}

fn classify_point(p: (f64, f64), polygon: &[(f64, f64)]) -> PointClass {
    let m = polygon.len();
    for (i, &(vx, vy)) in polygon.iter().enumerate() {
        if ((vx - p.0).powi(2) + (vy - p.1).powi(2)).sqrt() < VERTEX_EPS {
            return PointClass::Vertex(i);
        }
    }
    for i in 0..m {
        let j = (i + 1) % m;
        let u = (polygon[i].0 - p.0, polygon[i].1 - p.1);
        let v = (polygon[j].0 - p.0, polygon[j].1 - p.1);
        let cross = u.0 * v.1 - v.0 * u.1;
        let dot = u.0 * v.0 + u.1 * v.1;
        let ru = (u.0 * u.0 + u.1 * u.1).sqrt();
        let rv = (v.0 * v.0 + v.1 * v.1).sqrt();
        // Anti-parallel offsets: p lies strictly between the endpoints.
        if dot < 0.0 && cross.abs() < VERTEX_EPS * ru * rv {
            return PointClass::Edge {
                i,
                j,
                wi: rv,
                wj: ru,
            };
        }
    }
    PointClass::General
}

/// Fills `raw` with unnormalized mean-value weights of `p` over `polygon`.
///
/// The tangent-half-angle form `w_i = (tan(t_{i-1}/2) + tan(t_i/2)) / r_i`
/// is evaluated with signed angles, so points slightly outside the polygon
/// (contour pixels dropped by hierarchical sampling) degrade gracefully.
/// Points on a vertex or on an edge take the exact interpolation limits.
fn raw_weights_into(p: (f64, f64), polygon: &[(f64, f64)], raw: &mut Vec<f64>) {
    let m = polygon.len();
    raw.clear();
    raw.resize(m, 0.0);

    match classify_point(p, polygon) {
        PointClass::Vertex(i) => {
            raw[i] = 1.0;
            return;
        }
        PointClass::Edge { i, j, wi, wj } => {
            raw[i] = wi;
            raw[j] += wj;
            return;
        }
        PointClass::General => {}
    }

    let mut offs: Vec<(f64, f64)> = Vec::with_capacity(m);
    let mut dist: Vec<f64> = Vec::with_capacity(m);
    for &(vx, vy) in polygon {
        let d = (vx - p.0, vy - p.1);
        offs.push(d);
        dist.push((d.0 * d.0 + d.1 * d.1).sqrt());
    }
    let mut tans: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let j = (i + 1) % m;
        let cross = offs[i].0 * offs[j].1 - offs[j].0 * offs[i].1;
        let dot = offs[i].0 * offs[j].0 + offs[i].1 * offs[j].1;
        let rr = dist[i] * dist[j];
        tans.push(cross / (rr + dot));
    }
    for i in 0..m {
        let prev = tans[(i + m - 1) % m];
        raw[i] = (prev + tans[i]) / dist[i];
    }
}

fn normalize(raw: &[f64]) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    if sum.abs() < f64::MIN_POSITIVE {
        // Degenerate exterior point; fall back to the nearest-vertex
        // indicator so callers always receive a partition of unity.
        let mut w = vec![0.0; raw.len()];
        w[0] = 1.0;
        return w;
    }
    raw.iter().map(|&v| v / sum).collect()
}

/// Unnormalized and normalized mean-value weights without any position
/// checks. Used by the clone loop, where region pixels may sit exactly on
/// or just outside the sampled polygon.
pub fn mean_value_weights(p: (f64, f64), polygon: &[(f64, f64)]) -> Vec<f64> {
    let mut raw = Vec::new();
    raw_weights_into(p, polygon, &mut raw);
    normalize(&raw)
}

/// True when `p` lies inside (or on) the polygon, by winding angle.
/// Interior points wind by 2*pi, on-edge points by pi, exterior by 0.
fn inside_polygon(p: (f64, f64), polygon: &[(f64, f64)]) -> bool {
    let m = polygon.len();
    let mut winding = 0.0;
    for i in 0..m {
        let a = polygon[i];
        let b = polygon[(i + 1) % m];
        let u = (a.0 - p.0, a.1 - p.1);
        let v = (b.0 - p.0, b.1 - p.1);
        winding += (u.0 * v.1 - v.0 * u.1).atan2(u.0 * v.0 + u.1 * v.1);
    }
    winding.abs() > std::f64::consts::FRAC_PI_2
}

/// Mean-value coordinates of an interior point over a region contour.
///
/// Points within `1e-9` of a vertex get that vertex's indicator weights;
/// on-edge points interpolate the edge endpoints; points outside the
/// polygon are rejected.
pub fn mean_value_coordinates(p: (f64, f64), boundary: &Boundary) -> Result<MeanValueWeights> {
    let polygon = boundary.polygon();
    let m = polygon.len();

    // Vertex coincidence outranks every other check, including arity.
    match classify_point(p, &polygon) {
        PointClass::Vertex(i) => {
            let mut weights = vec![0.0; m];
            weights[i] = 1.0;
            return Ok(MeanValueWeights {
                point: p,
                raw: weights.clone(),
                weights,
            });
        }
        _ if m < 3 => return Err(Error::TooFewVertices(m)),
        PointClass::Edge { .. } => {}
        PointClass::General => {
            if !inside_polygon(p, &polygon) {
                return Err(Error::OutsidePolygon(p.0, p.1));
            }
        }
    }
    let mut raw = Vec::new();
    raw_weights_into(p, &polygon, &mut raw);
    let weights = normalize(&raw);
    Ok(MeanValueWeights {
        point: p,
        weights,
        raw,
    })
}

/// Membrane value at one point: the weighted sum of per-vertex boundary
/// colour differences.
pub fn membrane(weights: &MeanValueWeights, boundary_diffs: &[[f64; 3]]) -> [f64; 3] {
    weighted_diff(&weights.weights, boundary_diffs)
}

#[inline]
fn weighted_diff(weights: &[f64], diffs: &[[f64; 3]]) -> [f64; 3] {
    debug_assert_eq!(weights.len(), diffs.len());
    let mut out = [0.0; 3];
    for (w, d) in weights.iter().zip(diffs) {
        out[0] += w * d[0];
        out[1] += w * d[1];
        out[2] += w * d[2];
    }
    out
}

/// Clones the source region into the target frame.
///
/// Every region pixel receives `source + k * membrane` where the membrane
/// interpolates the boundary differences `target - source` over the sampled
/// contour; pixels outside the region copy the target. With mixing weights
/// supplied, the source term becomes `ma * source` (multiplicative form) or
/// `ma + source` (additive form). `flow` must accompany every propagated
/// frame; the trimap and contour are expected to be the propagated ones.
pub fn clone_region(
    source: &Frame,
    target: &Frame,
    trimap: &Trimap,
    boundary: &Boundary,
    flow: Option<&ContourFlow>,
    params: &CloneParams,
    mixing: Option<&MixingWeights>,
) -> Result<Frame> {
    source.ensure_same_dimensions(target, "target frame")?;
    trimap.ensure_matches_frame(source)?;
    if let Some(m) = mixing {
        m.matches_frame(source)?;
    }
    if boundary.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if let Some(flow) = flow {
        let r = flow.window_radius as i32;
        if flow
            .displacements
            .iter()
            .any(|&(dx, dy)| dx.abs() > r || dy.abs() > r)
        {
            return Err(Error::InvalidParameter(
                "contour flow displacement exceeds its window radius".into(),
            ));
        }
    }

    let polygon = boundary.polygon();
    let diffs: Vec<[f64; 3]> = boundary
        .vertices()
        .iter()
        .map(|&(x, y)| {
            let t = target.get(x, y);
            let s = source.get(x, y);
            [t[0] - s[0], t[1] - s[1], t[2] - s[2]]
        })
        .collect();

    let w = source.width();
    let mut out = target.clone().with_role(FrameRole::Cloned);
    let row_len = w as usize * 3;
    out.data_mut()
        .par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(y, row)| {
            let y = y as u32;
            let mut raw = Vec::new();
            for x in 0..w {
                if !trimap.in_region(x, y) {
                    continue;
                }
                raw_weights_into((x as f64, y as f64), &polygon, &mut raw);
                let weights = normalize(&raw);
                let r = weighted_diff(&weights, &diffs);
                let s = source.get(x, y);
                let base = match (mixing, params.mixing_form) {
                    (None, _) => s,
                    (Some(m), MixingForm::Multiplicative) => {
                        let ma = m.ma(x, y);
                        [ma * s[0], ma * s[1], ma * s[2]]
                    }
                    (Some(m), MixingForm::Additive) => {
                        let ma = m.ma(x, y);
                        [ma + s[0], ma + s[1], ma + s[2]]
                    }
                };
                let i = x as usize * 3;
                for c in 0..3 {
                    row[i + c] = (base[c] + params.k * r[c]).clamp(0.0, 1.0);
                }
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{noise_frame, rect_trimap};

    fn unit_square() -> Boundary {
        Boundary::new(vec![(0, 0), (1, 0), (1, 1), (0, 1)], true)
    }

    #[test]
    fn square_centre_has_symmetric_weights() {
        let w = mean_value_coordinates((0.5, 0.5), &unit_square()).unwrap();
        for &l in &w.weights {
            assert!((l - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn near_vertex_point_degenerates_to_indicator() {
        let w = mean_value_coordinates((1.0 + 1e-12, 1e-12), &unit_square()).unwrap();
        assert_eq!(w.weights, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn outside_point_is_rejected() {
        assert!(matches!(
            mean_value_coordinates((1.6, 0.5), &unit_square()),
            Err(Error::OutsidePolygon(..))
        ));
    }

    // Independent evaluation of the tangent-half-angle formula, summed in
    // reverse vertex order.
    fn oracle_weights(p: (f64, f64), poly: &[(f64, f64)]) -> Vec<f64> {
        let m = poly.len();
        let angle = |i: usize, j: usize| {
            let u = (poly[i].0 - p.0, poly[i].1 - p.1);
            let v = (poly[j].0 - p.0, poly[j].1 - p.1);
            (u.0 * v.1 - v.0 * u.1).atan2(u.0 * v.0 + u.1 * v.1)
        };
        let mut w = vec![0.0; m];
        for i in (0..m).rev() {
            let prev = (i + m - 1) % m;
            let next = (i + 1) % m;
            let r = ((poly[i].0 - p.0).powi(2) + (poly[i].1 - p.1).powi(2)).sqrt();
            w[i] = ((angle(prev, i) / 2.0).tan() + (angle(i, next) / 2.0).tan()) / r;
        }
        let sum: f64 = w.iter().rev().sum();
        w.iter().map(|&v| v / sum).collect()
    }

    #[test]
    fn weights_match_direct_formula_and_reproduce_the_point() {
        let p = (0.3, 0.7);
        let w = mean_value_coordinates(p, &unit_square()).unwrap();
        let oracle = oracle_weights(p, &unit_square().polygon());
        let mut reproduced = (0.0, 0.0);
        for (i, &(vx, vy)) in unit_square().polygon().iter().enumerate() {
            assert!((w.weights[i] - oracle[i]).abs() < 1e-12);
            reproduced.0 += w.weights[i] * vx;
            reproduced.1 += w.weights[i] * vy;
        }
        assert!((reproduced.0 - p.0).abs() < 1e-9);
        assert!((reproduced.1 - p.1).abs() < 1e-9);
        let total: f64 = w.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn on_edge_point_interpolates_the_edge_endpoints() {
        let w = mean_value_coordinates((0.25, 0.0), &unit_square()).unwrap();
        assert!((w.weights[0] - 0.75).abs() < 1e-12);
        assert!((w.weights[1] - 0.25).abs() < 1e-12);
        assert!(w.weights[2].abs() < 1e-12);
        assert!(w.weights[3].abs() < 1e-12);
    }

    #[test]
    fn membrane_respects_partition_of_unity() {
        let w = mean_value_coordinates((0.4, 0.6), &unit_square()).unwrap();
        let constant = membrane(&w, &[[0.3, -0.1, 0.2]; 4]);
        assert!((constant[0] - 0.3).abs() < 1e-12);
        assert!((constant[1] + 0.1).abs() < 1e-12);
        assert!((constant[2] - 0.2).abs() < 1e-12);
        let zero = membrane(&w, &[[0.0; 3]; 4]);
        assert_eq!(zero, [0.0; 3]);
    }

    #[test]
    fn membrane_at_square_centre_is_the_mean_of_diffs() {
        let diffs = [
            [0.1, 0.0, 0.3],
            [0.5, 0.2, 0.1],
            [0.3, 0.8, 0.5],
            [0.1, 0.2, 0.3],
        ];
        let w = mean_value_coordinates((0.5, 0.5), &unit_square()).unwrap();
        let r = membrane(&w, &diffs);
        for c in 0..3 {
            let mean = diffs.iter().map(|d| d[c]).sum::<f64>() / 4.0;
            assert!((r[c] - mean).abs() < 1e-12);
        }
    }

    fn clone_setup(src_colour: [f64; 3], tgt_colour: [f64; 3]) -> (Frame, Frame, Trimap, Boundary) {
        let source = Frame::filled(12, 12, src_colour, FrameRole::Source).unwrap();
        let target = Frame::filled(12, 12, tgt_colour, FrameRole::Target).unwrap();
        let trimap = rect_trimap(12, 12, 3, 3, 6, 6);
        let (boundary, _) = crate::trimap::extract_boundary(&trimap).unwrap();
        (source, target, trimap, boundary)
    }

    #[test]
    fn zero_k_is_a_pure_paste() {
        let source = noise_frame(12, 12, 91, FrameRole::Source);
        let target = noise_frame(12, 12, 92, FrameRole::Target);
        let trimap = rect_trimap(12, 12, 3, 3, 6, 6);
        let (boundary, _) = crate::trimap::extract_boundary(&trimap).unwrap();
        let params = CloneParams {
            k: 0.0,
            ..Default::default()
        };
        let out = clone_region(&source, &target, &trimap, &boundary, None, &params, None).unwrap();
        for y in 0..12 {
            for x in 0..12 {
                let expect = if trimap.in_region(x, y) {
                    source.get(x, y)
                } else {
                    target.get(x, y)
                };
                assert_eq!(out.get(x, y), expect);
            }
        }
    }

    #[test]
    fn identical_frames_clone_to_themselves() {
        let frame = noise_frame(12, 12, 93, FrameRole::Source);
        let trimap = rect_trimap(12, 12, 3, 3, 6, 6);
        let (boundary, _) = crate::trimap::extract_boundary(&trimap).unwrap();
        for k in [0.0, 0.4, 1.0] {
            let params = CloneParams {
                k,
                ..Default::default()
            };
            let out =
                clone_region(&frame, &frame, &trimap, &boundary, None, &params, None).unwrap();
            for (a, b) in out.data().iter().zip(frame.data().iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_clone_is_seamless_at_full_strength() {
        let (source, target, trimap, boundary) = clone_setup([0.2; 3], [0.8; 3]);
        let params = CloneParams::default();
        let out = clone_region(&source, &target, &trimap, &boundary, None, &params, None).unwrap();
        for y in 0..12 {
            for x in 0..12 {
                for c in 0..3 {
                    assert!(
                        (out.channel(x, y, c) - 0.8).abs() < 1e-9,
                        "pixel ({x},{y}) not seamless"
                    );
                }
            }
        }
    }

    #[test]
    fn clone_is_monotone_in_k_for_one_sided_diffs() {
        let (source, target, trimap, boundary) = clone_setup([0.2; 3], [0.7; 3]);
        let mut prev: Option<Frame> = None;
        for k in [0.0, 0.3, 0.6, 1.0] {
            let params = CloneParams {
                k,
                ..Default::default()
            };
            let out =
                clone_region(&source, &target, &trimap, &boundary, None, &params, None).unwrap();
            if let Some(p) = prev {
                for (a, b) in out.data().iter().zip(p.data().iter()) {
                    assert!(a + 1e-12 >= *b, "clone values must grow with k");
                }
            }
            prev = Some(out);
        }
    }

    #[test]
    fn multiplicative_mixing_with_unit_weight_matches_baseline_bitwise() {
        let source = noise_frame(12, 12, 94, FrameRole::Source);
        let target = noise_frame(12, 12, 95, FrameRole::Target);
        let trimap = rect_trimap(12, 12, 3, 3, 6, 6);
        let (boundary, _) = crate::trimap::extract_boundary(&trimap).unwrap();
        let params = CloneParams::default();
        let baseline =
            clone_region(&source, &target, &trimap, &boundary, None, &params, None).unwrap();
        let unit = MixingWeights::constant(12, 12, 1.0);
        let forced = clone_region(
            &source,
            &target,
            &trimap,
            &boundary,
            None,
            &params,
            Some(&unit),
        )
        .unwrap();
        assert_eq!(baseline.data(), forced.data());
    }

    #[test]
    fn additive_form_offsets_the_source_term() {
        let (source, target, trimap, boundary) = clone_setup([0.2; 3], [0.2; 3]);
        let mixing = MixingWeights::constant(12, 12, 0.3);
        let params = CloneParams {
            k: 0.0,
            mixing_form: MixingForm::Additive,
        };
        let out = clone_region(
            &source,
            &target,
            &trimap,
            &boundary,
            None,
            &params,
            Some(&mixing),
        )
        .unwrap();
        // Inside the region: 0.3 + 0.2; outside: target.
        assert!((out.channel(5, 5, 0) - 0.5).abs() < 1e-12);
        assert_eq!(out.channel(0, 0, 0), 0.2);
    }

    #[test]
    fn mixing_dimension_mismatch_is_rejected() {
        let (source, target, trimap, boundary) = clone_setup([0.2; 3], [0.8; 3]);
        let wrong = MixingWeights::constant(5, 5, 1.0);
        assert!(matches!(
            clone_region(
                &source,
                &target,
                &trimap,
                &boundary,
                None,
                &CloneParams::default(),
                Some(&wrong)
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
