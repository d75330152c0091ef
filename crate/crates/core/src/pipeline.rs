//! Whole-sequence orchestration: per-frame trimap propagation, cloning,
//! matting, and the final two-layer composition.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameRole};
use crate::matting::{
    baseline_matte_composite, correlation_matte, matte_composite, AlphaMatte, MattingConfig,
};
use crate::mixing::{region_mixing_weights, MixingWeights};
use crate::mvc::{clone_region, CloneParams};
use crate::pso::{derive_stream_seed, PsoConfig};
use crate::trimap::{extract_boundary, hierarchical_boundary_sample, propagate_trimap, Trimap};

/// Which algorithm family a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositeMode {
    /// Multi-layer mean-value cloning with a constant-alpha matte.
    Baseline,
    /// Illumination-aware gradient mixing plus correlation matting.
    Proposed,
}

impl CompositeMode {
    pub fn label(&self) -> &'static str {
        match self {
            CompositeMode::Baseline => "baseline",
            CompositeMode::Proposed => "proposed",
        }
    }
}

/// How the matte for the second layer is produced.
#[derive(Debug, Clone, Copy)]
pub enum MatteMode {
    /// Constant alpha over the whole blend.
    Constant(f64),
    /// Per-pixel correlation matting.
    Correlation(MattingConfig),
}

/// Every knob of a pipeline run.
#[derive(Debug, Clone)]
pub struct CompositeConfig {
    pub mode: CompositeMode,
    /// Weight of the cloned layer in the final blend.
    pub layer_alpha: f64,
    /// Weight of the matte-composite layer; `layer_alpha + layer_beta = 1`.
    pub layer_beta: f64,
    pub clone: CloneParams,
    pub matting: MatteMode,
    pub pso: PsoConfig,
    pub window_radius: u32,
    pub max_vertices: usize,
    pub seed: u64,
    /// Replaces the computed mixing weight with a constant; used to collapse
    /// the proposed mode onto the baseline for equivalence checks.
    pub ma_override: Option<f64>,
}

impl CompositeConfig {
    /// Documented defaults for a mode: k = 1, layer weights 0.5/0.5,
    /// window radius 5, 256 contour vertices, seed 42; the baseline blends
    /// with a constant alpha of 0.75, the proposed mode runs correlation
    /// matting.
    pub fn for_mode(mode: CompositeMode) -> Self {
        Self {
            mode,
            layer_alpha: 0.5,
            layer_beta: 0.5,
            clone: CloneParams::default(),
            matting: match mode {
                CompositeMode::Baseline => MatteMode::Constant(0.75),
                CompositeMode::Proposed => MatteMode::Correlation(MattingConfig::default()),
            },
            pso: PsoConfig::default(),
            window_radius: 5,
            max_vertices: 256,
            seed: 42,
            ma_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.layer_alpha + self.layer_beta - 1.0).abs() > 1e-12
            || self.layer_alpha < 0.0
            || self.layer_beta < 0.0
        {
            return Err(Error::LayerWeights {
                alpha: self.layer_alpha,
                beta: self.layer_beta,
            });
        }
        if !(0.0..=1.0).contains(&self.clone.k) {
            return Err(Error::InvalidParameter(format!(
                "clone coefficient k = {} outside [0, 1]",
                self.clone.k
            )));
        }
        if let MatteMode::Constant(a) = self.matting {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "constant matte alpha {a} outside [0, 1]"
                )));
            }
        }
        if let Some(ma) = self.ma_override {
            if !(0.0..=1.0).contains(&ma) {
                return Err(Error::InvalidParameter(format!(
                    "mixing override {ma} outside [0, 1]"
                )));
            }
        }
        if self.max_vertices < 4 {
            return Err(Error::InvalidParameter(
                "max_vertices must be at least 4".into(),
            ));
        }
        self.pso.validate()
    }
}

/// Output of a sequence run: the composited frames plus per-frame artifacts
/// and timings (wall clock around the per-frame computation, no file I/O).
#[derive(Debug)]
pub struct PipelineResult {
    pub frames: Vec<Frame>,
    /// Matte per frame; present when correlation matting ran.
    pub mattes: Vec<Option<AlphaMatte>>,
    /// Rigid contour translation applied per frame (frame 0 has none).
    pub translations: Vec<Option<(i32, i32)>>,
    pub frame_seconds: Vec<f64>,
    pub total_seconds: f64,
}

/// Affine two-layer blend with weights summing to one; the result is
/// per-pixel convex between the layers.
pub fn compose_layers(layer1: &Frame, layer2: &Frame, alpha: f64, beta: f64) -> Result<Frame> {
    if (alpha + beta - 1.0).abs() > 1e-12 || alpha < 0.0 || beta < 0.0 {
        return Err(Error::LayerWeights { alpha, beta });
    }
    layer1.ensure_same_dimensions(layer2, "second layer")?;
    let mut out = layer1.clone().with_role(FrameRole::Layered);
    for y in 0..layer1.height() {
        for x in 0..layer1.width() {
            let a = layer1.get(x, y);
            let b = layer2.get(x, y);
            out.set(
                x,
                y,
                [
                    alpha * a[0] + beta * b[0],
                    alpha * a[1] + beta * b[1],
                    alpha * a[2] + beta * b[2],
                ],
            );
        }
    }
    Ok(out)
}

/// Runs the full compositing pipeline over a frame sequence.
///
/// Per frame: propagate the trimap (after frame 0), extract and subsample
/// the contour, clone the source region (with mixing weights in proposed
/// mode), produce the matte composite, and blend the two layers.
pub fn run_pipeline(
    source_frames: &[Frame],
    target_frames: &[Frame],
    trimap0: &Trimap,
    cfg: &CompositeConfig,
) -> Result<PipelineResult> {
    cfg.validate()?;
    if source_frames.is_empty() || source_frames.len() != target_frames.len() {
        return Err(Error::InvalidParameter(format!(
            "source and target sequences must be equally long and non-empty, got {} and {}",
            source_frames.len(),
            target_frames.len()
        )));
    }
    let first = &source_frames[0];
    trimap0.ensure_matches_frame(first)?;
    for (n, (s, t)) in source_frames.iter().zip(target_frames).enumerate() {
        if !first.same_dimensions(s) || !first.same_dimensions(t) {
            return Err(Error::InvalidParameter(format!(
                "dimension drift at frame {n}"
            )));
        }
    }

    let mut frames = Vec::with_capacity(source_frames.len());
    let mut mattes = Vec::with_capacity(source_frames.len());
    let mut translations = Vec::with_capacity(source_frames.len());
    let mut frame_seconds = Vec::with_capacity(source_frames.len());
    let total_start = Instant::now();
    let mut trimap = trimap0.clone();

    for (n, (source, target)) in source_frames.iter().zip(target_frames).enumerate() {
        let frame_start = Instant::now();

        let flow = if n == 0 {
            None
        } else {
            let (next, flow) =
                propagate_trimap(&trimap, &source_frames[n - 1], source, cfg.window_radius)?;
            trimap = next;
            Some(flow)
        };
        translations.push(flow.as_ref().map(|f| f.translation()));

        let (contour, _) = extract_boundary(&trimap)?;
        let contour = hierarchical_boundary_sample(&contour, cfg.max_vertices);

        let mixing: Option<MixingWeights> = match (cfg.mode, cfg.ma_override) {
            (CompositeMode::Baseline, _) => None,
            (CompositeMode::Proposed, Some(v)) => {
                Some(MixingWeights::constant(source.width(), source.height(), v))
            }
            (CompositeMode::Proposed, None) => {
                Some(region_mixing_weights(source, target, &trimap)?)
            }
        };

        let cloned = clone_region(
            source,
            target,
            &trimap,
            &contour,
            flow.as_ref(),
            &cfg.clone,
            mixing.as_ref(),
        )?;

        let (composite, matte) = match &cfg.matting {
            MatteMode::Constant(a) => (baseline_matte_composite(&cloned, target, *a)?, None),
            MatteMode::Correlation(mc) => {
                let frame_seed = derive_stream_seed(cfg.seed, n as u64);
                let matte = correlation_matte(&cloned, &trimap, mc, &cfg.pso, frame_seed)?;
                (matte_composite(&matte, &cloned, target)?, Some(matte))
            }
        };

        let layered = compose_layers(&cloned, &composite, cfg.layer_alpha, cfg.layer_beta)?;
        frame_seconds.push(frame_start.elapsed().as_secs_f64());
        frames.push(layered);
        mattes.push(matte);
    }

    Ok(PipelineResult {
        frames,
        mattes,
        translations,
        frame_seconds,
        total_seconds: total_start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{disc_trimap, noise_frame, rect_trimap};

    #[test]
    fn compose_layers_endpoints_and_midpoint() {
        let a = Frame::filled(4, 3, [0.2; 3], FrameRole::Cloned).unwrap();
        let b = Frame::filled(4, 3, [0.6; 3], FrameRole::MatteComposite).unwrap();
        assert_eq!(compose_layers(&a, &b, 1.0, 0.0).unwrap().data(), a.data());
        assert_eq!(compose_layers(&a, &b, 0.0, 1.0).unwrap().data(), b.data());
        let mid = compose_layers(&a, &b, 0.5, 0.5).unwrap();
        assert!((mid.channel(2, 1, 0) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn compose_layers_rejects_bad_weights() {
        let a = Frame::filled(2, 2, [0.2; 3], FrameRole::Cloned).unwrap();
        assert!(matches!(
            compose_layers(&a, &a, 0.7, 0.7),
            Err(Error::LayerWeights { .. })
        ));
        assert!(compose_layers(&a, &a, 1.2, -0.2).is_err());
    }

    #[test]
    fn compose_layers_is_convex_per_pixel() {
        let a = noise_frame(6, 6, 71, FrameRole::Cloned);
        let b = noise_frame(6, 6, 72, FrameRole::MatteComposite);
        let out = compose_layers(&a, &b, 0.3, 0.7).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                for c in 0..3 {
                    let (va, vb) = (a.channel(x, y, c), b.channel(x, y, c));
                    let v = out.channel(x, y, c);
                    assert!(v >= va.min(vb) - 1e-12 && v <= va.max(vb) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_baseline_single_frame_is_a_paste() {
        // k = 0 with constant alpha 1: both layers reduce to the raw paste,
        // so the output is the source over the target inside the region.
        let source = noise_frame(24, 24, 81, FrameRole::Source);
        let target = noise_frame(24, 24, 82, FrameRole::Target);
        let trimap = rect_trimap(24, 24, 8, 8, 7, 7);
        let mut cfg = CompositeConfig::for_mode(CompositeMode::Baseline);
        cfg.clone.k = 0.0;
        cfg.matting = MatteMode::Constant(1.0);
        cfg.layer_alpha = 1.0;
        cfg.layer_beta = 0.0;
        let result = run_pipeline(
            std::slice::from_ref(&source),
            std::slice::from_ref(&target),
            &trimap,
            &cfg,
        )
        .unwrap();
        assert_eq!(result.frames.len(), 1);
        let out = &result.frames[0];
        for y in 0..24 {
            for x in 0..24 {
                let expect = if trimap.in_region(x, y) {
                    source.get(x, y)
                } else {
                    target.get(x, y)
                };
                for (c, e) in expect.iter().enumerate() {
                    assert!((out.channel(x, y, c) - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identical_videos_compose_to_the_target_in_baseline_mode() {
        // Moving content, identical source and target: boundary diffs vanish
        // and the constant-alpha blend mixes equal frames, so the output is
        // the target exactly.
        let frames: Vec<Frame> = (0..4)
            .map(|n| {
                Frame::from_fn(40, 40, FrameRole::Source, |x, y| {
                    crate::test_util::noise_colour(x as i64 - 2 * n, y as i64 + n, 3)
                })
                .unwrap()
            })
            .collect();
        let trimap = disc_trimap(40, 40, 20.0, 20.0, 7.0, 10.0);
        let cfg = CompositeConfig::for_mode(CompositeMode::Baseline);
        let result = run_pipeline(&frames, &frames, &trimap, &cfg).unwrap();
        for (n, out) in result.frames.iter().enumerate() {
            for (a, b) in out.data().iter().zip(frames[n].data().iter()) {
                assert!((a - b).abs() < 1e-9, "frame {n} deviates from target");
            }
        }
    }

    #[test]
    fn identical_videos_leave_the_background_untouched_in_proposed_mode() {
        // The proposed mode scales the source term by the mixing weight
        // (0.5 at equal gradients), so the region darkens on purpose; the
        // background must still pass through unchanged.
        let frames: Vec<Frame> = (0..3)
            .map(|n| {
                Frame::from_fn(40, 40, FrameRole::Source, |x, y| {
                    crate::test_util::noise_colour(x as i64 - n, y as i64, 9)
                })
                .unwrap()
            })
            .collect();
        let trimap = disc_trimap(40, 40, 20.0, 20.0, 7.0, 10.0);
        let cfg = CompositeConfig::for_mode(CompositeMode::Proposed);
        let result = run_pipeline(&frames, &frames, &trimap, &cfg).unwrap();
        let mut region = trimap.clone();
        for (n, out) in result.frames.iter().enumerate() {
            if let Some((dx, dy)) = result.translations[n] {
                region = region.translated(dx, dy).unwrap();
            }
            for y in 0..40 {
                for x in 0..40 {
                    if !region.in_region(x, y) {
                        for c in 0..3 {
                            assert!(
                                (out.channel(x, y, c) - frames[n].channel(x, y, c)).abs() < 1e-12
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn proposed_collapses_onto_baseline_at_the_degenerate_point() {
        let sources: Vec<Frame> = (0..3)
            .map(|n| {
                Frame::from_fn(32, 32, FrameRole::Source, |x, y| {
                    crate::test_util::noise_colour(x as i64 + n, y as i64, 21)
                })
                .unwrap()
            })
            .collect();
        let targets: Vec<Frame> = (0..3)
            .map(|_| noise_frame(32, 32, 22, FrameRole::Target))
            .collect();
        let trimap = rect_trimap(32, 32, 11, 11, 9, 9);

        let baseline = CompositeConfig::for_mode(CompositeMode::Baseline);
        let mut degenerate = CompositeConfig::for_mode(CompositeMode::Proposed);
        degenerate.ma_override = Some(1.0);
        degenerate.matting = MatteMode::Constant(0.75);

        let a = run_pipeline(&sources, &targets, &trimap, &baseline).unwrap();
        let b = run_pipeline(&sources, &targets, &trimap, &degenerate).unwrap();
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            assert_eq!(fa.data(), fb.data(), "bit-exact equivalence expected");
        }
    }

    #[test]
    fn pipeline_preserves_frame_count_and_dimensions() {
        let sources: Vec<Frame> = (0..3)
            .map(|_| noise_frame(36, 30, 31, FrameRole::Source))
            .collect();
        let targets: Vec<Frame> = (0..3)
            .map(|_| noise_frame(36, 30, 32, FrameRole::Target))
            .collect();
        let trimap = rect_trimap(36, 30, 14, 12, 6, 6);
        let cfg = CompositeConfig::for_mode(CompositeMode::Baseline);
        let result = run_pipeline(&sources, &targets, &trimap, &cfg).unwrap();
        assert_eq!(result.frames.len(), 3);
        assert_eq!(result.frame_seconds.len(), 3);
        for f in &result.frames {
            assert_eq!((f.width(), f.height()), (36, 30));
            assert_eq!(f.role, FrameRole::Layered);
        }
    }

    #[test]
    fn mismatched_sequence_lengths_are_rejected() {
        let s = vec![noise_frame(8, 8, 1, FrameRole::Source)];
        let t = vec![
            noise_frame(8, 8, 2, FrameRole::Target),
            noise_frame(8, 8, 3, FrameRole::Target),
        ];
        let trimap = rect_trimap(8, 8, 3, 3, 2, 2);
        let cfg = CompositeConfig::for_mode(CompositeMode::Baseline);
        assert!(run_pipeline(&s, &t, &trimap, &cfg).is_err());
    }

    #[test]
    fn dimension_drift_is_rejected() {
        let s = vec![
            noise_frame(8, 8, 1, FrameRole::Source),
            noise_frame(9, 8, 1, FrameRole::Source),
        ];
        let t = vec![
            noise_frame(8, 8, 2, FrameRole::Target),
            noise_frame(8, 8, 2, FrameRole::Target),
        ];
        let trimap = rect_trimap(8, 8, 3, 3, 2, 2);
        let cfg = CompositeConfig::for_mode(CompositeMode::Baseline);
        let err = run_pipeline(&s, &t, &trimap, &cfg).unwrap_err();
        assert!(err.to_string().contains("frame 1"));
    }

    #[test]
    fn full_determinism_for_fixed_seed() {
        let sources: Vec<Frame> = (0..2)
            .map(|n| {
                Frame::from_fn(28, 28, FrameRole::Source, |x, y| {
                    crate::test_util::noise_colour(x as i64 + n, y as i64 - n, 41)
                })
                .unwrap()
            })
            .collect();
        let targets: Vec<Frame> = (0..2)
            .map(|_| noise_frame(28, 28, 42, FrameRole::Target))
            .collect();
        let trimap = disc_trimap(28, 28, 14.0, 14.0, 5.0, 8.0);
        let cfg = CompositeConfig::for_mode(CompositeMode::Proposed);
        let a = run_pipeline(&sources, &targets, &trimap, &cfg).unwrap();
        let b = run_pipeline(&sources, &targets, &trimap, &cfg).unwrap();
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            assert_eq!(fa.data(), fb.data());
        }
    }
}
