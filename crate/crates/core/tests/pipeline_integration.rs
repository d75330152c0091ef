//! Cross-module behaviour: full pipeline runs over synthetic content and
//! property checks that span more than one module.

use gradient_weave::frame::{Frame, FrameRole};
use gradient_weave::matting::{estimate_alpha, SamplePair};
use gradient_weave::mixing::mixing_weight;
use gradient_weave::pipeline::{run_pipeline, CompositeConfig, CompositeMode};
use gradient_weave::trimap::{Trimap, TrimapLabel};
use gradient_weave::{compute_gradient, mse};

use proptest::prelude::*;

fn disc_trimap(w: u32, h: u32, cx: f64, cy: f64, rf: f64, ru: f64) -> Trimap {
    let mut labels = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            labels.push(if d <= rf {
                TrimapLabel::Foreground
            } else if d <= ru {
                TrimapLabel::Unknown
            } else {
                TrimapLabel::Background
            });
        }
    }
    Trimap::from_labels(w, h, labels).unwrap()
}

fn moving_texture(w: u32, h: u32, shift: (i64, i64), seed: u64, role: FrameRole) -> Frame {
    Frame::from_fn(w, h, role, |x, y| {
        let (u, v) = (x as i64 - shift.0, y as i64 - shift.1);
        let mut px = [0.0; 3];
        for (c, slot) in px.iter_mut().enumerate() {
            let mut z = (u as u64).wrapping_mul(0x9E3779B97F4A7C15)
                ^ (v as u64).wrapping_mul(0xC2B2AE3D27D4EB4F)
                ^ seed.wrapping_add(c as u64).wrapping_mul(0xD6E8FEB86659FD93);
            z ^= z >> 29;
            z = z.wrapping_mul(0xBF58476D1CE4E5B9);
            z ^= z >> 32;
            *slot = 0.15 + 0.6 * ((z >> 11) as f64 / (1u64 << 53) as f64);
        }
        px
    })
    .unwrap()
}

#[test]
fn moving_region_stays_tracked_and_composited() {
    // Source content drifts (2, 1) per frame; the propagated region must
    // follow it, and background pixels must equal the target bit-for-bit.
    let (w, h) = (72u32, 64u32);
    let frames = 4;
    let sources: Vec<Frame> = (0..frames)
        .map(|n| moving_texture(w, h, (2 * n, n), 11, FrameRole::Source))
        .collect();
    let targets: Vec<Frame> = (0..frames)
        .map(|_| moving_texture(w, h, (0, 0), 29, FrameRole::Target))
        .collect();
    let trimap0 = disc_trimap(w, h, 30.0, 30.0, 9.0, 13.0);

    let cfg = CompositeConfig::for_mode(CompositeMode::Proposed);
    let result = run_pipeline(&sources, &targets, &trimap0, &cfg).unwrap();

    let mut region = trimap0.clone();
    for (n, target) in targets.iter().enumerate() {
        if let Some((dx, dy)) = result.translations[n] {
            assert_eq!((dx, dy), (2, 1), "frame {n} tracked the wrong motion");
            region = region.translated(dx, dy).unwrap();
        }
        let out = &result.frames[n];
        for y in 0..h {
            for x in 0..w {
                if !region.in_region(x, y) {
                    assert_eq!(
                        out.get(x, y),
                        target.get(x, y),
                        "background touched at ({x},{y}) frame {n}"
                    );
                }
            }
        }
    }
}

#[test]
fn proposed_mode_counters_brightness_mismatch() {
    // Bright target, unscaled source: the mixing weight dims the clone, so
    // the proposed composite lands nearer the true (unscaled) region.
    let (w, h) = (64u32, 64u32);
    let source = moving_texture(w, h, (0, 0), 3, FrameRole::Source);
    let target = Frame::from_fn(w, h, FrameRole::Target, |x, y| {
        moving_texture(w, h, (0, 0), 5, FrameRole::Target)
            .get(x, y)
            .map(|v| (v * 1.5).min(1.0))
    })
    .unwrap();
    let trimap = disc_trimap(w, h, 32.0, 32.0, 10.0, 14.0);
    // Ground truth: source content over the target through the trimap mask.
    let truth = Frame::from_fn(w, h, FrameRole::Reference, |x, y| {
        if trimap.in_region(x, y) {
            source.get(x, y)
        } else {
            target.get(x, y)
        }
    })
    .unwrap();

    let run = |mode| {
        let cfg = CompositeConfig::for_mode(mode);
        let res = run_pipeline(
            std::slice::from_ref(&source),
            std::slice::from_ref(&target),
            &trimap,
            &cfg,
        )
        .unwrap();
        mse(&res.frames[0], &truth).unwrap()
    };
    let base = run(CompositeMode::Baseline);
    let prop = run(CompositeMode::Proposed);
    assert!(
        prop < base,
        "proposed ({prop:.1}) should beat baseline ({base:.1}) under mismatch"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // Forward-composed observations are inverted exactly.
    #[test]
    fn alpha_estimation_inverts_forward_composition(
        f in prop::array::uniform3(0.0f64..1.0),
        b in prop::array::uniform3(0.0f64..1.0),
        alpha in 0.0f64..1.0,
    ) {
        let sep: f64 = (0..3).map(|c| (f[c] - b[c]).powi(2)).sum();
        prop_assume!(sep.sqrt() > 1e-3);
        let z = [0, 1, 2].map(|c| alpha * f[c] + (1.0 - alpha) * b[c]);
        let pair = SamplePair {
            f_index: 0,
            b_index: 0,
            f_colour: f,
            b_colour: b,
            f_pos: (0, 0),
            b_pos: (1, 1),
            z_colour: z,
            z_pos: (0, 1),
        };
        let est = estimate_alpha(&pair);
        prop_assert!((est - alpha).abs() < 1e-9);
    }

    // The mixing weight is a symmetric ratio: complementary, bounded, and
    // invariant under joint scaling of the two frames.
    #[test]
    fn mixing_weight_laws_hold(seed_a in 0u64..1000, seed_b in 0u64..1000, s in 0.1f64..1.0) {
        let a = moving_texture(8, 8, (0, 0), seed_a, FrameRole::Source);
        let b = moving_texture(8, 8, (0, 0), seed_b.wrapping_add(5000), FrameRole::Target);
        let scale = |f: &Frame| {
            Frame::from_fn(8, 8, f.role, |x, y| f.get(x, y).map(|v| v * s)).unwrap()
        };
        let w = mixing_weight(&compute_gradient(&a), &compute_gradient(&b)).unwrap();
        let flip = mixing_weight(&compute_gradient(&b), &compute_gradient(&a)).unwrap();
        let scaled = mixing_weight(&compute_gradient(&scale(&a)), &compute_gradient(&scale(&b))).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let ma = w.ma(x, y);
                prop_assert!((0.0..=1.0).contains(&ma));
                prop_assert!((ma + flip.ma(x, y) - 1.0).abs() <= 1e-12);
                prop_assert!((ma - scaled.ma(x, y)).abs() <= 1e-12);
            }
        }
    }
}
