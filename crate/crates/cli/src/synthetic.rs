//! Synthetic benchmark scenes: a textured disc ("hand") drifting over a dark
//! field, composited into an illumination-scaled textured target, with
//! ground truth built by forward alpha synthesis from a known matte.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gradient_weave::frame::{Frame, FrameRole};
use gradient_weave::io::{save_frame, save_matte};
use gradient_weave::matting::AlphaMatte;
use gradient_weave::trimap::{Trimap, TrimapLabel};

/// Margin that keeps every contour vertex's block-matching window on canvas
/// (window radius 5 plus patch half-width 3, plus slack).
const EDGE_MARGIN: f64 = 9.0;

/// Parameters of one generated scene.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub disc_radius: f64,
    /// Rigid motion of the source content per frame.
    pub translation: (i32, i32),
    /// Brightness factor applied to the target video (clamped afterwards).
    pub illumination_scale: f64,
    /// Amplitude of the procedural texture noise.
    pub noise_amplitude: f64,
    /// Half-width of the unknown annulus around the disc edge.
    pub unknown_band: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 160,
            height: 160,
            frames: 10,
            disc_radius: 28.0,
            translation: (2, -1),
            illumination_scale: 1.5,
            noise_amplitude: 0.01,
            unknown_band: 4.0,
            seed: 7,
        }
    }
}

/// All in-memory artifacts of one scene.
pub struct GeneratedScene {
    pub source: Vec<Frame>,
    pub target: Vec<Frame>,
    pub trimap: Trimap,
    pub ground_truth: Vec<Frame>,
    /// Known matte per frame, the ground-truth compositing weights.
    pub mattes: Vec<AlphaMatte>,
    /// Disc centre of frame 0.
    pub centre: (f64, f64),
}

fn hash01(x: i64, y: i64, seed: u64, channel: u64) -> f64 {
    let mut v = (x as u64).wrapping_mul(0x9E3779B97F4A7C15)
        ^ (y as u64).wrapping_mul(0xC2B2AE3D27D4EB4F)
        ^ seed
            .wrapping_add(channel.wrapping_mul(0x165667B19E3779F9))
            .wrapping_mul(0xD6E8FEB86659FD93);
    v ^= v >> 29;
    v = v.wrapping_mul(0xBF58476D1CE4E5B9);
    v ^= v >> 32;
    (v >> 11) as f64 / (1u64 << 53) as f64
}

impl SceneSpec {
    fn outer_radius(&self) -> f64 {
        self.disc_radius + self.unknown_band
    }

    fn inner_radius(&self) -> f64 {
        self.disc_radius - self.unknown_band
    }

    /// Disc centre at a frame index; frame 0 is placed so the whole path
    /// stays centred on the canvas.
    pub fn centre_at(&self, frame: u32) -> (f64, f64) {
        let half_path = (self.frames.saturating_sub(1)) as f64 / 2.0;
        let cx = self.width as f64 / 2.0 - half_path * self.translation.0 as f64
            + frame as f64 * self.translation.0 as f64;
        let cy = self.height as f64 / 2.0 - half_path * self.translation.1 as f64
            + frame as f64 * self.translation.1 as f64;
        (cx, cy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            bail!("scene needs at least one frame");
        }
        if self.inner_radius() < 2.0 {
            bail!(
                "disc radius {} too small for unknown band {}",
                self.disc_radius,
                self.unknown_band
            );
        }
        if self.illumination_scale <= 0.0 {
            bail!("illumination scale must be positive");
        }
        let reach = self.outer_radius() + EDGE_MARGIN;
        for n in 0..self.frames {
            let (cx, cy) = self.centre_at(n);
            if cx - reach < 0.0
                || cy - reach < 0.0
                || cx + reach >= self.width as f64
                || cy + reach >= self.height as f64
            {
                bail!(
                    "disc leaves the {}x{} canvas at frame {n} (centre {cx:.1},{cy:.1}, reach {reach:.1})",
                    self.width,
                    self.height
                );
            }
        }
        Ok(())
    }

    /// Source content in scene coordinates (before per-frame translation):
    /// a skin-toned textured disc on a dark noisy field.
    fn source_base(&self, u: i64, v: i64) -> [f64; 3] {
        let (cx, cy) = self.centre_at(0);
        let d = ((u as f64 - cx).powi(2) + (v as f64 - cy).powi(2)).sqrt();
        let n = self.noise_amplitude;
        if d <= self.disc_radius {
            let shade = 0.12 * (u as f64 * 0.35).sin() * (v as f64 * 0.28).cos();
            let radial = 0.08 * (1.0 - d / self.disc_radius);
            [
                0.62 + shade + radial + n * (hash01(u, v, self.seed, 0) - 0.5),
                0.44 + shade * 0.8 + radial + n * (hash01(u, v, self.seed, 1) - 0.5),
                0.36 + shade * 0.6 + radial + n * (hash01(u, v, self.seed, 2) - 0.5),
            ]
        } else {
            [
                0.055 + n * hash01(u, v, self.seed, 3),
                0.06 + n * hash01(u, v, self.seed, 4),
                0.075 + n * hash01(u, v, self.seed, 5),
            ]
        }
    }

    /// Target scene before illumination scaling: a mid-bright organic
    /// texture with enough gradient content to drive the mixing weights.
    fn target_base(&self, x: i64, y: i64) -> [f64; 3] {
        let n = self.noise_amplitude;
        let s1 = (x as f64 * 0.11 + y as f64 * 0.05).sin();
        let s2 = (x as f64 * 0.04 - y as f64 * 0.09).cos();
        let s3 = (x as f64 * 0.21 + y as f64 * 0.17).sin();
        [
            0.48 + 0.16 * s1 + 0.05 * s3 + n * hash01(x, y, self.seed ^ 0xA5A5, 0),
            0.40 + 0.14 * s2 + 0.05 * s1 + n * hash01(x, y, self.seed ^ 0xA5A5, 1),
            0.38 + 0.12 * s3 + 0.05 * s2 + n * hash01(x, y, self.seed ^ 0xA5A5, 2),
        ]
    }

    pub fn generate(&self) -> Result<GeneratedScene> {
        self.validate()?;
        let (w, h) = (self.width, self.height);
        let scale = self.illumination_scale;

        let mut source = Vec::with_capacity(self.frames as usize);
        let mut target = Vec::with_capacity(self.frames as usize);
        let mut ground_truth = Vec::with_capacity(self.frames as usize);
        let mut mattes = Vec::with_capacity(self.frames as usize);

        for n in 0..self.frames {
            let (dx, dy) = (
                n as i64 * self.translation.0 as i64,
                n as i64 * self.translation.1 as i64,
            );
            let src = Frame::from_fn(w, h, FrameRole::Source, |x, y| {
                self.source_base(x as i64 - dx, y as i64 - dy)
            })?;
            let tgt = Frame::from_fn(w, h, FrameRole::Target, |x, y| {
                self.target_base(x as i64, y as i64).map(|v| v * scale)
            })?;

            // Known matte: 1 inside the inner radius, linear ramp across the
            // annulus, 0 outside; ground truth is the forward composite.
            let (cx, cy) = self.centre_at(n);
            let (rf, ru) = (self.inner_radius(), self.outer_radius());
            let alpha_at = |x: u32, y: u32| {
                let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                ((ru - d) / (ru - rf)).clamp(0.0, 1.0)
            };
            let gt = Frame::from_fn(w, h, FrameRole::Reference, |x, y| {
                let a = alpha_at(x, y);
                let s = src.get(x, y);
                let t = tgt.get(x, y);
                [
                    a * s[0] + (1.0 - a) * t[0],
                    a * s[1] + (1.0 - a) * t[1],
                    a * s[2] + (1.0 - a) * t[2],
                ]
            })?;
            let trimap_n = self.trimap_at(n)?;
            let mut matte = AlphaMatte::from_trimap(&trimap_n, 0.0);
            for y in 0..h {
                for x in 0..w {
                    matte.set(x, y, alpha_at(x, y));
                }
            }

            source.push(src);
            target.push(tgt);
            ground_truth.push(gt);
            mattes.push(matte);
        }

        Ok(GeneratedScene {
            source,
            target,
            trimap: self.trimap_at(0)?,
            ground_truth,
            mattes,
            centre: self.centre_at(0),
        })
    }

    /// Trimap of a frame: foreground within the inner radius, unknown across
    /// the annulus, background outside.
    pub fn trimap_at(&self, frame: u32) -> Result<Trimap> {
        let (cx, cy) = self.centre_at(frame);
        let (rf, ru) = (self.inner_radius(), self.outer_radius());
        let mut labels = Vec::with_capacity((self.width * self.height) as usize);
        for y in 0..self.height {
            for x in 0..self.width {
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
        Ok(Trimap::from_labels(self.width, self.height, labels)?)
    }
}

fn save_trimap_png(trimap: &Trimap, path: &Path) -> Result<()> {
    // Encoded per the trimap file contract: 0 background, 255 foreground,
    // anything else (128) unknown.
    let mut matte = AlphaMatte::from_trimap(trimap, 128.0 / 255.0);
    for y in 0..trimap.height() {
        for x in 0..trimap.width() {
            match trimap.label(x, y) {
                TrimapLabel::Foreground => matte.set(x, y, 1.0),
                TrimapLabel::Background => matte.set(x, y, 0.0),
                TrimapLabel::Unknown => matte.set(x, y, 128.0 / 255.0),
            }
        }
    }
    save_matte(&matte, path)?;
    Ok(())
}

/// Generates a scene and writes it out: `source/`, `target/`, `gt/` frame
/// directories, `trimap.png` for frame 0, and `scene.json` with the spec.
pub fn gen_synthetic(spec: &SceneSpec, out_dir: &Path) -> Result<GeneratedScene> {
    let scene = spec.generate()?;
    for sub in ["source", "target", "gt"] {
        fs::create_dir_all(out_dir.join(sub))
            .with_context(|| format!("creating {}", out_dir.join(sub).display()))?;
    }
    for (n, frame) in scene.source.iter().enumerate() {
        save_frame(frame, &out_dir.join(format!("source/frame_{n:04}.png")))?;
    }
    for (n, frame) in scene.target.iter().enumerate() {
        save_frame(frame, &out_dir.join(format!("target/frame_{n:04}.png")))?;
    }
    for (n, frame) in scene.ground_truth.iter().enumerate() {
        save_frame(frame, &out_dir.join(format!("gt/frame_{n:04}.png")))?;
    }
    save_trimap_png(&scene.trimap, &out_dir.join("trimap.png"))?;
    let json = serde_json::to_string_pretty(spec)?;
    fs::write(out_dir.join("scene.json"), json + "\n")?;
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gradient_weave::metrics::mse;

    #[test]
    fn default_scene_is_valid_and_deterministic() {
        let spec = SceneSpec::default();
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert_eq!(a.source.len(), 10);
        for (fa, fb) in a.source.iter().zip(&b.source) {
            assert_eq!(fa.data(), fb.data());
        }
    }

    #[test]
    fn source_translates_rigidly() {
        let spec = SceneSpec::default();
        let scene = spec.generate().unwrap();
        let (dx, dy) = spec.translation;
        let f0 = &scene.source[0];
        let f1 = &scene.source[1];
        for y in 12..(spec.height - 12) {
            for x in 12..(spec.width - 12) {
                let sx = x as i64 - dx as i64;
                let sy = y as i64 - dy as i64;
                assert_eq!(f1.get(x, y), f0.get(sx as u32, sy as u32));
            }
        }
    }

    #[test]
    fn unit_illumination_and_zero_noise_gt_is_a_known_blend() {
        let spec = SceneSpec {
            illumination_scale: 1.0,
            noise_amplitude: 0.0,
            ..Default::default()
        };
        let scene = spec.generate().unwrap();
        // Forward synthesis by hand from the known matte.
        let oracle = Frame::from_fn(spec.width, spec.height, FrameRole::Reference, |x, y| {
            let a = scene.mattes[0].get(x, y);
            let s = scene.source[0].get(x, y);
            let t = scene.target[0].get(x, y);
            [
                a * s[0] + (1.0 - a) * t[0],
                a * s[1] + (1.0 - a) * t[1],
                a * s[2] + (1.0 - a) * t[2],
            ]
        })
        .unwrap();
        assert_eq!(mse(&oracle, &scene.ground_truth[0]).unwrap(), 0.0);
    }

    #[test]
    fn illumination_scale_brightens_exactly_before_clamping() {
        let base = SceneSpec {
            illumination_scale: 1.0,
            ..Default::default()
        };
        let bright = SceneSpec {
            illumination_scale: 1.5,
            ..Default::default()
        };
        let a = base.generate().unwrap();
        let b = bright.generate().unwrap();
        for (pa, pb) in a.target[0].data().iter().zip(b.target[0].data().iter()) {
            if *pb < 1.0 {
                assert!((pb - pa * 1.5).abs() < 1e-12);
            } else {
                assert!(pa * 1.5 >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn oversized_disc_is_rejected() {
        let spec = SceneSpec {
            width: 64,
            height: 64,
            disc_radius: 40.0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn trimap_tracks_the_known_translation() {
        let spec = SceneSpec::default();
        let t0 = spec.trimap_at(0).unwrap();
        let t1 = spec.trimap_at(1).unwrap();
        let shifted = t0
            .translated(spec.translation.0, spec.translation.1)
            .unwrap();
        assert_eq!(t1, shifted);
    }

    #[test]
    fn files_written_and_loadable() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SceneSpec {
            frames: 2,
            ..Default::default()
        };
        gen_synthetic(&spec, dir.path()).unwrap();
        let tri = gradient_weave::io::load_trimap(&dir.path().join("trimap.png")).unwrap();
        assert_eq!((tri.width(), tri.height()), (160, 160));
        let f = gradient_weave::io::load_frame(
            &dir.path().join("source/frame_0001.png"),
            FrameRole::Source,
        )
        .unwrap();
        assert_eq!((f.width(), f.height()), (160, 160));
        assert!(dir.path().join("gt/frame_0000.png").exists());
        assert!(dir.path().join("scene.json").exists());
    }
}
