//! Drives the pipeline over frame directories and emits frames + reports.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gradient_weave::frame::{Frame, FrameRole};
use gradient_weave::io::{load_frame, load_trimap, save_frame, save_matte};
use gradient_weave::metrics::{
    emit_report, mse, rgb_probe, MetricsRecord, ModeReport, ReportSummary,
};
use gradient_weave::pipeline::{run_pipeline, CompositeMode};
use gradient_weave::trimap::Trimap;

use crate::config::RunConfig;

const FRAME_EXTENSIONS: [&str; 2] = ["png", "ppm"];

/// Frame files of a directory in lexicographic order.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no frame files (.png/.ppm) in {}", dir.display());
    }
    Ok(files)
}

fn load_sequence(dir: &Path, role: FrameRole) -> Result<Vec<Frame>> {
    list_frame_files(dir)?
        .iter()
        .enumerate()
        .map(|(n, p)| {
            load_frame(p, role).with_context(|| format!("loading frame {n} ({})", p.display()))
        })
        .collect()
}

fn probe_or_centre(probe: Option<(u32, u32)>, frame: &Frame) -> (u32, u32) {
    probe.unwrap_or((frame.width() / 2, frame.height() / 2))
}

struct ModeRun {
    mode: CompositeMode,
    frames: Vec<Frame>,
    times: Vec<f64>,
}

/// Executes a full run: pipeline per requested mode, frame and matte
/// emission, metrics, and the CSV/JSON report.
pub fn run(cfg: &RunConfig) -> Result<ReportSummary> {
    let sources = load_sequence(&cfg.source_dir, FrameRole::Source)
        .with_context(|| "loading source frames")?;
    let targets = load_sequence(&cfg.target_dir, FrameRole::Target)
        .with_context(|| "loading target frames")?;
    if sources.len() != targets.len() {
        bail!(
            "source has {} frames but target has {}",
            sources.len(),
            targets.len()
        );
    }
    let trimap: Trimap = load_trimap(&cfg.trimap_path)
        .with_context(|| format!("loading trimap {}", cfg.trimap_path.display()))?;
    let references: Option<Vec<Frame>> = match &cfg.reference_dir {
        Some(dir) => {
            let refs = load_sequence(dir, FrameRole::Reference)
                .with_context(|| "loading reference frames")?;
            if refs.len() != sources.len() {
                bail!(
                    "reference has {} frames but the run has {}",
                    refs.len(),
                    sources.len()
                );
            }
            Some(refs)
        }
        None => None,
    };

    let mut runs: Vec<ModeRun> = Vec::new();
    for mode in cfg.modes() {
        let composite = cfg.composite_config(mode);
        let result = run_pipeline(&sources, &targets, &trimap, &composite)
            .with_context(|| format!("running {} pipeline", mode.label()))?;

        let mode_dir = cfg.output_dir.join(mode.label());
        fs::create_dir_all(&mode_dir)
            .with_context(|| format!("creating {}", mode_dir.display()))?;
        for (n, frame) in result.frames.iter().enumerate() {
            let path = mode_dir.join(format!("frame_{n:04}.png"));
            save_frame(frame, &path)
                .with_context(|| format!("writing frame {n} of {}", mode.label()))?;
        }
        if cfg.emit_mattes {
            for (n, matte) in result.mattes.iter().enumerate() {
                if let Some(matte) = matte {
                    let path = mode_dir.join(format!("matte_{n:04}.png"));
                    save_matte(matte, &path)
                        .with_context(|| format!("writing matte {n} of {}", mode.label()))?;
                }
            }
        }
        let times = if cfg.zero_timing {
            vec![0.0; result.frame_seconds.len()]
        } else {
            result.frame_seconds.clone()
        };
        runs.push(ModeRun {
            mode,
            frames: result.frames,
            times,
        });
    }

    let probe = probe_or_centre(cfg.probe, &targets[0]);
    let mut reports: Vec<ModeReport> = Vec::new();
    for run in &runs {
        let mut records = Vec::with_capacity(run.frames.len());
        for (n, frame) in run.frames.iter().enumerate() {
            let frame_mse = match (&references, run.mode) {
                (Some(refs), _) => Some(mse(frame, &refs[n])?),
                // Without a reference, record the between-mode difference on
                // the proposed rows only.
                (None, CompositeMode::Proposed) => runs
                    .iter()
                    .find(|r| r.mode == CompositeMode::Baseline)
                    .map(|base| mse(frame, &base.frames[n]))
                    .transpose()?,
                (None, CompositeMode::Baseline) => None,
            };
            records.push(MetricsRecord {
                frame_index: n,
                mse: frame_mse,
                probe_rgb: Some(rgb_probe(frame, probe.0, probe.1)?),
                time_seconds: run.times[n],
            });
        }
        reports.push(ModeReport {
            mode: run.mode.label().to_string(),
            records,
        });
    }

    let summary = emit_report(&reports, &cfg.output_dir)?;
    Ok(summary)
}

/// Report-only path: compares already-rendered baseline/proposed frame
/// directories (optionally against a reference) without running the
/// pipeline. Timing columns are zero.
pub fn report_dirs(
    baseline_dir: &Path,
    proposed_dir: &Path,
    reference_dir: Option<&Path>,
    probe: Option<(u32, u32)>,
    out_dir: &Path,
) -> Result<ReportSummary> {
    let baseline = load_sequence(baseline_dir, FrameRole::Layered)?;
    let proposed = load_sequence(proposed_dir, FrameRole::Layered)?;
    if baseline.len() != proposed.len() {
        bail!(
            "baseline has {} frames but proposed has {}",
            baseline.len(),
            proposed.len()
        );
    }
    let references = match reference_dir {
        Some(dir) => {
            let refs = load_sequence(dir, FrameRole::Reference)?;
            if refs.len() != baseline.len() {
                bail!("reference frame count mismatch");
            }
            Some(refs)
        }
        None => None,
    };
    let probe = probe_or_centre(probe, &baseline[0]);
    let mut reports = Vec::new();
    for (label, frames) in [("baseline", &baseline), ("proposed", &proposed)] {
        let mut records = Vec::new();
        for (n, frame) in frames.iter().enumerate() {
            let frame_mse = match &references {
                Some(refs) => Some(mse(frame, &refs[n])?),
                None if label == "proposed" => Some(mse(frame, &baseline[n])?),
                None => None,
            };
            records.push(MetricsRecord {
                frame_index: n,
                mse: frame_mse,
                probe_rgb: Some(rgb_probe(frame, probe.0, probe.1)?),
                time_seconds: 0.0,
            });
        }
        reports.push(ModeReport {
            mode: label.to_string(),
            records,
        });
    }
    Ok(emit_report(&reports, out_dir)?)
}
