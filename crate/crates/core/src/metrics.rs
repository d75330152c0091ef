//! Evaluation quantities: mean squared error in 0-255 units, RGB probes,
//! and machine-readable CSV/JSON reports.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Mean squared error between two frames, computed in 0-255 units (values
/// are scaled by 255 before squaring) and averaged over pixels and channels.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    a.ensure_same_dimensions(b, "second frame")?;
    let mut sum = 0.0;
    for (va, vb) in a.data().iter().zip(b.data().iter()) {
        let d = (va - vb) * 255.0;
        sum += d * d;
    }
    Ok(sum / a.data().len() as f64)
}

/// 8-bit RGB value at a pixel, `round(v * 255)` per channel.
pub fn rgb_probe(frame: &Frame, x: u32, y: u32) -> Result<(u8, u8, u8)> {
    if x >= frame.width() || y >= frame.height() {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: frame.width(),
            height: frame.height(),
        });
    }
    let px = frame.get(x, y).map(|v| (v * 255.0).round() as u8);
    Ok((px[0], px[1], px[2]))
}

/// Relative reduction of the proposed average against the baseline average,
/// in percent.
pub fn reduction_percent(baseline_avg: f64, proposed_avg: f64) -> f64 {
    (baseline_avg - proposed_avg) / baseline_avg * 100.0
}

/// Per-frame evaluation record.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRecord {
    pub frame_index: usize,
    /// MSE against the reference frame, when one is available.
    pub mse: Option<f64>,
    pub probe_rgb: Option<(u8, u8, u8)>,
    pub time_seconds: f64,
}

/// All records of one pipeline mode.
#[derive(Debug, Clone)]
pub struct ModeReport {
    pub mode: String,
    pub records: Vec<MetricsRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSummary {
    pub mode: String,
    pub frames: usize,
    pub mean_mse: Option<f64>,
    /// Mean probe value per channel, mirroring per-sample RGB averages.
    pub mean_probe_rgb: Option<[f64; 3]>,
    pub mean_time_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub modes: Vec<ModeSummary>,
    /// Relative MSE reduction of "proposed" against "baseline", when both
    /// modes carry MSE values.
    pub mse_reduction_percent: Option<f64>,
}

fn summarize(report: &ModeReport) -> ModeSummary {
    let n = report.records.len();
    let mses: Vec<f64> = report.records.iter().filter_map(|r| r.mse).collect();
    let probes: Vec<(u8, u8, u8)> = report.records.iter().filter_map(|r| r.probe_rgb).collect();
    let mean_mse = if mses.is_empty() {
        None
    } else {
        Some(mses.iter().sum::<f64>() / mses.len() as f64)
    };
    let mean_probe_rgb = if probes.is_empty() {
        None
    } else {
        let k = probes.len() as f64;
        Some([
            probes.iter().map(|p| p.0 as f64).sum::<f64>() / k,
            probes.iter().map(|p| p.1 as f64).sum::<f64>() / k,
            probes.iter().map(|p| p.2 as f64).sum::<f64>() / k,
        ])
    };
    let mean_time_seconds = if n == 0 {
        None
    } else {
        Some(report.records.iter().map(|r| r.time_seconds).sum::<f64>() / n as f64)
    };
    ModeSummary {
        mode: report.mode.clone(),
        frames: n,
        mean_mse,
        mean_probe_rgb,
        mean_time_seconds,
    }
}

fn csv_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `report.csv` and `summary.json` into the output directory and
/// returns the summary. CSV columns: mode, frame, mse, r, g, b, time_s;
/// dot decimals, LF line endings.
pub fn emit_report(reports: &[ModeReport], out_dir: &Path) -> Result<ReportSummary> {
    let io_err = |source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(out_dir).map_err(io_err)?;

    let mut csv = String::from("mode,frame,mse,r,g,b,time_s\n");
    for report in reports {
        for r in &report.records {
            let (pr, pg, pb) = match r.probe_rgb {
                Some((a, b, c)) => (Some(a), Some(b), Some(c)),
                None => (None, None, None),
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                report.mode,
                r.frame_index,
                csv_opt(&r.mse),
                csv_opt(&pr),
                csv_opt(&pg),
                csv_opt(&pb),
                r.time_seconds
            ));
        }
    }
    fs::write(out_dir.join("report.csv"), csv).map_err(io_err)?;

    let modes: Vec<ModeSummary> = reports.iter().map(summarize).collect();
    let base = modes
        .iter()
        .find(|m| m.mode == "baseline")
        .and_then(|m| m.mean_mse);
    let prop = modes
        .iter()
        .find(|m| m.mode == "proposed")
        .and_then(|m| m.mean_mse);
    let mse_reduction_percent = match (base, prop) {
        (Some(b), Some(p)) if b != 0.0 => Some(reduction_percent(b, p)),
        _ => None,
    };
    let summary = ReportSummary {
        modes,
        mse_reduction_percent,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(out_dir.join("summary.json"), json + "\n").map_err(io_err)?;
    Ok(summary)
}
