use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use gradient_weave_cli::config::{parse_config, RunArgs};
use gradient_weave_cli::runner::{report_dirs, run};
use gradient_weave_cli::synthetic::{gen_synthetic, SceneSpec};

/// Frame-sequence compositing under mismatched illumination.
#[derive(Parser)]
#[command(name = "gradient-weave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Composite a source sequence into a target sequence and report metrics.
    Run(Box<RunArgs>),
    /// Generate a synthetic benchmark scene (frames, trimap, ground truth).
    GenSynthetic(GenArgs),
    /// Re-compute the report from already-rendered frame directories.
    Report(ReportArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 160)]
    width: u32,
    #[arg(long, default_value_t = 160)]
    height: u32,
    #[arg(long, default_value_t = 10)]
    frames: u32,
    #[arg(long, default_value_t = 28.0)]
    disc_radius: f64,
    /// Per-frame rigid motion of the source content, "dx,dy".
    #[arg(long, default_value = "2,-1", value_parser = parse_translation)]
    translate: (i32, i32),
    /// Brightness factor applied to the target video.
    #[arg(long, default_value_t = 1.5)]
    illumination_scale: f64,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Half-width of the unknown annulus around the disc edge.
    #[arg(long, default_value_t = 4.0)]
    unknown_band: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long)]
    baseline_dir: PathBuf,
    #[arg(long)]
    proposed_dir: PathBuf,
    #[arg(long)]
    reference_dir: Option<PathBuf>,
    /// RGB probe coordinate "X,Y"; defaults to the canvas centre.
    #[arg(long, value_parser = parse_probe)]
    probe: Option<(u32, u32)>,
    #[arg(long)]
    output_dir: PathBuf,
}

fn parse_translation(s: &str) -> std::result::Result<(i32, i32), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("translation '{s}' must be dx,dy"))?;
    Ok((
        x.trim().parse().map_err(|e| format!("dx: {e}"))?,
        y.trim().parse().map_err(|e| format!("dy: {e}"))?,
    ))
}

fn parse_probe(s: &str) -> std::result::Result<(u32, u32), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("probe '{s}' must be X,Y"))?;
    Ok((
        x.trim().parse().map_err(|e| format!("x: {e}"))?,
        y.trim().parse().map_err(|e| format!("y: {e}"))?,
    ))
}

/// Honors GRADIENT_WEAVE_THREADS: a positive value caps the worker count,
/// 0 or unset leaves the automatic choice.
fn init_thread_pool() -> Result<()> {
    if let Ok(v) = std::env::var("GRADIENT_WEAVE_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("GRADIENT_WEAVE_THREADS='{v}' is not a number"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("initializing worker pool")?;
        }
    }
    Ok(())
}

fn real_main() -> Result<()> {
    init_thread_pool()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = parse_config(&args)?;
            let summary = run(&cfg)?;
            println!(
                "wrote {} and {}",
                cfg.output_dir.join("report.csv").display(),
                cfg.output_dir.join("summary.json").display()
            );
            for m in &summary.modes {
                match m.mean_mse {
                    Some(v) => println!("{}: {} frames, mean MSE {v:.4}", m.mode, m.frames),
                    None => println!("{}: {} frames", m.mode, m.frames),
                }
            }
            if let Some(r) = summary.mse_reduction_percent {
                println!("MSE reduction (proposed vs baseline): {r:.2}%");
            }
        }
        Command::GenSynthetic(args) => {
            let spec = SceneSpec {
                width: args.width,
                height: args.height,
                frames: args.frames,
                disc_radius: args.disc_radius,
                translation: args.translate,
                illumination_scale: args.illumination_scale,
                noise_amplitude: args.noise,
                unknown_band: args.unknown_band,
                seed: args.seed,
            };
            gen_synthetic(&spec, &args.output_dir)?;
            println!(
                "wrote {} frames + trimap + ground truth under {}",
                spec.frames,
                args.output_dir.display()
            );
        }
        Command::Report(args) => {
            report_dirs(
                &args.baseline_dir,
                &args.proposed_dir,
                args.reference_dir.as_deref(),
                args.probe,
                &args.output_dir,
            )?;
            println!(
                "wrote {} and {}",
                args.output_dir.join("report.csv").display(),
                args.output_dir.join("summary.json").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
