//! Run configuration: defaults, overridden by a JSON config file,
//! overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gradient_weave::matting::MattingConfig;
use gradient_weave::mvc::{CloneParams, MixingForm};
use gradient_weave::pipeline::{CompositeConfig, CompositeMode, MatteMode};
use gradient_weave::pso::PsoConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Baseline,
    Proposed,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixingFormArg {
    Multiplicative,
    Additive,
}

impl From<MixingFormArg> for MixingForm {
    fn from(v: MixingFormArg) -> Self {
        match v {
            MixingFormArg::Multiplicative => MixingForm::Multiplicative,
            MixingFormArg::Additive => MixingForm::Additive,
        }
    }
}

fn parse_probe(s: &str) -> std::result::Result<(u32, u32), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("probe '{s}' must be X,Y"))?;
    let x = x.trim().parse().map_err(|e| format!("probe x: {e}"))?;
    let y = y.trim().parse().map_err(|e| format!("probe y: {e}"))?;
    Ok((x, y))
}

/// Flags of the `run` subcommand. Every optional flag falls back to the
/// config file, then to the documented default.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of source frames (lexicographic order).
    #[arg(long)]
    pub source_dir: Option<PathBuf>,
    /// Directory of target frames (lexicographic order).
    #[arg(long)]
    pub target_dir: Option<PathBuf>,
    /// Trimap image for frame 0 (0 background, 255 foreground, else unknown).
    #[arg(long)]
    pub trimap: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Ground-truth frames for MSE, when available.
    #[arg(long)]
    pub reference_dir: Option<PathBuf>,
    /// baseline, proposed, or both.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// RGB probe coordinate "X,Y"; defaults to the canvas centre.
    #[arg(long, value_parser = parse_probe)]
    pub probe: Option<(u32, u32)>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Membrane strength k in [0, 1].
    #[arg(long)]
    pub k: Option<f64>,
    /// Weight of the cloned layer; the matte layer gets 1 - alpha.
    #[arg(long)]
    pub layer_alpha: Option<f64>,
    /// multiplicative or additive illumination mixing.
    #[arg(long, value_enum)]
    pub mixing_form: Option<MixingFormArg>,
    /// Constant matte alpha used by the baseline blend.
    #[arg(long)]
    pub constant_alpha: Option<f64>,
    #[arg(long)]
    pub window_radius: Option<u32>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
    #[arg(long)]
    pub smooth_radius: Option<u32>,
    #[arg(long)]
    pub sigma_c: Option<f64>,
    /// Candidate-suppression radius in colour space.
    #[arg(long)]
    pub epsilon_a: Option<f64>,
    #[arg(long)]
    pub max_per_side: Option<usize>,
    #[arg(long)]
    pub swarm_size: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub inertia: Option<f64>,
    #[arg(long)]
    pub cognitive: Option<f64>,
    #[arg(long)]
    pub social: Option<f64>,
    /// Force the mixing weight to a constant (degeneracy checks).
    #[arg(long)]
    pub force_ma: Option<f64>,
    /// Write the per-frame mattes produced by correlation matting.
    #[arg(long)]
    pub emit_mattes: bool,
    /// Record 0 for per-frame timings so reports are byte-reproducible.
    #[arg(long)]
    pub zero_timing: bool,
}

/// JSON config file schema; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub source_dir: Option<PathBuf>,
    pub target_dir: Option<PathBuf>,
    pub trimap: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub reference_dir: Option<PathBuf>,
    pub mode: Option<ModeArg>,
    pub probe: Option<(u32, u32)>,
    pub seed: Option<u64>,
    pub k: Option<f64>,
    pub layer_alpha: Option<f64>,
    pub layer_beta: Option<f64>,
    pub mixing_form: Option<MixingFormArg>,
    pub constant_alpha: Option<f64>,
    pub window_radius: Option<u32>,
    pub max_vertices: Option<usize>,
    pub smooth_radius: Option<u32>,
    pub sigma_c: Option<f64>,
    pub epsilon_a: Option<f64>,
    pub max_per_side: Option<usize>,
    pub swarm_size: Option<usize>,
    pub iterations: Option<usize>,
    pub inertia: Option<f64>,
    pub cognitive: Option<f64>,
    pub social: Option<f64>,
    pub force_ma: Option<f64>,
    pub emit_mattes: Option<bool>,
    pub zero_timing: Option<bool>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source_dir: PathBuf,
    pub target_dir: PathBuf,
    pub trimap_path: PathBuf,
    pub output_dir: PathBuf,
    pub reference_dir: Option<PathBuf>,
    pub mode: ModeArg,
    pub probe: Option<(u32, u32)>,
    pub seed: u64,
    pub k: f64,
    pub layer_alpha: f64,
    pub layer_beta: f64,
    pub mixing_form: MixingFormArg,
    pub constant_alpha: f64,
    pub window_radius: u32,
    pub max_vertices: usize,
    pub smooth_radius: u32,
    pub sigma_c: f64,
    pub epsilon_a: f64,
    pub max_per_side: usize,
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub force_ma: Option<f64>,
    pub emit_mattes: bool,
    pub zero_timing: bool,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
}

/// Resolves flags over file values over defaults and validates the result.
pub fn parse_config(args: &RunArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };

    macro_rules! pick {
        ($field:ident, $default:expr) => {
            args.$field
                .clone()
                .or(file.$field.clone())
                .unwrap_or($default)
        };
    }
    let require_path = |flag: &str, a: &Option<PathBuf>, f: &Option<PathBuf>| -> Result<PathBuf> {
        a.clone()
            .or_else(|| f.clone())
            .with_context(|| format!("missing required path --{flag}"))
    };

    let layer_alpha = pick!(layer_alpha, 0.5);
    // A file may pin beta explicitly; flags always derive it from alpha.
    let layer_beta = match (args.layer_alpha, file.layer_beta) {
        (None, Some(b)) => b,
        _ => 1.0 - layer_alpha,
    };
    if (layer_alpha + layer_beta - 1.0).abs() > 1e-12 || layer_alpha < 0.0 || layer_beta < 0.0 {
        bail!(
            "layer weights must be non-negative and sum to 1, got {layer_alpha} and {layer_beta}"
        );
    }

    let defaults_matting = MattingConfig::default();
    let defaults_pso = PsoConfig::default();
    let cfg = RunConfig {
        source_dir: require_path("source-dir", &args.source_dir, &file.source_dir)?,
        target_dir: require_path("target-dir", &args.target_dir, &file.target_dir)?,
        trimap_path: require_path("trimap", &args.trimap, &file.trimap)?,
        output_dir: require_path("output-dir", &args.output_dir, &file.output_dir)?,
        reference_dir: args.reference_dir.clone().or(file.reference_dir.clone()),
        mode: pick!(mode, ModeArg::Both),
        probe: args.probe.or(file.probe),
        seed: pick!(seed, 42),
        k: pick!(k, 1.0),
        layer_alpha,
        layer_beta,
        mixing_form: pick!(mixing_form, MixingFormArg::Multiplicative),
        constant_alpha: pick!(constant_alpha, 0.75),
        window_radius: pick!(window_radius, 5),
        max_vertices: pick!(max_vertices, 256),
        smooth_radius: pick!(smooth_radius, defaults_matting.smooth_radius),
        sigma_c: pick!(sigma_c, defaults_matting.sigma_c),
        epsilon_a: pick!(epsilon_a, defaults_matting.epsilon_a),
        max_per_side: pick!(max_per_side, defaults_matting.max_per_side),
        swarm_size: pick!(swarm_size, defaults_pso.swarm_size),
        iterations: pick!(iterations, defaults_pso.iterations),
        inertia: pick!(inertia, defaults_pso.inertia),
        cognitive: pick!(cognitive, defaults_pso.cognitive),
        social: pick!(social, defaults_pso.social),
        force_ma: args.force_ma.or(file.force_ma),
        emit_mattes: args.emit_mattes || file.emit_mattes.unwrap_or(false),
        zero_timing: args.zero_timing || file.zero_timing.unwrap_or(false),
    };
    // Fail fast on bad numerics; composite_config validates the rest.
    cfg.composite_config(CompositeMode::Baseline).validate()?;
    cfg.composite_config(CompositeMode::Proposed).validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn matting_config(&self) -> MattingConfig {
        MattingConfig {
            max_per_side: self.max_per_side,
            epsilon_a: self.epsilon_a,
            smooth_radius: self.smooth_radius,
            sigma_c: self.sigma_c,
            eta: MattingConfig::default().eta,
        }
    }

    pub fn pso_config(&self) -> PsoConfig {
        PsoConfig {
            swarm_size: self.swarm_size,
            iterations: self.iterations,
            inertia: self.inertia,
            cognitive: self.cognitive,
            social: self.social,
            seed: self.seed,
        }
    }

    /// Pipeline configuration for one mode of this run.
    pub fn composite_config(&self, mode: CompositeMode) -> CompositeConfig {
        CompositeConfig {
            mode,
            layer_alpha: self.layer_alpha,
            layer_beta: self.layer_beta,
            clone: CloneParams {
                k: self.k,
                mixing_form: self.mixing_form.into(),
            },
            matting: match mode {
                CompositeMode::Baseline => MatteMode::Constant(self.constant_alpha),
                CompositeMode::Proposed => MatteMode::Correlation(self.matting_config()),
            },
            pso: self.pso_config(),
            window_radius: self.window_radius,
            max_vertices: self.max_vertices,
            seed: self.seed,
            ma_override: self.force_ma,
        }
    }

    pub fn modes(&self) -> Vec<CompositeMode> {
        match self.mode {
            ModeArg::Baseline => vec![CompositeMode::Baseline],
            ModeArg::Proposed => vec![CompositeMode::Proposed],
            ModeArg::Both => vec![CompositeMode::Baseline, CompositeMode::Proposed],
        }
    }
}
