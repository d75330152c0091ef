//! Frame-sequence compositing under mismatched illumination.
//!
//! The crate merges a user-outlined region of a source video into a target
//! video. Two pipelines share the machinery: a baseline that combines
//! mean-value-coordinate cloning with a constant-alpha matte, and a proposed
//! variant that scales the cloned intensities by illumination-aware gradient
//! mixing weights and estimates a per-pixel matte by swarm-selected
//! foreground/background sample pairs with colour-correlation smoothing.
//! A metrics layer reports MSE, RGB probes, and per-frame timings for
//! comparing the two.

pub mod error;
pub mod frame;
pub mod gradient;
pub mod io;
pub mod matting;
pub mod metrics;
pub mod mixing;
pub mod mvc;
pub mod pipeline;
pub mod pso;
pub mod trimap;

pub use error::{Error, Result};
pub use frame::{Frame, FrameRole};
pub use gradient::{compute_gradient, GradientField};
pub use matting::{
    baseline_matte_composite, collect_samples, correlation_matte, estimate_alpha, matte_composite,
    pair_fitness, smooth_matte, AlphaMatte, Candidate, CandidateSet, FitnessParams, MattingConfig,
    SamplePair,
};
pub use metrics::{emit_report, mse, rgb_probe, MetricsRecord, ModeReport, ReportSummary};
pub use mixing::{
    legacy_mixing_weight, mean_colour_shift, mixed_gradient, mixing_weight, MixingWeights,
};
pub use mvc::{
    clone_region, mean_value_coordinates, mean_value_weights, membrane, CloneParams,
    MeanValueWeights, MixingForm,
};
pub use pipeline::{
    compose_layers, run_pipeline, CompositeConfig, CompositeMode, MatteMode, PipelineResult,
};
pub use pso::{pso_select, PsoConfig};
pub use trimap::{
    extract_boundary, hierarchical_boundary_sample, propagate_trimap, Boundary, ContourFlow,
    Trimap, TrimapLabel,
};
