//! End-to-end runs: presets, caching, stage orchestration and reports.

mod image;
mod presets;
mod run;

pub use image::{encode_phase, hue_rgb, phase_slice, sample_plane, Plane};
pub use presets::{Construction, Family, KnotPreset, LoopPreset, PresetBook, PresetError};
pub use run::{
    cache_key, coefficient_stage, format_word, loop_stage, make_field, run_pipeline, trace_stage,
    Diagnostics, Inputs, LoopStage, PipelineError, RunConfig, RunReport, StageStatus, Status,
    TraceDiagnostics, TraceStage, TrackingDiagnostics, WindingDiagnostics,
};
