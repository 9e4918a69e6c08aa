//! Stage orchestration for one knot and one construction.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Construction, KnotPreset, LoopPreset, PresetBook};
use crate::braid::{delete_strands, shift_braid, BraidWord};
use crate::construct::{
    concatenate_loops, fourier_approximate, track_roots, winding_sequence, BasePolynomial,
    TrigLoop, DEFAULT_SAMPLES,
};
use crate::field::{build_semiholomorphic, restrict_z0_cylindrical, CoefficientField};
use crate::propagate::{assemble_gaussian_beam, assemble_polynomial_beam, ParaxialField};
use crate::topo::{
    extract_braid, identify_knot, permutation_consistent, Identification, TopoError, Verdict,
};
use crate::trace::{
    curves_csv, curves_json, curves_obj, select_component, trace_nodal_curves, CurveStats,
    NodalCurve, TraceError, TraceResult, Window, DEFAULT_GRID, DEFAULT_SLICES,
};

/// Root-tracking samples per letter.
const TRACK_STEPS_PER_LETTER: usize = 64;
/// Times the default window is widened when curves run into its outer edge.
const WINDOW_GROWTH_STEPS: u32 = 3;
const WINDOW_GROWTH: f64 = 1.5;

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: String,
    pub message: String,
    pub report: Box<RunReport>,
}

/// Knot, construction and numeric parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub knot: Option<String>,
    pub word: BraidWord,
    pub construction: Construction,
    pub m: usize,
    pub a_inv: f64,
    pub mu_inv: f64,
}

impl Inputs {
    /// Table parameters for `preset` under `construction`.
    pub fn from_preset(preset: &KnotPreset, construction: Construction) -> Self {
        Self {
            knot: Some(preset.name.clone()),
            word: preset.word.clone(),
            construction,
            m: preset.order(construction),
            a_inv: preset.a_inv(construction),
            mu_inv: preset.mu_inv,
        }
    }

    /// Braid whose closure the field is built from; polynomial beams carry
    /// one extra unknotted strand.
    pub fn construction_word(&self) -> BraidWord {
        match self.construction {
            Construction::Gaussian => self.word.clone(),
            Construction::Polybeam => shift_braid(&self.word),
        }
    }

    pub fn expected_verdict(&self) -> Verdict {
        match self.construction {
            Construction::Gaussian => Verdict::Match,
            Construction::Polybeam => Verdict::MirrorMatch,
        }
    }

    /// Radius of the circle the knot winds around.
    pub fn core_radius(&self) -> f64 {
        match self.construction {
            Construction::Gaussian => self.mu_inv,
            Construction::Polybeam => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub slices: usize,
    pub grid: usize,
    /// `None` uses the default window and widens it if needed.
    pub window: Option<Window>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(inputs: Inputs) -> Self {
        Self {
            inputs,
            slices: DEFAULT_SLICES,
            grid: DEFAULT_GRID,
            window: None,
            out_dir: None,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStatus {
    pub name: String,
    pub status: Status,
    pub seconds: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingDiagnostics {
    pub reproduces_word: bool,
    pub max_deviation: f64,
    pub max_endpoint_offset: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingDiagnostics {
    pub steps: usize,
    pub word: Option<String>,
    pub invariants_match: Option<bool>,
    pub min_separation: Option<f64>,
    pub min_critical_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDiagnostics {
    pub slices: usize,
    pub grid: usize,
    pub window: Window,
    pub closed_curves: usize,
    pub open_chains: usize,
    pub ambiguous_links: usize,
    pub newton_failures: usize,
    pub count_varies: bool,
    pub link_threshold: f64,
    pub components: Vec<CurveStats>,
    pub selected: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub winding: Option<WindingDiagnostics>,
    pub tracking: Option<TrackingDiagnostics>,
    pub coefficient_count: Option<usize>,
    pub n_max: Option<u32>,
    pub cache_key: Option<String>,
    pub cache_hit: bool,
    pub trace: Option<TraceDiagnostics>,
    pub permutation_consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub inputs: Inputs,
    pub construction_word: BraidWord,
    pub slices: usize,
    pub grid: usize,
    pub stages: Vec<StageStatus>,
    pub diagnostics: Diagnostics,
    pub identification: Option<Identification>,
    pub verdict: Option<Verdict>,
    pub expected_verdict: Verdict,
    pub artifacts: Vec<PathBuf>,
    pub seconds: f64,
}

impl RunReport {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            inputs: cfg.inputs.clone(),
            construction_word: cfg.inputs.construction_word(),
            slices: cfg.slices,
            grid: cfg.grid,
            stages: Vec::new(),
            diagnostics: Diagnostics::default(),
            identification: None,
            verdict: None,
            expected_verdict: cfg.inputs.expected_verdict(),
            artifacts: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Base polynomial, construction word and pinned Fourier loop.
#[derive(Debug, Clone)]
pub struct LoopStage {
    pub polynomial: BasePolynomial,
    pub word: BraidWord,
    pub trig: TrigLoop,
    pub preset: LoopPreset,
}

pub fn loop_stage(book: &PresetBook, inputs: &Inputs) -> Result<LoopStage, String> {
    let preset = book
        .loops(inputs.construction, inputs.word.strands())
        .map_err(|e| e.to_string())?
        .clone();
    let polynomial = preset.polynomial().map_err(|e| e.to_string())?;
    let word = inputs.construction_word();
    let gamma = concatenate_loops(&word, &preset.loops).map_err(|e| e.to_string())?;
    let trig = fourier_approximate(&gamma, inputs.m, DEFAULT_SAMPLES)
        .map_err(|e| e.to_string())?
        .pin_basepoint();
    Ok(LoopStage {
        polynomial,
        word,
        trig,
        preset,
    })
}

pub fn coefficient_stage(stage: &LoopStage, a_inv: f64) -> Result<CoefficientField, String> {
    let f = build_semiholomorphic(&stage.polynomial, &stage.trig, 1.0 / a_inv)
        .map_err(|e| e.to_string())?;
    restrict_z0_cylindrical(&f).map_err(|e| e.to_string())
}

pub fn make_field(
    coeffs: &CoefficientField,
    inputs: &Inputs,
) -> Result<Box<dyn ParaxialField>, String> {
    Ok(match inputs.construction {
        Construction::Polybeam => Box::new(assemble_polynomial_beam(coeffs)),
        Construction::Gaussian => Box::new(
            assemble_gaussian_beam(coeffs, 1.0 / inputs.mu_inv, 1.0).map_err(|e| e.to_string())?,
        ),
    })
}

/// Content hash of everything the traced curves depend on.
pub fn cache_key(cfg: &RunConfig, preset: &LoopPreset) -> String {
    let i = &cfg.inputs;
    let loops = serde_json::to_string(&preset.loops).expect("loops serialise");
    let text = format!(
        "word={:?}|strands={}|construction={}|roots={:?}|loops={loops}|m={}|a_inv={:?}|mu_inv={:?}|slices={}",
        i.word.signed(),
        i.word.strands(),
        i.construction,
        preset.roots,
        i.m,
        i.a_inv,
        i.mu_inv,
        cfg.slices
    );
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn diagnose(stage: &LoopStage, inputs: &Inputs) -> (WindingDiagnostics, TrackingDiagnostics) {
    let ell = stage.word.len();
    let winding = match winding_sequence(&stage.polynomial, &stage.trig, ell) {
        Ok(w) => WindingDiagnostics {
            reproduces_word: w.word.as_ref() == Some(&stage.word),
            max_deviation: w.max_deviation,
            max_endpoint_offset: w.max_endpoint_offset,
            error: None,
        },
        Err(e) => WindingDiagnostics {
            reproduces_word: false,
            max_deviation: f64::NAN,
            max_endpoint_offset: f64::NAN,
            error: Some(e.to_string()),
        },
    };
    let steps = TRACK_STEPS_PER_LETTER * ell.max(1);
    let tracking = match track_roots(&stage.polynomial, &stage.trig, steps, ell) {
        Ok(rb) => {
            let traced = match inputs.construction {
                Construction::Gaussian => rb.word.clone(),
                // the extra strand starts at the smallest root
                Construction::Polybeam => delete_strands(&rb.word, &[0]),
            };
            let agrees = identify_knot(&traced, &inputs.word)
                .ok()
                .map(|id| id.verdict == Verdict::Match);
            TrackingDiagnostics {
                steps,
                word: Some(format_word(&rb.word)),
                invariants_match: agrees,
                min_separation: Some(rb.min_separation),
                min_critical_distance: Some(rb.min_critical_distance),
                error: None,
            }
        }
        Err(e) => TrackingDiagnostics {
            steps,
            word: None,
            invariants_match: None,
            min_separation: None,
            min_critical_distance: None,
            error: Some(e.to_string()),
        },
    };
    (winding, tracking)
}

pub fn format_word(b: &BraidWord) -> String {
    b.signed()
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn touches_outer_edge(result: &TraceResult) -> bool {
    let w = &result.window;
    let cell = (w.r_max - w.r_min) / result.grid as f64;
    result
        .closed
        .iter()
        .chain(&result.open)
        .flat_map(|c| &c.points)
        .any(|p| p.r > w.r_max - 2.0 * cell)
}

/// Outcome of tracing plus component selection.
pub struct TraceStage {
    pub result: TraceResult,
    pub selected: Result<usize, TraceError>,
}

/// Trace, select the knot component, and widen the default window while
/// curves run into its outer edge without a usable component.
pub fn trace_stage(
    field: &dyn ParaxialField,
    cfg: &RunConfig,
    slices: usize,
) -> Result<TraceStage, TraceError> {
    let strands = cfg.inputs.word.strands();
    let min_slices = 8 * cfg.inputs.word.len();
    let mut window = cfg
        .window
        .unwrap_or_else(|| Window::around(cfg.inputs.core_radius()));
    let mut attempt = 0;
    loop {
        let result = trace_nodal_curves(field, slices, &window, cfg.grid, min_slices)?;
        let selected = select_component(&result.closed, strands).map(|c| {
            result
                .closed
                .iter()
                .position(|x| std::ptr::eq(x, c))
                .unwrap()
        });
        let grow =
            cfg.window.is_none() && attempt < WINDOW_GROWTH_STEPS && touches_outer_edge(&result);
        if selected.is_ok() && !(grow && !result.open.is_empty()) || !grow {
            return Ok(TraceStage { result, selected });
        }
        attempt += 1;
        window.r_max *= WINDOW_GROWTH;
        info!(
            "curves reach the window edge, widening to R <= {}",
            window.r_max
        );
    }
}

struct Clock {
    start: Instant,
}

impl Clock {
    fn new() -> Self {
        Self {
            start: Instant::now(),
        }
    }

    fn done(&self, report: &mut RunReport, name: &str, status: Status, detail: Option<String>) {
        report.stages.push(StageStatus {
            name: name.into(),
            status,
            seconds: self.start.elapsed().as_secs_f64(),
            detail,
        });
    }
}

fn fail(
    mut report: RunReport,
    stage: &str,
    clock: Clock,
    message: String,
    started: Instant,
) -> PipelineError {
    clock.done(&mut report, stage, Status::Failed, Some(message.clone()));
    report.seconds = started.elapsed().as_secs_f64();
    PipelineError {
        stage: stage.into(),
        message,
        report: Box::new(report),
    }
}

fn write(report: &mut RunReport, dir: &Path, name: &str, content: &[u8]) -> Result<(), String> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| format!("writing {}: {e}", path.display()))?;
    report.artifacts.push(path);
    Ok(())
}

/// Export curves: all components to CSV/OBJ, stats to JSON.
pub fn ordered_curves(result: &TraceResult) -> Vec<NodalCurve> {
    result.closed.iter().chain(&result.open).cloned().collect()
}

/// Run every stage and return the report; on failure the error carries the
/// partial report.
pub fn run_pipeline(book: &PresetBook, cfg: &RunConfig) -> Result<RunReport, PipelineError> {
    let started = Instant::now();
    let mut report = RunReport::new(cfg);
    let inputs = &cfg.inputs;
    if !inputs.word.is_knot() {
        let clock = Clock::new();
        return Err(fail(
            report,
            "input",
            clock,
            format!("closure has {} components", inputs.word.components()),
            started,
        ));
    }

    let clock = Clock::new();
    let stage = match loop_stage(book, inputs) {
        Ok(s) => s,
        Err(e) => return Err(fail(report, "construct", clock, e, started)),
    };
    let (winding, tracking) = diagnose(&stage, inputs);
    let detail = (!winding.reproduces_word || tracking.invariants_match != Some(true))
        .then(|| "diagnostics disagree with the input word".to_string());
    if let Some(d) = &detail {
        warn!("{d}");
    }
    report.diagnostics.winding = Some(winding);
    report.diagnostics.tracking = Some(tracking);
    clock.done(&mut report, "construct", Status::Ok, detail);

    let clock = Clock::new();
    let key = cache_key(cfg, &stage.preset);
    report.diagnostics.cache_key = Some(key.clone());
    let cache_file = cfg
        .cache_dir
        .as_ref()
        .map(|d| d.join(format!("{key}.coeffs")));
    let cached = cache_file
        .as_ref()
        .and_then(|p| fs::read_to_string(p).ok())
        .and_then(|t| CoefficientField::from_table(&t).ok());
    let coeffs = match cached {
        Some(c) => {
            report.diagnostics.cache_hit = true;
            c
        }
        None => {
            let c = match coefficient_stage(&stage, inputs.a_inv) {
                Ok(c) => c,
                Err(e) => return Err(fail(report, "field", clock, e, started)),
            };
            if let (Some(dir), Some(path)) = (&cfg.cache_dir, &cache_file) {
                if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(path, c.to_table()))
                {
                    warn!("cache write failed: {e}");
                }
            }
            c
        }
    };
    report.diagnostics.coefficient_count = Some(coeffs.len());
    report.diagnostics.n_max = Some(coeffs.n_max());
    clock.done(&mut report, "field", Status::Ok, None);

    let clock = Clock::new();
    let field = match make_field(&coeffs, inputs) {
        Ok(f) => f,
        Err(e) => return Err(fail(report, "propagate", clock, e, started)),
    };
    clock.done(&mut report, "propagate", Status::Ok, None);

    // a triple point in the extracted diagram is retried once with twice the slices
    let mut slices = cfg.slices;
    let mut retried = false;
    let (traced, diagram) = loop {
        let clock = Clock::new();
        let traced = match trace_stage(field.as_ref(), cfg, slices) {
            Ok(t) => t,
            Err(e) => return Err(fail(report, "trace", clock, e.to_string(), started)),
        };
        let r = &traced.result;
        let curves = ordered_curves(r);
        report.diagnostics.trace = Some(TraceDiagnostics {
            slices,
            grid: r.grid,
            window: r.window,
            closed_curves: r.closed.len(),
            open_chains: r.open.len(),
            ambiguous_links: r.ambiguous_links,
            newton_failures: r.newton_failures,
            count_varies: r.count_varies,
            link_threshold: r.link_threshold,
            components: curves
                .iter()
                .enumerate()
                .map(|(i, c)| CurveStats::of(i, c))
                .collect(),
            selected: traced.selected.as_ref().ok().copied(),
        });
        let index = match &traced.selected {
            Ok(i) => *i,
            Err(e) => return Err(fail(report, "trace", clock, e.to_string(), started)),
        };
        clock.done(&mut report, "trace", Status::Ok, None);

        let clock = Clock::new();
        match extract_braid(&traced.result.closed[index]) {
            Ok(d) => break (traced, (d, clock)),
            Err(TopoError::TriplePoint { slice }) if !retried => {
                warn!(
                    "triple point near slice {slice}, retracing with {} slices",
                    2 * slices
                );
                clock.done(
                    &mut report,
                    "topo",
                    Status::Skipped,
                    Some(format!("triple point near slice {slice}")),
                );
                slices *= 2;
                retried = true;
            }
            Err(e) => return Err(fail(report, "topo", clock, e.to_string(), started)),
        }
    };
    let (diagram, clock) = diagram;
    report.slices = slices;
    report.diagnostics.permutation_consistent = Some(permutation_consistent(&diagram));
    let id = match identify_knot(&diagram.word, &inputs.word) {
        Ok(id) => id,
        Err(e) => return Err(fail(report, "topo", clock, e.to_string(), started)),
    };
    report.verdict = Some(id.verdict);
    if id.amphichiral {
        // a knot equal to its mirror can only read as a match
        report.expected_verdict = Verdict::Match;
    }
    report.identification = Some(id);
    clock.done(&mut report, "topo", Status::Ok, None);

    if let Some(dir) = &cfg.out_dir {
        let clock = Clock::new();
        let curves = ordered_curves(&traced.result);
        let written = fs::create_dir_all(dir)
            .map_err(|e| format!("creating {}: {e}", dir.display()))
            .and_then(|_| {
                write(
                    &mut report,
                    dir,
                    "curves.csv",
                    curves_csv(&curves).as_bytes(),
                )
            })
            .and_then(|_| {
                write(
                    &mut report,
                    dir,
                    "curves.obj",
                    curves_obj(&curves).as_bytes(),
                )
            })
            .and_then(|_| {
                let json =
                    serde_json::to_string_pretty(&curves_json(&curves)).expect("stats serialise");
                write(&mut report, dir, "components.json", json.as_bytes())
            })
            .and_then(|_| {
                write(
                    &mut report,
                    dir,
                    "coefficients.txt",
                    coeffs.to_table().as_bytes(),
                )
            });
        if let Err(e) = written {
            return Err(fail(report, "export", clock, e, started));
        }
        report.artifacts.push(dir.join("report.json"));
        clock.done(&mut report, "export", Status::Ok, None);
        report.seconds = started.elapsed().as_secs_f64();
        if let Err(e) = fs::write(dir.join("report.json"), report.to_json()) {
            return Err(fail(
                report,
                "export",
                Clock::new(),
                format!("writing report: {e}"),
                started,
            ));
        }
        return Ok(report);
    }
    report.seconds = started.elapsed().as_secs_f64();
    Ok(report)
}
