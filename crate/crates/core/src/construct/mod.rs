//! Loops of polynomials whose roots trace a prescribed braid.
//!
//! A real polynomial `p` with simple real roots and distinct real critical
//! values is deformed by `g_t(u) = p(u) - Γ(t)`. Each letter `σ_j^{±1}` of
//! the braid word contributes one trip of `Γ` around the critical value
//! `v_j`, which exchanges the two roots adjacent to the critical point `c_j`.

mod loops;
mod poly;
mod tracking;
mod trig;
mod winding;

pub use loops::{concatenate_loops, BasicLoop, LoopPiece, PiecewiseLoop, TrigTerm};
pub use poly::{aberth, critical_data, horner, BasePolynomial};
pub use tracking::{track_roots, RootBraid, COLLISION_TOLERANCE};
pub use trig::{fourier_approximate, g_eval, TrigLoop, DEFAULT_SAMPLES};
pub use winding::{
    winding_diagnostic, winding_sequence, WindingReport, WindingSummary, ENDPOINT_TOLERANCE,
    WINDING_MAX_DEVIATION, WINDING_MIN_DISTANCE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("invalid base polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("critical values repeat ({value})")]
    RepeatedCriticalValue { value: f64 },
    #[error("root finder: {detail}")]
    RootFinder { detail: String },
    #[error("basic loop {index}: {why}")]
    InvalidLoop { index: usize, why: String },
    #[error("no basic loop for generator {index}")]
    MissingLoop { index: usize },
    #[error("trigonometric loop: {0}")]
    InvalidTrigLoop(String),
    #[error("{steps} steps requested, at least {min} needed")]
    TooFewSteps { steps: usize, min: usize },
    #[error("roots collide near t = {t:.6} (separation {separation:.3e})")]
    RootCollision { t: f64, separation: f64 },
    #[error("more than two roots exchange order near t = {t:.6}")]
    TriplePoint { t: f64 },
    #[error("winding about v_{critical} on interval {interval} undefined: path within {distance:.2e} of 0")]
    WindingUndefined {
        critical: usize,
        interval: usize,
        distance: f64,
    },
    #[error(
        "winding about v_{critical} on interval {interval} is {raw:.3}, not close to an integer"
    )]
    AmbiguousWinding {
        critical: usize,
        interval: usize,
        raw: f64,
    },
}
