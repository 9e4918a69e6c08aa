//! Zeros of a propagated field on half-planes of constant azimuth, linked
//! into closed nodal curves.

mod export;

pub use export::{curves_csv, curves_json, curves_obj, parse_curves_csv, CsvError, CurveStats};

use std::f64::consts::TAU;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::propagate::{HalfPlane, ParaxialField};

pub const DEFAULT_SLICES: usize = 840;
pub const DEFAULT_GRID: usize = 96;
const MIN_GRID: usize = 32;
const NEWTON_ITERATIONS: usize = 50;
/// Grid refinements tried when the number of zeros varies between slices.
const MAX_REFINEMENTS: u32 = 2;
/// Link cap, relative to the window size, between slices with equal zero counts.
const RELAXED_LINK: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("empty window")]
    EmptyWindow,
    #[error("grid {0} below the minimum of 32")]
    GridTooSmall(usize),
    #[error("{slices} slices given, at least {min} needed")]
    TooFewSlices { slices: usize, min: usize },
    #[error("no closed component with {expected} strands among {found} curves")]
    NoComponent { expected: usize, found: usize },
}

/// Rectangle in the `(R, z)` half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Window {
    /// `R ∈ [R₀/4, 2R₀]`, `z ∈ [-3R₀/4, 3R₀/4]`.
    pub fn around(r0: f64) -> Self {
        Self {
            r_min: 0.25 * r0,
            r_max: 2.0 * r0,
            z_min: -0.75 * r0,
            z_max: 0.75 * r0,
        }
    }

    fn is_empty(&self) -> bool {
        !(self.r_max > self.r_min && self.z_max > self.z_min)
    }

    /// Larger side length.
    pub fn size(&self) -> f64 {
        (self.r_max - self.r_min).max(self.z_max - self.z_min)
    }

    fn contains(&self, r: f64, z: f64, slack: f64) -> bool {
        r >= self.r_min - slack
            && r <= self.r_max + slack
            && z >= self.z_min - slack
            && z <= self.z_max + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceZero {
    pub r: f64,
    pub z: f64,
    /// `|Ψ|` at the point over the largest `|Ψ|` at the corners of its cell.
    pub residual: f64,
    /// Condition number of the finite-difference Jacobian.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceZeroSet {
    pub phi: f64,
    pub zeros: Vec<SliceZero>,
    /// Candidate cells whose Newton iteration did not converge.
    pub failures: usize,
}

fn signs_differ(v: &[f64; 4]) -> bool {
    let pos = v.iter().any(|&x| x > 0.0);
    let neg = v.iter().any(|&x| x < 0.0);
    let zero = v.iter().any(|&x| x == 0.0);
    (pos && neg) || zero
}

/// 2x2 Newton on `(Re Ψ, Im Ψ)` with a forward-difference Jacobian.
fn newton(hp: &HalfPlane, mut r: f64, mut z: f64, step: f64, tol: f64) -> Option<(f64, f64, f64)> {
    for _ in 0..NEWTON_ITERATIONS {
        let f = hp.reduced(r, z);
        let fr = (hp.reduced(r + step, z) - f) / step;
        let fz = (hp.reduced(r, z + step) - f) / step;
        let (a, b, c, d) = (fr.re, fz.re, fr.im, fz.im);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dr = (d * f.re - b * f.im) / det;
        let dz = (a * f.im - c * f.re) / det;
        r -= dr;
        z -= dz;
        if dr.hypot(dz) < tol {
            let frob = (a * a + b * b + c * c + d * d).sqrt();
            let inv = frob / det.abs();
            return Some((r, z, frob * inv));
        }
    }
    None
}

/// Zeros of `Ψ` on the half-plane `φ` inside `window`.
pub fn slice_zeros(
    field: &dyn ParaxialField,
    phi: f64,
    window: &Window,
    grid: usize,
) -> Result<SliceZeroSet, TraceError> {
    if window.is_empty() {
        return Err(TraceError::EmptyWindow);
    }
    if grid < MIN_GRID {
        return Err(TraceError::GridTooSmall(grid));
    }
    let hp = field.half_plane(phi);
    let size = window.size();
    let dr = (window.r_max - window.r_min) / grid as f64;
    let dz = (window.z_max - window.z_min) / grid as f64;
    let node = |i: usize, j: usize| (window.r_min + i as f64 * dr, window.z_min + j as f64 * dz);
    let mut values = vec![num_complex::Complex64::new(0.0, 0.0); (grid + 1) * (grid + 1)];
    for i in 0..=grid {
        for j in 0..=grid {
            let (r, z) = node(i, j);
            values[i * (grid + 1) + j] = hp.reduced(r, z);
        }
    }
    let at = |i: usize, j: usize| values[i * (grid + 1) + j];

    let step = 1e-6 * size;
    let merge = 1e-6 * size;
    let mut zeros: Vec<SliceZero> = Vec::new();
    let mut failures = 0;
    for i in 0..grid {
        for j in 0..grid {
            let corners = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            if !signs_differ(&corners.map(|c| c.re)) || !signs_differ(&corners.map(|c| c.im)) {
                continue;
            }
            let scale = corners.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let (r0, z0) = node(i, j);
            match newton(&hp, r0 + 0.5 * dr, z0 + 0.5 * dz, step, 1e-13 * size) {
                Some((r, z, condition)) if window.contains(r, z, dr.max(dz)) => {
                    if zeros.iter().any(|p| (p.r - r).hypot(p.z - z) < merge) {
                        continue;
                    }
                    let residual = hp.reduced(r, z).norm() / scale.max(f64::MIN_POSITIVE);
                    zeros.push(SliceZero {
                        r,
                        z,
                        residual,
                        condition,
                    });
                }
                Some(_) => {}
                None => failures += 1,
            }
        }
    }
    zeros.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap());
    Ok(SliceZeroSet {
        phi,
        zeros,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub slice: usize,
    pub r: f64,
    pub phi: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalCurve {
    pub points: Vec<CurvePoint>,
    pub closed: bool,
    /// Net turns about the axis; for a closed curve, points per slice.
    pub winding: usize,
    pub slices: usize,
}

impl NodalCurve {
    /// Points per slice, if constant.
    pub fn strands(&self) -> Option<usize> {
        let mut count = vec![0usize; self.slices];
        for p in &self.points {
            count[p.slice] += 1;
        }
        let first = count[0];
        count.iter().all(|&c| c == first).then_some(first)
    }

    pub fn mean_r(&self) -> f64 {
        self.points.iter().map(|p| p.r).sum::<f64>() / self.points.len() as f64
    }

    /// Mean distance to the circle `R = R₀, z = 0`, `R₀` the mean radius.
    pub fn core_distance(&self) -> f64 {
        let r0 = self.mean_r();
        self.points
            .iter()
            .map(|p| (p.r - r0).hypot(p.z))
            .sum::<f64>()
            / self.points.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub closed: Vec<NodalCurve>,
    pub open: Vec<NodalCurve>,
    pub slices: usize,
    pub grid: usize,
    pub window: Window,
    /// Links decided between two candidates at similar distance.
    pub ambiguous_links: usize,
    pub newton_failures: usize,
    /// Whether the zero count still differs between slices.
    pub count_varies: bool,
    pub link_threshold: f64,
}

fn dist(a: &SliceZero, b: &SliceZero) -> f64 {
    (a.r - b.r).hypot(a.z - b.z)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Greedy nearest-neighbour links from slice `j` to `j + 1`. When both
/// slices hold the same number of zeros, points left over after the
/// thresholded pass are paired up to the looser `relaxed` distance.
fn link(
    from: &[SliceZero],
    to: &[SliceZero],
    threshold: f64,
    relaxed: f64,
    ambiguous: &mut usize,
) -> Vec<Option<usize>> {
    let cap = if from.len() == to.len() {
        threshold.max(relaxed)
    } else {
        threshold
    };
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in from.iter().enumerate() {
        for (j, b) in to.iter().enumerate() {
            let d = dist(a, b);
            if d <= cap {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (i, a) in from.iter().enumerate() {
        let mut ds: Vec<f64> = to
            .iter()
            .map(|b| dist(a, b))
            .filter(|&d| d <= threshold)
            .collect();
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ds.len() >= 2 && ds[1] <= 1.1 * ds[0] {
            *ambiguous += 1;
            debug!("ambiguous link from point {i}");
        }
    }
    let mut next = vec![None; from.len()];
    let mut taken = vec![false; to.len()];
    for pass in [threshold, cap] {
        for &(d, i, j) in &pairs {
            if d <= pass && next[i].is_none() && !taken[j] {
                next[i] = Some(j);
                taken[j] = true;
            }
        }
    }
    next
}

fn trace_once(
    field: &dyn ParaxialField,
    slices: usize,
    window: &Window,
    grid: usize,
) -> Result<TraceResult, TraceError> {
    let sets: Vec<SliceZeroSet> = (0..slices)
        .into_par_iter()
        .map(|j| slice_zeros(field, TAU * j as f64 / slices as f64, window, grid))
        .collect::<Result<_, _>>()?;
    let newton_failures = sets.iter().map(|s| s.failures).sum();
    let counts: Vec<usize> = sets.iter().map(|s| s.zeros.len()).collect();
    let count_varies = counts.iter().any(|&c| c != counts[0]);

    // Slowest-moving components would drag a pointwise median down, so
    // take the largest nearest-neighbour step of each slice gap.
    let mut steps = Vec::new();
    for j in 0..slices {
        let next = &sets[(j + 1) % slices].zeros;
        let worst = sets[j]
            .zeros
            .iter()
            .filter_map(|a| {
                next.iter()
                    .map(|b| dist(a, b))
                    .min_by(|x, y| x.partial_cmp(y).unwrap())
            })
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        steps.extend(worst);
    }
    let threshold = 5.0 * median(steps);
    let relaxed = RELAXED_LINK * window.size();

    let mut ambiguous = 0;
    let succ: Vec<Vec<Option<usize>>> = (0..slices)
        .map(|j| {
            link(
                &sets[j].zeros,
                &sets[(j + 1) % slices].zeros,
                threshold,
                relaxed,
                &mut ambiguous,
            )
        })
        .collect();
    let mut has_pred: Vec<Vec<bool>> = sets.iter().map(|s| vec![false; s.zeros.len()]).collect();
    for j in 0..slices {
        for k in succ[j].iter().flatten() {
            has_pred[(j + 1) % slices][*k] = true;
        }
    }

    let mut visited: Vec<Vec<bool>> = sets.iter().map(|s| vec![false; s.zeros.len()]).collect();
    let point = |j: usize, i: usize| {
        let p = sets[j].zeros[i];
        CurvePoint {
            slice: j,
            r: p.r,
            phi: sets[j].phi,
            z: p.z,
        }
    };
    let mut closed = Vec::new();
    let mut open = Vec::new();
    // open chains first, from points without a predecessor
    for j0 in 0..slices {
        for i0 in 0..sets[j0].zeros.len() {
            if has_pred[j0][i0] || visited[j0][i0] {
                continue;
            }
            let mut points = Vec::new();
            let (mut j, mut i) = (j0, i0);
            loop {
                visited[j][i] = true;
                points.push(point(j, i));
                match succ[j][i] {
                    Some(k) if !visited[(j + 1) % slices][k] => {
                        i = k;
                        j = (j + 1) % slices;
                    }
                    _ => break,
                }
            }
            let winding = points.len() / slices;
            open.push(NodalCurve {
                points,
                closed: false,
                winding,
                slices,
            });
        }
    }
    // everything left lies on cycles; start them on slice 0 when possible
    for j0 in 0..slices {
        for i0 in 0..sets[j0].zeros.len() {
            if visited[j0][i0] {
                continue;
            }
            let mut points = Vec::new();
            let (mut j, mut i) = (j0, i0);
            let mut is_cycle = false;
            loop {
                visited[j][i] = true;
                points.push(point(j, i));
                match succ[j][i] {
                    Some(k) => {
                        let jn = (j + 1) % slices;
                        if jn == j0 && k == i0 {
                            is_cycle = true;
                            break;
                        }
                        if visited[jn][k] {
                            break;
                        }
                        i = k;
                        j = jn;
                    }
                    None => break,
                }
            }
            let winding = points.len() / slices;
            let curve = NodalCurve {
                points,
                closed: is_cycle,
                winding,
                slices,
            };
            if is_cycle {
                closed.push(curve);
            } else {
                open.push(curve);
            }
        }
    }
    if ambiguous > 0 {
        warn!("{ambiguous} links chosen between near-equidistant candidates");
    }
    Ok(TraceResult {
        closed,
        open,
        slices,
        grid,
        window: *window,
        ambiguous_links: ambiguous,
        newton_failures,
        count_varies,
        link_threshold: threshold,
    })
}

/// Trace the nodal set on `slices` half-planes `φ_j = 2πj/slices`.
///
/// `min_slices` is usually `8ℓ`. When the zero count differs between
/// slices the grid is doubled, at most twice.
pub fn trace_nodal_curves(
    field: &dyn ParaxialField,
    slices: usize,
    window: &Window,
    grid: usize,
    min_slices: usize,
) -> Result<TraceResult, TraceError> {
    if slices < min_slices.max(1) {
        return Err(TraceError::TooFewSlices {
            slices,
            min: min_slices.max(1),
        });
    }
    let mut result = trace_once(field, slices, window, grid)?;
    let mut g = grid;
    for _ in 0..MAX_REFINEMENTS {
        if !result.count_varies || leaves_window(&result) {
            break;
        }
        g *= 2;
        debug!("zero count varies between slices, refining grid to {g}");
        result = trace_once(field, slices, window, g)?;
    }
    if result.count_varies {
        warn!("zero count varies between slices (tangency or window crossing)");
    }
    Ok(result)
}

/// Whether an open chain ends next to the window edge; a finer grid cannot
/// mend a curve that leaves the window.
fn leaves_window(result: &TraceResult) -> bool {
    let w = &result.window;
    let dr = 2.0 * (w.r_max - w.r_min) / result.grid as f64;
    let dz = 2.0 * (w.z_max - w.z_min) / result.grid as f64;
    let near = |p: &CurvePoint| {
        p.r < w.r_min + dr || p.r > w.r_max - dr || p.z < w.z_min + dz || p.z > w.z_max - dz
    };
    result
        .open
        .iter()
        .any(|c| c.points.first().is_some_and(near) || c.points.last().is_some_and(near))
}

/// The closed curve with `expected` points per slice and axis winding
/// `expected`, closest to its own core circle when several qualify.
pub fn select_component(curves: &[NodalCurve], expected: usize) -> Result<&NodalCurve, TraceError> {
    curves
        .iter()
        .filter(|c| c.closed && c.winding == expected && c.strands() == Some(expected))
        .min_by(|a, b| a.core_distance().partial_cmp(&b.core_distance()).unwrap())
        .ok_or(TraceError::NoComponent {
            expected,
            found: curves.len(),
        })
}
