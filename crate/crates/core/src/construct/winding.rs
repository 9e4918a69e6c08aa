//! Winding of `t ↦ v_j - Γ_trig(t)` about the origin on each letter's interval.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BasePolynomial, ConstructError, TrigLoop};
use crate::braid::{BraidWord, Letter};

/// The path must stay at least this far from the origin.
pub const WINDING_MIN_DISTANCE: f64 = 1e-6;
/// Largest accepted distance of the raw winding from an integer.
pub const WINDING_MAX_DEVIATION: f64 = 0.25;
/// Endpoint tolerance, as a fraction of the smallest critical value.
pub const ENDPOINT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    /// 1-based critical value index.
    pub critical: usize,
    /// 1-based letter interval.
    pub interval: usize,
    pub raw: f64,
    pub winding: i64,
    /// `max |Γ_trig|` at the two interval ends.
    pub endpoint_offset: f64,
    /// Whether the endpoints lie within `ENDPOINT_TOLERANCE · min |v|`.
    pub endpoints_within_tolerance: bool,
}

fn raw_winding(v: f64, trig: &TrigLoop, t0: f64, t1: f64) -> Result<(f64, f64), f64> {
    let mut n = 512usize;
    loop {
        let mut total = 0.0;
        let mut closest = f64::INFINITY;
        let mut prev = Complex64::new(v, 0.0) - trig.eval(t0);
        closest = closest.min(prev.norm());
        let mut coarse = false;
        for k in 1..=n {
            let t = t0 + (t1 - t0) * k as f64 / n as f64;
            let cur = Complex64::new(v, 0.0) - trig.eval(t);
            closest = closest.min(cur.norm());
            let d = (cur / prev).arg();
            if d.abs() > 0.5 {
                coarse = true;
            }
            total += d;
            prev = cur;
        }
        if closest < WINDING_MIN_DISTANCE {
            return Err(closest);
        }
        if !coarse || n >= 1 << 18 {
            return Ok((total / TAU, closest));
        }
        n *= 2;
    }
}

/// Winding number about the origin of `v_j - Γ_trig(t)` for `t` in the k-th
/// of `ell` equal subintervals (`j`, `k` 1-based).
pub fn winding_diagnostic(
    p: &BasePolynomial,
    trig: &TrigLoop,
    ell: usize,
    critical: usize,
    interval: usize,
) -> Result<WindingReport, ConstructError> {
    let values = p.critical_values();
    assert!(
        critical >= 1 && critical <= values.len(),
        "critical index out of range"
    );
    assert!(
        interval >= 1 && interval <= ell,
        "interval index out of range"
    );
    let t0 = TAU * (interval - 1) as f64 / ell as f64;
    let t1 = TAU * interval as f64 / ell as f64;
    let v = values[critical - 1];
    let (raw, _) =
        raw_winding(v, trig, t0, t1).map_err(|distance| ConstructError::WindingUndefined {
            critical,
            interval,
            distance,
        })?;
    let winding = raw.round() as i64;
    if (raw - winding as f64).abs() > WINDING_MAX_DEVIATION {
        return Err(ConstructError::AmbiguousWinding {
            critical,
            interval,
            raw,
        });
    }
    let endpoint_offset = trig.eval(t0).norm().max(trig.eval(t1).norm());
    let vmin = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(WindingReport {
        critical,
        interval,
        raw,
        winding,
        endpoint_offset,
        endpoints_within_tolerance: endpoint_offset <= ENDPOINT_TOLERANCE * vmin,
    })
}

/// All windings, interval by interval, and the word they spell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindingSummary {
    pub reports: Vec<WindingReport>,
    /// Rebuilt word, or `None` if some interval does not have exactly one
    /// nonzero winding of ±1.
    pub word: Option<BraidWord>,
    pub max_deviation: f64,
    pub max_endpoint_offset: f64,
}

pub fn winding_sequence(
    p: &BasePolynomial,
    trig: &TrigLoop,
    ell: usize,
) -> Result<WindingSummary, ConstructError> {
    let ncrit = p.critical_values().len();
    let mut reports = Vec::with_capacity(ell * ncrit);
    let mut letters = Vec::with_capacity(ell);
    let mut consistent = true;
    for k in 1..=ell {
        let mut nonzero = Vec::new();
        for j in 1..=ncrit {
            let r = winding_diagnostic(p, trig, ell, j, k)?;
            if r.winding != 0 {
                nonzero.push((j, r.winding));
            }
            reports.push(r);
        }
        match nonzero.as_slice() {
            [(j, w)] if w.abs() == 1 => letters.push(Letter::new(*j, *w as i8)),
            _ => consistent = false,
        }
    }
    let word = if consistent {
        BraidWord::new(p.degree(), letters).ok()
    } else {
        None
    };
    let max_deviation = reports
        .iter()
        .map(|r| (r.raw - r.winding as f64).abs())
        .fold(0.0, f64::max);
    let max_endpoint_offset = reports
        .iter()
        .map(|r| r.endpoint_offset)
        .fold(0.0, f64::max);
    Ok(WindingSummary {
        reports,
        word,
        max_deviation,
        max_endpoint_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_winds_once() {
        let p = BasePolynomial::new(&[0.0, -1.0]).unwrap();
        let trig = TrigLoop::from_coeffs(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.25, 0.0),
            Complex64::new(0.25, 0.0),
        ])
        .unwrap();
        let r = winding_diagnostic(&p, &trig, 1, 1, 1).unwrap();
        assert_eq!(r.winding, 1);
        assert!((r.raw - 1.0).abs() < 1e-9);
        assert!(r.endpoints_within_tolerance);
    }

    #[test]
    fn path_through_origin_is_rejected() {
        let p = BasePolynomial::new(&[0.0, -1.0]).unwrap();
        let trig = TrigLoop::from_coeffs(vec![Complex64::new(-0.25, 0.0)]).unwrap();
        assert!(matches!(
            winding_diagnostic(&p, &trig, 1, 1, 1),
            Err(ConstructError::WindingUndefined { .. })
        ));
    }
}
