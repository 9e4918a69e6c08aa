//! Curve exports: CSV rows, JSON stats and OBJ polylines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CurvePoint, NodalCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveStats {
    pub id: usize,
    pub closed: bool,
    pub points: usize,
    pub winding: usize,
    pub strands: Option<usize>,
    pub mean_r: f64,
    pub r_range: [f64; 2],
    pub z_range: [f64; 2],
}

impl CurveStats {
    pub fn of(id: usize, c: &NodalCurve) -> Self {
        let fold = |f: fn(&super::CurvePoint) -> f64| {
            c.points
                .iter()
                .map(f)
                .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| {
                    [lo.min(v), hi.max(v)]
                })
        };
        Self {
            id,
            closed: c.closed,
            points: c.points.len(),
            winding: c.winding,
            strands: c.strands(),
            mean_r: c.mean_r(),
            r_range: fold(|p| p.r),
            z_range: fold(|p| p.z),
        }
    }
}

/// `component,slice,R,phi,z` rows.
pub fn curves_csv(curves: &[NodalCurve]) -> String {
    let mut out = String::from("component,slice,R,phi,z\n");
    for (id, c) in curves.iter().enumerate() {
        for p in &c.points {
            writeln!(
                out,
                "{id},{},{:.12e},{:.12e},{:.12e}",
                p.slice, p.r, p.phi, p.z
            )
            .unwrap();
        }
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("curves CSV line {line}: {msg}")]
pub struct CsvError {
    pub line: usize,
    pub msg: String,
}

/// Read rows written by [`curves_csv`]. The slice count is the largest
/// slice index plus one unless given; a component is closed when its slices
/// advance by one (cyclically) all the way round, including last to first.
pub fn parse_curves_csv(text: &str, slices: Option<usize>) -> Result<Vec<NodalCurve>, CsvError> {
    let mut groups: Vec<(usize, Vec<CurvePoint>)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (k == 0 && line.starts_with("component")) {
            continue;
        }
        let err = |msg: String| CsvError { line: k + 1, msg };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(err(format!("expected 5 columns, found {}", cols.len())));
        }
        let int = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| err(format!("{s:?}: {e}")))
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| err(format!("{s:?}: {e}")))
        };
        let id = int(cols[0])?;
        let point = CurvePoint {
            slice: int(cols[1])?,
            r: num(cols[2])?,
            phi: num(cols[3])?,
            z: num(cols[4])?,
        };
        match groups.last_mut() {
            Some((last, pts)) if *last == id => pts.push(point),
            _ => groups.push((id, vec![point])),
        }
    }
    let max_slice = groups
        .iter()
        .flat_map(|(_, p)| p)
        .map(|p| p.slice + 1)
        .max()
        .unwrap_or(0);
    let slices = slices.unwrap_or(max_slice);
    if slices < max_slice {
        return Err(CsvError {
            line: 0,
            msg: format!("slice index {} beyond {slices} slices", max_slice - 1),
        });
    }
    Ok(groups
        .into_iter()
        .map(|(_, points)| {
            let step = |a: &CurvePoint, b: &CurvePoint| b.slice == (a.slice + 1) % slices;
            let wraps = points
                .windows(2)
                .filter(|w| w[1].slice < w[0].slice)
                .count();
            let closed = points.len() % slices == 0
                && points.windows(2).all(|w| step(&w[0], &w[1]))
                && step(&points[points.len() - 1], &points[0]);
            let winding = if closed { points.len() / slices } else { wraps };
            NodalCurve {
                points,
                closed,
                winding,
                slices,
            }
        })
        .collect())
}

pub fn curves_json(curves: &[NodalCurve]) -> serde_json::Value {
    let stats: Vec<CurveStats> = curves
        .iter()
        .enumerate()
        .map(|(i, c)| CurveStats::of(i, c))
        .collect();
    serde_json::json!({ "components": stats })
}

/// Vertices in Cartesian coordinates, one `l` record per curve.
pub fn curves_obj(curves: &[NodalCurve]) -> String {
    let mut out = String::new();
    let mut base = 1;
    for (id, c) in curves.iter().enumerate() {
        writeln!(out, "o component_{id}").unwrap();
        for p in &c.points {
            writeln!(
                out,
                "v {:.9} {:.9} {:.9}",
                p.r * p.phi.cos(),
                p.r * p.phi.sin(),
                p.z
            )
            .unwrap();
        }
        let mut line = String::from("l");
        for k in 0..c.points.len() {
            write!(line, " {}", base + k).unwrap();
        }
        if c.closed && !c.points.is_empty() {
            write!(line, " {base}").unwrap();
        }
        writeln!(out, "{line}").unwrap();
        base += c.points.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> NodalCurve {
        let points = (0..4)
            .map(|j| CurvePoint {
                slice: j,
                r: 1.0,
                phi: j as f64 * std::f64::consts::FRAC_PI_2,
                z: 0.1 * j as f64,
            })
            .collect();
        NodalCurve {
            points,
            closed: true,
            winding: 1,
            slices: 4,
        }
    }

    #[test]
    fn formats() {
        let c = vec![square()];
        let csv = curves_csv(&c);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,0,1.0"));
        let obj = curves_obj(&c);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert!(obj.contains("l 1 2 3 4 1"));
        let back = parse_curves_csv(&csv, None).unwrap();
        assert_eq!(back.len(), 1);
        assert!(back[0].closed && back[0].winding == 1);
        assert!((back[0].points[3].z - c[0].points[3].z).abs() < 1e-12);
        let open = parse_curves_csv(&csv, Some(8)).unwrap();
        assert!(!open[0].closed);
        assert!(parse_curves_csv("0,1,2\n", None).is_err());
        let json = curves_json(&c);
        assert_eq!(json["components"][0]["strands"], 1);
        assert_eq!(json["components"][0]["z_range"][1], 0.30000000000000004);
    }
}
