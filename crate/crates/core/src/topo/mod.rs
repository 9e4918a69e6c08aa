//! Braid words read off traced nodal curves, and verdicts against the
//! expected knot.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{
    alexander_polynomial, closure_permutation, jones_polynomial, mirror, BraidError, BraidWord,
    LaurentPoly, Letter, Permutation,
};
use crate::trace::{CurvePoint, NodalCurve};

/// Sign of a crossing whose outward-moving strand lies above (larger `z`).
///
/// Fixed once by requiring that the narrow-Gaussian trefoil reads as `σ1³`.
pub const CROSSING_ORIENTATION: i8 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopoError {
    #[error("curve is not closed")]
    NotClosed,
    #[error("curve does not visit every slice the same number of times")]
    IrregularCurve,
    #[error("more than two strands exchange order between slices {slice} and {}", slice + 1)]
    TriplePoint { slice: usize },
    #[error(transparent)]
    Braid(#[from] BraidError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Crossing lies between slices `slice` and `slice + 1`.
    pub slice: usize,
    /// 1-based generator index.
    pub position: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedDiagram {
    pub strands: usize,
    /// Strand labels ordered by `R`, one row per slice.
    pub orders: Vec<Vec<usize>>,
    pub crossings: Vec<Crossing>,
    pub word: BraidWord,
    /// Slice-0 position of each strand to the slice-0 position it reaches after one turn.
    pub permutation: Permutation,
}

/// Strand `w` is the `w`-th turn of the curve, starting at slice 0.
fn turns(curve: &NodalCurve) -> Result<Vec<Vec<CurvePoint>>, TopoError> {
    if !curve.closed {
        return Err(TopoError::NotClosed);
    }
    let n = curve.slices;
    let s = curve.strands().ok_or(TopoError::IrregularCurve)?;
    if s == 0 || curve.points.len() != s * n {
        return Err(TopoError::IrregularCurve);
    }
    let start = curve
        .points
        .iter()
        .position(|p| p.slice == 0)
        .ok_or(TopoError::IrregularCurve)?;
    let pts: Vec<CurvePoint> = curve.points[start..]
        .iter()
        .chain(&curve.points[..start])
        .copied()
        .collect();
    if pts.iter().enumerate().any(|(k, p)| p.slice != k % n) {
        return Err(TopoError::IrregularCurve);
    }
    Ok(pts.chunks(n).map(|c| c.to_vec()).collect())
}

fn by_r(order: &mut [usize], pts: &[CurvePoint]) {
    order.sort_by(|&a, &b| pts[a].r.partial_cmp(&pts[b].r).unwrap());
}

/// Read the braid from the `R`-order of the strands in each slice.
pub fn extract_braid(curve: &NodalCurve) -> Result<ExtractedDiagram, TopoError> {
    let strands = turns(curve)?;
    let s = strands.len();
    let n = curve.slices;
    let at = |j: usize| -> Vec<CurvePoint> {
        if j < n {
            strands.iter().map(|w| w[j]).collect()
        } else {
            // after a full turn strand w continues as turn w + 1
            (0..s).map(|w| strands[(w + 1) % s][0]).collect()
        }
    };

    let mut order: Vec<usize> = (0..s).collect();
    by_r(&mut order, &at(0));
    let first = order.clone();
    let mut orders = vec![order.clone()];
    let mut crossings = Vec::new();
    let mut letters = Vec::new();
    for j in 0..n {
        let (old, new) = (at(j), at(j + 1));
        let mut target = order.clone();
        by_r(&mut target, &new);
        let rank = |o: &[usize], x: usize| o.iter().position(|&y| y == x).unwrap();
        let mut events = Vec::new();
        for i in 0..s {
            for k in i + 1..s {
                let (a, b) = (order[i], order[k]);
                if rank(&target, a) > rank(&target, b) {
                    let before = old[b].r - old[a].r;
                    let after = new[b].r - new[a].r;
                    let lambda = if before - after > 0.0 {
                        (before / (before - after)).clamp(0.0, 1.0)
                    } else {
                        0.5
                    };
                    events.push((lambda, a, b));
                }
            }
        }
        events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut used = vec![false; s];
        for &(lambda, a, b) in &events {
            let pa = rank(&order, a);
            if order.get(pa + 1) != Some(&b) || used[a] || used[b] {
                return Err(TopoError::TriplePoint { slice: j });
            }
            used[a] = true;
            used[b] = true;
            let za = old[a].z + lambda * (new[a].z - old[a].z);
            let zb = old[b].z + lambda * (new[b].z - old[b].z);
            // a moves outward past b
            let sign = if za > zb {
                CROSSING_ORIENTATION
            } else {
                -CROSSING_ORIENTATION
            };
            crossings.push(Crossing {
                slice: j,
                position: pa + 1,
                sign,
            });
            letters.push(Letter::new(pa + 1, sign));
            order.swap(pa, pa + 1);
        }
        orders.push(order.clone());
    }

    // order at slice n, relabelled back to slice-0 turns
    let mut image = vec![0; s];
    let pos0 = |w: usize| first.iter().position(|&x| x == w).unwrap();
    for (pos, &label) in order.iter().enumerate() {
        image[pos0(label)] = pos;
    }
    let permutation = Permutation::from_images(image).expect("order is a permutation");
    let word = BraidWord::new(s, letters)?;
    Ok(ExtractedDiagram {
        strands: s,
        orders,
        crossings,
        word,
        permutation,
    })
}

/// Permutation of slice-0 positions read directly from the curve.
pub fn curve_permutation(curve: &NodalCurve) -> Result<Permutation, TopoError> {
    let strands = turns(curve)?;
    let s = strands.len();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| strands[a][0].r.partial_cmp(&strands[b][0].r).unwrap());
    let pos = |w: usize| order.iter().position(|&x| x == w).unwrap();
    let image = (0..s).map(|p| pos((order[p] + 1) % s)).collect();
    Ok(Permutation::from_images(image).expect("turn shift is a permutation"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    MirrorMatch,
    Mismatch,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Match => "match",
            Verdict::MirrorMatch => "mirror_match",
            Verdict::Mismatch => "mismatch",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub alexander: LaurentPoly,
    /// Exponents in units of `t`.
    pub jones: LaurentPoly,
}

impl Invariants {
    pub fn of(b: &BraidWord) -> Result<Self, TopoError> {
        Ok(Self {
            alexander: alexander_polynomial(b)?,
            jones: jones_polynomial(b)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub verdict: Verdict,
    pub extracted_word: BraidWord,
    pub expected_word: BraidWord,
    pub extracted: Invariants,
    pub expected: Invariants,
    /// Expected knot equals its mirror as far as Jones can tell.
    pub amphichiral: bool,
    pub alexander_agrees: bool,
}

/// Compare the extracted closure with the expected one and its mirror.
///
/// Jones decides, Alexander must agree. Amphichiral knots only ever `match`.
pub fn identify_knot(
    extracted: &BraidWord,
    expected: &BraidWord,
) -> Result<Identification, TopoError> {
    let ext = Invariants::of(extracted)?;
    let exp = Invariants::of(expected)?;
    let mirrored = jones_polynomial(&mirror(expected))?;
    let amphichiral = mirrored == exp.jones;
    let alexander_agrees = ext.alexander == exp.alexander;
    let verdict = if !alexander_agrees {
        Verdict::Mismatch
    } else if ext.jones == exp.jones {
        Verdict::Match
    } else if ext.jones == mirrored {
        Verdict::MirrorMatch
    } else {
        Verdict::Mismatch
    };
    Ok(Identification {
        verdict,
        extracted_word: extracted.clone(),
        expected_word: expected.clone(),
        extracted: ext,
        expected: exp,
        amphichiral,
        alexander_agrees,
    })
}

/// Whether the curve's own strand permutation agrees with the word's.
pub fn permutation_consistent(diagram: &ExtractedDiagram) -> bool {
    closure_permutation(&diagram.word) == diagram.permutation
}
