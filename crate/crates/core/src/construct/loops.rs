//! Basic loops around critical values and their concatenation along a braid word.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BasePolynomial, ConstructError};
use crate::braid::BraidWord;

/// `c0 + c1 cos x + c2 sin x + c3 cos 2x + c4 sin 2x` for real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub re: [f64; 5],
    pub im: [f64; 5],
}

impl TrigTerm {
    pub fn eval(&self, x: f64) -> Complex64 {
        let basis = [1.0, x.cos(), x.sin(), (2.0 * x).cos(), (2.0 * x).sin()];
        let dot = |c: &[f64; 5]| c.iter().zip(basis).map(|(a, b)| a * b).sum::<f64>();
        Complex64::new(dot(&self.re), dot(&self.im))
    }

    /// `r (e^{ix} - 1)` scaled by a real factor (negative factors flip the circle).
    pub fn circle(r: f64) -> Self {
        Self {
            re: [-r, r, 0.0, 0.0, 0.0],
            im: [0.0, 0.0, r, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopPiece {
    pub start: f64,
    pub end: f64,
    pub term: TrigTerm,
}

/// A loop `[0, 2π] -> C` based at the origin, given piecewise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicLoop {
    /// Critical value (1-based, ascending critical point) the loop encircles.
    pub index: usize,
    pieces: Vec<LoopPiece>,
}

const WINDING_SAMPLES: usize = 4096;

impl BasicLoop {
    pub fn new(index: usize, pieces: Vec<LoopPiece>) -> Result<Self, ConstructError> {
        let bad = |why: String| ConstructError::InvalidLoop { index, why };
        if index == 0 {
            return Err(bad("index must be at least 1".into()));
        }
        if pieces.is_empty() {
            return Err(bad("no pieces".into()));
        }
        if pieces[0].start.abs() > 1e-12 || (pieces.last().unwrap().end - TAU).abs() > 1e-12 {
            return Err(bad("pieces must cover [0, 2pi]".into()));
        }
        for w in pieces.windows(2) {
            if (w[0].end - w[1].start).abs() > 1e-12 {
                return Err(bad(format!("gap between pieces at {}", w[0].end)));
            }
            let jump = (w[0].term.eval(w[0].end) - w[1].term.eval(w[1].start)).norm();
            if jump > 1e-9 {
                return Err(bad(format!(
                    "discontinuous at {} (jump {jump:.2e})",
                    w[0].end
                )));
            }
        }
        for p in &pieces {
            if p.end <= p.start {
                return Err(bad("empty piece".into()));
            }
        }
        let l = Self { index, pieces };
        if l.eval(0.0).norm() > 1e-12 || l.eval(TAU).norm() > 1e-12 {
            return Err(bad("loop is not based at the origin".into()));
        }
        Ok(l)
    }

    /// A single smooth piece on the whole interval.
    pub fn smooth(index: usize, term: TrigTerm) -> Result<Self, ConstructError> {
        Self::new(
            index,
            vec![LoopPiece {
                start: 0.0,
                end: TAU,
                term,
            }],
        )
    }

    pub fn pieces(&self) -> &[LoopPiece] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let x = x.clamp(0.0, TAU);
        let piece = self
            .pieces
            .iter()
            .find(|p| x <= p.end)
            .unwrap_or_else(|| self.pieces.last().unwrap());
        piece.term.eval(x)
    }

    /// Net number of turns around `point`, from a uniform sampling.
    pub fn winding_about(&self, point: Complex64) -> f64 {
        let n = WINDING_SAMPLES;
        let mut total = 0.0;
        let mut prev = self.eval(0.0) - point;
        for k in 1..=n {
            let cur = self.eval(TAU * k as f64 / n as f64) - point;
            total += (cur / prev).arg();
            prev = cur;
        }
        total / TAU
    }

    /// Winding +1 about `v_index` and 0 about every other critical value.
    pub fn check_against(&self, p: &BasePolynomial) -> Result<(), ConstructError> {
        let values = p.critical_values();
        if self.index > values.len() {
            return Err(ConstructError::InvalidLoop {
                index: self.index,
                why: format!("polynomial has only {} critical values", values.len()),
            });
        }
        for (j, &v) in values.iter().enumerate() {
            let w = self.winding_about(Complex64::new(v, 0.0));
            let want = if j + 1 == self.index { 1.0 } else { 0.0 };
            if (w - want).abs() > 1e-6 {
                return Err(ConstructError::InvalidLoop {
                    index: self.index,
                    why: format!("winding {w:.4} about v_{} (expected {want})", j + 1),
                });
            }
        }
        Ok(())
    }
}

/// The loop `Γ` obtained by running through `γ_{j_k}^{ε_k}` on consecutive
/// subintervals of length `2π/ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLoop {
    word: BraidWord,
    loops: BTreeMap<usize, BasicLoop>,
}

impl PiecewiseLoop {
    pub fn word(&self) -> &BraidWord {
        &self.word
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let ell = self.word.len();
        if ell == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let t = t.rem_euclid(TAU);
        let k = ((t * ell as f64 / TAU).floor() as usize).min(ell - 1);
        let chi = (ell as f64 * t - 2.0 * k as f64 * PI).clamp(0.0, TAU);
        let letter = self.word.letters()[k];
        let chi = if letter.sign > 0 { chi } else { TAU - chi };
        self.loops[&letter.index].eval(chi)
    }
}

pub fn concatenate_loops(
    b: &BraidWord,
    loops: &[BasicLoop],
) -> Result<PiecewiseLoop, ConstructError> {
    let mut map = BTreeMap::new();
    for l in b.letters() {
        let found = loops
            .iter()
            .find(|g| g.index == l.index)
            .ok_or(ConstructError::MissingLoop { index: l.index })?;
        map.insert(l.index, found.clone());
    }
    Ok(PiecewiseLoop {
        word: b.clone(),
        loops: map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_circle() -> BasicLoop {
        BasicLoop::smooth(1, TrigTerm::circle(0.25)).unwrap()
    }

    #[test]
    fn empty_word_gives_zero_loop() {
        let g = concatenate_loops(&BraidWord::trivial(2), &[]).unwrap();
        for k in 0..10 {
            assert_eq!(g.eval(k as f64 * 0.7), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn trefoil_runs_the_circle_three_times() {
        let g =
            concatenate_loops(&BraidWord::from_signed(2, &[1, 1, 1]), &[quarter_circle()]).unwrap();
        let gamma = quarter_circle();
        for k in 0..3 {
            for x in [0.1, 1.0, 3.0, 6.0] {
                let t = (2.0 * PI * k as f64 + x) / 3.0;
                let want = 0.25 * (Complex64::from_polar(1.0, x) - 1.0);
                assert!((g.eval(t) - want).norm() < 1e-12);
                assert!((gamma.eval(x) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_letter_reverses_direction() {
        let g = concatenate_loops(&BraidWord::from_signed(2, &[-1]), &[quarter_circle()]).unwrap();
        let want = 0.25 * (Complex64::from_polar(1.0, TAU - 1.0) - 1.0);
        assert!((g.eval(1.0) - want).norm() < 1e-12);
    }

    #[test]
    fn missing_loop_is_an_error() {
        let b = BraidWord::from_signed(3, &[1, 2]);
        assert_eq!(
            concatenate_loops(&b, &[quarter_circle()]).unwrap_err(),
            ConstructError::MissingLoop { index: 2 }
        );
    }

    #[test]
    fn loop_validation() {
        let p = BasePolynomial::new(&[0.0, -1.0]).unwrap();
        quarter_circle().check_against(&p).unwrap();
        // wrong orientation
        let cw = BasicLoop::smooth(
            1,
            TrigTerm {
                re: [-0.25, 0.25, 0.0, 0.0, 0.0],
                im: [0.0, 0.0, -0.25, 0.0, 0.0],
            },
        )
        .unwrap();
        assert!(cw.check_against(&p).is_err());
        // not based at zero
        assert!(BasicLoop::smooth(
            1,
            TrigTerm {
                re: [1.0, 0.0, 0.0, 0.0, 0.0],
                im: [0.0; 5]
            }
        )
        .is_err());
    }
}
