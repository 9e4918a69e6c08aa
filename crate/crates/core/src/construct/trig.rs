//! Finite Fourier series for the loop `Γ`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BasePolynomial, ConstructError, PiecewiseLoop};

pub const DEFAULT_SAMPLES: usize = 4096;

/// `Σ_{|q| ≤ m} d_q e^{iqt}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigLoop {
    order: usize,
    /// `coeffs[q + m]` is `d_q`.
    coeffs: Vec<Complex64>,
}

impl TrigLoop {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * order + 1],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self, ConstructError> {
        if coeffs.len() % 2 != 1 {
            return Err(ConstructError::InvalidTrigLoop(format!(
                "{} coefficients, need 2m+1",
                coeffs.len()
            )));
        }
        Ok(Self {
            order: coeffs.len() / 2,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, q: i64) -> Complex64 {
        if q.unsigned_abs() as usize > self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(q + self.order as i64) as usize]
    }

    /// `(q, d_q)` for `q = -m..=m`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.order as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - m, c))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.iter()
            .map(|(q, d)| d * Complex64::from_polar(1.0, q as f64 * t))
            .sum()
    }

    /// Replace `d_0` so that the series vanishes at `t = 0`.
    ///
    /// The truncated series does not return to the origin at the basepoint;
    /// moving the constant term restores `Γ_trig(0) = 0` without touching
    /// the oscillating part.
    pub fn pin_basepoint(&self) -> Self {
        let mut out = self.clone();
        let rest: Complex64 = self.iter().filter(|&(q, _)| q != 0).map(|(_, d)| d).sum();
        out.coeffs[self.order] = -rest;
        out
    }
}

/// Discrete Fourier coefficients of `Γ` from `samples` equispaced points.
pub fn fourier_approximate(
    gamma: &PiecewiseLoop,
    order: usize,
    samples: usize,
) -> Result<TrigLoop, ConstructError> {
    if !samples.is_power_of_two() || samples < 8 * order.max(1) {
        return Err(ConstructError::InvalidTrigLoop(format!(
            "need a power-of-two sample count of at least {}, got {samples}",
            8 * order.max(1)
        )));
    }
    let values: Vec<Complex64> = (0..samples)
        .map(|r| gamma.eval(TAU * r as f64 / samples as f64))
        .collect();
    let m = order as i64;
    let coeffs = (-m..=m)
        .map(|q| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(r, &g)| {
                    let angle =
                        -TAU * ((q * r as i64).rem_euclid(samples as i64)) as f64 / samples as f64;
                    g * Complex64::from_polar(1.0, angle)
                })
                .sum();
            sum / samples as f64
        })
        .collect();
    Ok(TrigLoop { order, coeffs })
}

/// `g_t(u) = p(u) - Γ_trig(t)`.
pub fn g_eval(p: &BasePolynomial, trig: &TrigLoop, u: Complex64, t: f64) -> Complex64 {
    p.eval(u) - trig.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::BraidWord;
    use crate::construct::{concatenate_loops, BasicLoop, TrigTerm};

    #[test]
    fn zero_loop_has_zero_coefficients() {
        let g = concatenate_loops(&BraidWord::trivial(2), &[]).unwrap();
        let f = fourier_approximate(&g, 5, 64).unwrap();
        assert!(f.iter().all(|(_, d)| d.norm() == 0.0));
    }

    #[test]
    fn circle_is_its_own_series() {
        let l = BasicLoop::smooth(2, TrigTerm::circle(0.38)).unwrap();
        let g = concatenate_loops(&BraidWord::from_signed(3, &[2]), &[l]).unwrap();
        let f = fourier_approximate(&g, 4, 64).unwrap();
        assert!((f.coeff(0) - Complex64::new(-0.38, 0.0)).norm() < 1e-10);
        assert!((f.coeff(1) - Complex64::new(0.38, 0.0)).norm() < 1e-10);
        for q in [-4, -3, -2, -1, 2, 3, 4] {
            assert!(f.coeff(q).norm() < 1e-10, "q={q}");
        }
    }

    #[test]
    fn sample_count_is_checked() {
        let g = concatenate_loops(&BraidWord::trivial(2), &[]).unwrap();
        assert!(fourier_approximate(&g, 20, 100).is_err());
        assert!(fourier_approximate(&g, 20, 128).is_err());
        assert!(fourier_approximate(&g, 20, 256).is_ok());
    }

    #[test]
    fn pinned_series_vanishes_at_zero() {
        let f = TrigLoop::from_coeffs(vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.0),
            Complex64::new(0.5, -0.1),
        ])
        .unwrap();
        let p = f.pin_basepoint();
        assert!(p.eval(0.0).norm() < 1e-15);
        assert_eq!(p.coeff(1), f.coeff(1));
    }

    #[test]
    fn g_reduces_to_p() {
        let p = BasePolynomial::new(&[0.0, -1.0]).unwrap();
        let zero = TrigLoop::zero(3);
        let u = Complex64::new(0.3, -0.7);
        assert_eq!(g_eval(&p, &zero, u, 1.2), p.eval(u));
        let delta = Complex64::new(0.01, 0.02);
        let mut c = vec![Complex64::new(0.0, 0.0); 3];
        c[1] = delta;
        let shifted = TrigLoop::from_coeffs(c).unwrap();
        assert!((g_eval(&p, &shifted, Complex64::new(-1.0, 0.0), 0.0) + delta).norm() < 1e-15);
    }
}
