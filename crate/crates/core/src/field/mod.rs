//! The semiholomorphic polynomial `f(u, v, v̄)`, its stereographic pullback
//! `F(x, y, z)`, and the cylindrical coefficients of `F` on `z = 0`.

mod coeffs;

pub use coeffs::{restrict_z0_cylindrical, CoefficientField};

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{BasePolynomial, TrigLoop};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("scale a = {0} outside (0, 1]")]
    InvalidScale(f64),
    #[error("c[{n},{l}]: n - l is odd")]
    Parity { n: u32, l: i32 },
    #[error("c[{n},{l}]: |l| exceeds n")]
    OutOfRange { n: u32, l: i32 },
    #[error("coefficient table line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("polynomial is zero")]
    Zero,
}

/// Exponents of `u`, `v` and `v̄`.
pub type Monomial = (u32, u32, u32);

/// `f = Σ c · u^i v^j v̄^k`, holomorphic in `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiholomorphicPoly {
    terms: BTreeMap<Monomial, Complex64>,
    scale: f64,
}

impl SemiholomorphicPoly {
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Complex64)>>(terms: I, scale: f64) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Self { terms: map, scale }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, m: Monomial) -> Complex64 {
        self.terms.get(&m).copied().unwrap_or_default()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, the power of `(R² + 1)` that clears denominators in `F`.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|&(i, j, k)| i + j + k)
            .max()
            .unwrap_or(0)
    }

    /// Evaluate with `v̄` as an independent argument.
    pub fn eval3(&self, u: Complex64, v: Complex64, vbar: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(i, j, k), &c)| c * u.powu(i) * v.powu(j) * vbar.powu(k))
            .sum()
    }

    pub fn eval(&self, u: Complex64, v: Complex64) -> Complex64 {
        self.eval3(u, v, v.conj())
    }
}

/// `f(u, v) = a^s (p(u/a) - Γ_trig(v))`, with `e^{iqt}` replaced by `v^q`
/// and `e^{-iqt}` by `v̄^q`.
///
/// For `|v| = 1` the zeros in `u` are the roots of `g_t` scaled by `a`.
pub fn build_semiholomorphic(
    p: &BasePolynomial,
    trig: &TrigLoop,
    a: f64,
) -> Result<SemiholomorphicPoly, FieldError> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(FieldError::InvalidScale(a));
    }
    let s = p.degree() as i32;
    // coefficients of prod (u - a z_j), ascending
    let mut scaled = vec![Complex64::new(1.0, 0.0)];
    for &z in p.roots() {
        let mut next = vec![Complex64::new(0.0, 0.0); scaled.len() + 1];
        for (i, &c) in scaled.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * a * z;
        }
        scaled = next;
    }
    let lead = a.powi(s);
    let mut terms: Vec<(Monomial, Complex64)> = scaled
        .into_iter()
        .enumerate()
        .map(|(i, c)| ((i as u32, 0, 0), c))
        .collect();
    for (q, d) in trig.iter() {
        let m = if q >= 0 {
            (0, q as u32, 0)
        } else {
            (0, 0, (-q) as u32)
        };
        terms.push((m, -d * lead));
    }
    Ok(SemiholomorphicPoly::from_terms(terms, a))
}

/// `(x² + y² + z² + 1)^k f(u, v)` with the inverse stereographic coordinates
/// `u = (r² - 1 + 2iz)/(r² + 1)`, `v = 2(x + iy)/(r² + 1)`.
#[allow(non_snake_case)]
pub fn eval_F(f: &SemiholomorphicPoly, x: f64, y: f64, z: f64) -> Complex64 {
    let rho = x * x + y * y + z * z + 1.0;
    let u = Complex64::new(rho - 2.0, 2.0 * z) / rho;
    let v = Complex64::new(2.0 * x, 2.0 * y) / rho;
    f.eval(u, v) * rho.powi(f.degree() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::track_roots;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unscaled_quadratic() {
        let p = BasePolynomial::new(&[-1.0, 0.0]).unwrap();
        let f = build_semiholomorphic(&p, &TrigLoop::zero(0), 1.0).unwrap();
        let want = SemiholomorphicPoly::from_terms(
            [((2, 0, 0), c(1.0, 0.0)), ((1, 0, 0), c(1.0, 0.0))],
            1.0,
        );
        assert_eq!(f, want);
        assert_eq!(f.degree(), 2);
    }

    #[test]
    fn scale_is_checked() {
        let p = BasePolynomial::new(&[-1.0, 0.0]).unwrap();
        for a in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(build_semiholomorphic(&p, &TrigLoop::zero(0), a).is_err());
        }
    }

    #[test]
    fn origin_of_u() {
        let f = SemiholomorphicPoly::from_terms([((1, 0, 0), c(1.0, 0.0))], 1.0);
        assert_eq!(eval_F(&f, 0.0, 0.0, 0.0), c(-1.0, 0.0));
    }

    #[test]
    fn unit_circle_zeros_are_scaled_roots() {
        let p = BasePolynomial::new(&[0.0, -1.0]).unwrap();
        let trig = TrigLoop::from_coeffs(vec![c(0.0, 0.0), c(-0.25, 0.0), c(0.25, 0.0)]).unwrap();
        let a = 0.2;
        let f = build_semiholomorphic(&p, &trig, a).unwrap();
        let rb = track_roots(&p, &trig, 256, 1).unwrap();
        for k in (0..rb.times.len()).step_by(17) {
            let v = Complex64::from_polar(1.0, rb.times[k]);
            for strand in &rb.strands {
                let u = strand[k] * a;
                assert!(f.eval(u, v).norm() < 1e-12);
            }
        }
    }
}
