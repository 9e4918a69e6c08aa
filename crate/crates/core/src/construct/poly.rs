//! Real base polynomials and a simultaneous root finder.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ConstructError;

/// Evaluate `Σ c_i x^i` and its derivative at `x` (Horner).
pub fn horner<T>(coeffs: &[T], x: Complex64) -> (Complex64, Complex64)
where
    T: Copy + Into<Complex64>,
{
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c.into();
    }
    (p, dp)
}

fn horner_real(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

const ABERTH_MAX_ITER: usize = 500;

/// All roots of `Σ coeffs[i] u^i` by Aberth-Ehrlich iteration.
///
/// `seed`, if given, must hold one starting value per root; the returned
/// roots are in the same order as the seeds they converged from.
pub fn aberth(
    coeffs: &[Complex64],
    seed: Option<&[Complex64]>,
) -> Result<Vec<Complex64>, ConstructError> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() == 0.0 {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();

    let mut z: Vec<Complex64> = match seed {
        Some(s) if s.len() == n => s.to_vec(),
        _ => {
            // Fujiwara-type radius, rotated so no seed sits on the real axis
            let r = (0..n)
                .map(|i| monic[i].norm().powf(1.0 / (n - i) as f64))
                .fold(0.0f64, f64::max)
                .max(1e-3);
            (0..n)
                .map(|k| {
                    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4)
                })
                .collect()
        }
    };

    let mut converged = false;
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                return Err(ConstructError::RootFinder {
                    detail: "non-finite Aberth step".into(),
                });
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // accept if the residuals are already tiny
        let scale: f64 = monic.iter().map(|c| c.norm()).sum();
        let worst = z
            .iter()
            .map(|&r| horner(&monic, r).0.norm() / (scale * (1.0 + r.norm()).powi(n as i32)))
            .fold(0.0, f64::max);
        if worst > 1e-12 {
            return Err(ConstructError::RootFinder {
                detail: format!("Aberth did not converge (relative residual {worst:.2e})"),
            });
        }
    }
    Ok(z)
}

/// `p(u) = ∏ (u - z_j)` with distinct real roots, one of them zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePolynomial {
    roots: Vec<f64>,
    coeffs: Vec<f64>,
    critical_points: Vec<f64>,
    critical_values: Vec<f64>,
}

impl BasePolynomial {
    pub fn new(roots: &[f64]) -> Result<Self, ConstructError> {
        if roots.is_empty() {
            return Err(ConstructError::InvalidPolynomial("no roots".into()));
        }
        let mut sorted = roots.to_vec();
        if sorted.iter().any(|r| !r.is_finite()) {
            return Err(ConstructError::InvalidPolynomial("non-finite root".into()));
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in sorted.windows(2) {
            if w[1] - w[0] < 1e-9 {
                return Err(ConstructError::InvalidPolynomial(format!(
                    "repeated root {}",
                    w[0]
                )));
            }
        }
        if !sorted.iter().any(|r| r.abs() < 1e-12) {
            return Err(ConstructError::InvalidPolynomial(
                "zero must be a root".into(),
            ));
        }
        let mut coeffs = vec![1.0];
        for &r in &sorted {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            coeffs = next;
        }
        let mut p = Self {
            roots: sorted,
            coeffs,
            critical_points: Vec::new(),
            critical_values: Vec::new(),
        };
        let (c, v) = p.solve_critical()?;
        p.critical_points = c;
        p.critical_values = v;
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    /// Roots in ascending order.
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Coefficients in ascending powers of `u`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.critical_points
    }

    pub fn critical_values(&self) -> &[f64] {
        &self.critical_values
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        horner(&self.coeffs, u).0
    }

    pub fn eval_real(&self, u: f64) -> f64 {
        horner_real(&self.coeffs, u).0
    }

    fn derivative_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as f64 * c)
            .collect()
    }

    fn solve_critical(&self) -> Result<(Vec<f64>, Vec<f64>), ConstructError> {
        let s = self.degree();
        if s < 2 {
            return Ok((Vec::new(), Vec::new()));
        }
        let dp = self.derivative_coeffs();
        let dpc: Vec<Complex64> = dp.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let mut guesses: Vec<f64> = match aberth(&dpc, None) {
            Ok(z) if z.iter().all(|r| r.im.abs() < 1e-8) => z.iter().map(|r| r.re).collect(),
            _ => Vec::new(),
        };
        guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut points = Vec::with_capacity(s - 1);
        for j in 0..s - 1 {
            let (lo, hi) = (self.roots[j], self.roots[j + 1]);
            let start = guesses.get(j).copied().filter(|g| *g > lo && *g < hi);
            let c = match start.and_then(|g| polish_real(&dp, g, lo, hi)) {
                Some(c) => c,
                None => bisect(&dp, lo, hi).ok_or_else(|| ConstructError::RootFinder {
                    detail: format!("no sign change of p' on ({lo}, {hi})"),
                })?,
            };
            let scale: f64 = dp
                .iter()
                .enumerate()
                .map(|(i, a)| a.abs() * c.abs().max(1.0).powi(i as i32))
                .sum();
            let resid = horner_real(&dp, c).0.abs();
            if resid > 1e-12 * scale {
                return Err(ConstructError::RootFinder {
                    detail: format!("critical point {c} has residual {resid:.2e}"),
                });
            }
            points.push(c);
        }
        let values: Vec<f64> = points.iter().map(|&c| self.eval_real(c)).collect();
        let vscale = values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if (values[i] - values[j]).abs() < 1e-9 * vscale {
                    return Err(ConstructError::RepeatedCriticalValue { value: values[i] });
                }
            }
        }
        Ok((points, values))
    }
}

fn polish_real(dp: &[f64], mut x: f64, lo: f64, hi: f64) -> Option<f64> {
    let d2: Vec<f64> = dp
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect();
    for _ in 0..50 {
        let f = horner_real(dp, x).0;
        let df = horner_real(&d2, x).0;
        if df == 0.0 {
            return None;
        }
        let step = f / df;
        x -= step;
        if !(x > lo && x < hi) {
            return None;
        }
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    Some(x)
}

fn bisect(f: &[f64], mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = horner_real(f, lo).0;
    let fhi = horner_real(f, hi).0;
    if flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = horner_real(f, mid).0;
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Critical points (ascending) and the corresponding critical values.
pub fn critical_data(p: &BasePolynomial) -> (Vec<f64>, Vec<f64>) {
    (p.critical_points.clone(), p.critical_values.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_vertex() {
        let p = BasePolynomial::new(&[0.0, -1.0]).unwrap();
        let (c, v) = critical_data(&p);
        assert_eq!(c.len(), 1);
        assert!((c[0] + 0.5).abs() < 1e-15);
        assert!((v[0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_roots() {
        assert!(matches!(
            BasePolynomial::new(&[1.0, 2.0]),
            Err(ConstructError::InvalidPolynomial(_))
        ));
        assert!(matches!(
            BasePolynomial::new(&[0.0, 1.0, 1.0]),
            Err(ConstructError::InvalidPolynomial(_))
        ));
        // symmetric about u = 1, so the two outer critical values coincide
        assert!(matches!(
            BasePolynomial::new(&[-1.0, 0.0, 2.0, 3.0]),
            Err(ConstructError::RepeatedCriticalValue { .. })
        ));
    }

    #[test]
    fn aberth_finds_cubic_roots() {
        let c: Vec<Complex64> = [-6.0, 11.0, -6.0, 1.0]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let mut r: Vec<f64> = aberth(&c, None).unwrap().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn aberth_complex_coefficients() {
        // (u - i)(u + 2 - i)
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let a = i;
        let b = Complex64::new(-2.0, 1.0);
        let coeffs = vec![a * b, -(a + b), one];
        let roots = aberth(&coeffs, None).unwrap();
        for want in [a, b] {
            assert!(roots.iter().any(|r| (r - want).norm() < 1e-12));
        }
    }
}
