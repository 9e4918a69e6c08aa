//! Laguerre polynomials and the basis beams `P_{n,l}` and `Q_{n,l}`.

use num_complex::Complex64;
use num_traits::Num;

use super::BeamError;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Generalised Laguerre `L_{d,α}(x)` by the three-term recurrence.
pub fn laguerre<T>(d: i32, alpha: i32, x: T) -> Result<T, BeamError>
where
    T: Num + Copy + From<f64>,
{
    if d < 0 || alpha < 0 {
        return Err(BeamError::NegativeIndex { d, alpha });
    }
    let c = |v: f64| T::from(v);
    let mut prev = c(1.0);
    if d == 0 {
        return Ok(prev);
    }
    let mut cur = c(1.0 + alpha as f64) - x;
    for k in 1..d {
        let kf = k as f64;
        let next = ((c(2.0 * kf + 1.0 + alpha as f64) - x) * cur - c(kf + alpha as f64) * prev)
            / c(kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `(|l|, d)` for a valid mode, `d = (n - |l|)/2`.
pub(crate) fn mode_indices(n: i32, l: i32) -> Result<(u32, u32), BeamError> {
    let alpha = l.abs();
    if n < alpha {
        return Err(BeamError::OutOfRange { n, l });
    }
    if (n - alpha) % 2 != 0 {
        return Err(BeamError::Parity { n, l });
    }
    Ok((alpha as u32, ((n - alpha) / 2) as u32))
}

/// Weight of `X^{|l|+2i} (2iZ)^{d-i}` in `P_{n,l}`: `d! C(d+|l|, d-i) / i!`.
pub(crate) fn p_weight(alpha: u32, d: u32, i: u32) -> f64 {
    factorial(d) * binomial(d + alpha, d - i) / factorial(i)
}

/// `P_{n,l}` without the phase, at possibly complex `(X, Z)`.
pub(crate) fn p_radial(alpha: u32, d: u32, x: Complex64, z: Complex64) -> Complex64 {
    let x2 = x * x;
    let two_iz = 2.0 * I * z;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=d {
        sum += p_weight(alpha, d, i) * x2.powu(i) * two_iz.powu(d - i);
    }
    sum * x.powu(alpha)
}

/// The polynomial beam equal to `R^n e^{ilφ}` on `z = 0`.
pub fn p_beam(n: i32, l: i32, r: f64, phi: f64, z: f64) -> Result<Complex64, BeamError> {
    let (alpha, d) = mode_indices(n, l)?;
    let phase = Complex64::from_polar(1.0, l as f64 * phi);
    Ok(phase * p_radial(alpha, d, r.into(), z.into()))
}

fn check_width(w: f64) -> Result<(), BeamError> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(BeamError::InvalidWidth(w))
    }
}

/// Unit-width Laguerre-Gaussian mode of radial order `p`.
fn lg_mode(p: u32, alpha: u32, l: i32, r: f64, phi: f64, z: f64) -> Complex64 {
    let q = Complex64::new(1.0, z);
    let lag =
        laguerre(p as i32, alpha as i32, r * r / (1.0 + z * z)).expect("indices are nonnegative");
    Complex64::from_polar(r.powi(alpha as i32), l as f64 * phi) * q.conj().powu(p)
        / q.powu(p + alpha + 1)
        * (-r * r / (2.0 * q)).exp()
        * lag
}

/// `Q_{n,l}` as a sum of Laguerre-Gaussian modes, expanding
/// `x^d = d! Σ_i (-1)^i C(d+|l|, d-i) L_{i,|l|}(x)` and propagating each mode.
///
/// The alternating sum cancels heavily as `n` grows; [`q_beam`] evaluates the
/// same beam without cancellation.
pub fn q_beam_lg_sum(
    n: i32,
    l: i32,
    r: f64,
    phi: f64,
    z: f64,
    w: f64,
) -> Result<Complex64, BeamError> {
    let (alpha, d) = mode_indices(n, l)?;
    check_width(w)?;
    let (r, z) = (r / w, z / (w * w));
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=d {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(d + alpha, d - i) * lg_mode(i, alpha, l, r, phi, z);
    }
    Ok(sum * factorial(d))
}

/// The Gaussian beam equal to `e^{-R²/(2w²)} (R/w)^n e^{ilφ}` on `z = 0`, by
/// the Appell transform `q⁻¹ e^{-R²/(2q)} P(R/q, φ, z/q)`, `q = 1 + iz`, in
/// unit-width coordinates.
pub fn q_beam(n: i32, l: i32, r: f64, phi: f64, z: f64, w: f64) -> Result<Complex64, BeamError> {
    let (alpha, d) = mode_indices(n, l)?;
    check_width(w)?;
    let (r, z) = (r / w, z / (w * w));
    let q = Complex64::new(1.0, z);
    let phase = Complex64::from_polar(1.0, l as f64 * phi);
    Ok(phase * (-r * r / (2.0 * q)).exp() / q * p_radial(alpha, d, r / q, z / q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3, 1.7f64).unwrap(), 1.0);
        assert_eq!(laguerre(1, 2, 3.0f64).unwrap(), 0.0);
        assert!((laguerre(2, 0, 2.0f64).unwrap() + 1.0).abs() < 1e-15);
        assert!(laguerre(-1, 0, 1.0f64).is_err());
        assert!(laguerre(1, -1, 1.0f64).is_err());
        // L_{3,1}(x) = (-x³ + 12x² - 36x + 24)/6
        let x = 0.8f64;
        let want = (-x * x * x + 12.0 * x * x - 36.0 * x + 24.0) / 6.0;
        assert!((laguerre(3, 1, x).unwrap() - want).abs() < 1e-14);
        let zc = laguerre(3, 1, Complex64::new(x, 0.0)).unwrap();
        assert!((zc.re - want).abs() < 1e-14 && zc.im == 0.0);
    }

    #[test]
    fn low_order_p_beams() {
        let p00 = p_beam(0, 0, 1.3, 0.2, -0.7).unwrap();
        assert_eq!(p00, Complex64::new(1.0, 0.0));
        let (r, z) = (0.9, 0.4);
        let p20 = p_beam(2, 0, r, 1.0, z).unwrap();
        assert!((p20 - Complex64::new(r * r, 2.0 * z)).norm() < 1e-15);
        assert!(matches!(
            p_beam(3, 0, 1.0, 0.0, 0.0),
            Err(BeamError::Parity { .. })
        ));
        assert!(matches!(
            p_beam(1, 3, 1.0, 0.0, 0.0),
            Err(BeamError::OutOfRange { .. })
        ));
    }

    #[test]
    fn q_restriction_and_width() {
        let q = q_beam(0, 0, 1.1, 0.0, 0.0, 1.0).unwrap();
        assert!((q.re - (-0.605f64).exp()).abs() < 1e-15);
        assert!(q_beam(0, 0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(q_beam_lg_sum(2, 0, 1.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn two_routes_agree() {
        for (n, l) in [(0, 0), (2, 0), (3, -1), (4, 2), (6, 0), (7, 3), (10, -4)] {
            for &(r, phi, z) in &[(0.3, 0.1, 0.5), (1.7, 2.0, -0.8), (2.5, -1.0, 1.9)] {
                let a = q_beam_lg_sum(n, l, r, phi, z, 0.7).unwrap();
                let b = q_beam(n, l, r, phi, z, 0.7).unwrap();
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300), "{n},{l}");
            }
        }
    }
}
