//! Paraxial propagation of the z = 0 polynomial, `∇⊥²Ψ + 2i ∂Ψ/∂z = 0`.

mod beams;

pub use beams::{laguerre, p_beam, q_beam, q_beam_lg_sum};

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::CoefficientField;
use beams::{mode_indices, p_weight};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("negative Laguerre index (d = {d}, alpha = {alpha})")]
    NegativeIndex { d: i32, alpha: i32 },
    #[error("mode ({n}, {l}): n - l is odd")]
    Parity { n: i32, l: i32 },
    #[error("mode ({n}, {l}): |l| exceeds n")]
    OutOfRange { n: i32, l: i32 },
    #[error("beam width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("radial scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}

/// Compensated sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: Complex64,
    carry: Complex64,
}

impl Kahan {
    fn add(&mut self, x: Complex64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Radial degree from which sums are compensated.
const KAHAN_FROM: usize = 30;

/// A field restricted to the half-plane `φ = const`, as a polynomial in
/// `(X, Z)` where `(X, Z) = (R, z)` for polynomial beams.
#[derive(Debug, Clone)]
pub struct HalfPlane {
    /// `rows[a][b]` multiplies `X^a Z^b`.
    rows: Vec<Vec<Complex64>>,
    envelope: Option<Envelope>,
}

#[derive(Debug, Clone, Copy)]
struct Envelope {
    mu: f64,
    w: f64,
}

impl HalfPlane {
    fn polynomial(&self, x: Complex64, z: Complex64) -> Complex64 {
        let compensate = self.rows.len() > KAHAN_FROM;
        let mut acc = Kahan::default();
        let mut xa = Complex64::new(1.0, 0.0);
        for row in &self.rows {
            if !row.is_empty() {
                let inner = row
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |h, &c| h * z + c);
                if compensate {
                    acc.add(inner * xa);
                } else {
                    acc.sum += inner * xa;
                }
            }
            xa *= x;
        }
        acc.sum
    }

    /// Field value up to a nowhere-vanishing factor; for Gaussian beams the
    /// envelope `q⁻¹ e^{-R²/(2q)}` is left out.
    pub fn reduced(&self, r: f64, z: f64) -> Complex64 {
        match self.envelope {
            None => self.polynomial(r.into(), z.into()),
            Some(Envelope { mu, w }) => {
                let (r, z) = (r / w, z / (w * w));
                let q = Complex64::new(1.0, z);
                self.polynomial(mu * r / q, mu * mu * z / q)
            }
        }
    }

    pub fn eval(&self, r: f64, z: f64) -> Complex64 {
        let core = self.reduced(r, z);
        match self.envelope {
            None => core,
            Some(Envelope { w, .. }) => {
                let (r, z) = (r / w, z / (w * w));
                let q = Complex64::new(1.0, z);
                core * (-r * r / (2.0 * q)).exp() / q
            }
        }
    }
}

/// A solution of the paraxial equation given in cylindrical coordinates.
pub trait ParaxialField: Sync {
    fn half_plane(&self, phi: f64) -> HalfPlane;

    fn eval(&self, r: f64, phi: f64, z: f64) -> Complex64 {
        self.half_plane(phi).eval(r, z)
    }
}

/// `Σ c_{n,l} P_{n,l}` expanded into terms `e^{ilφ} X^a Z^b`.
#[derive(Debug, Clone, Default)]
struct ModeTable {
    terms: BTreeMap<(i32, u32, u32), Complex64>,
    n_max: u32,
}

impl ModeTable {
    fn new(c: &CoefficientField) -> Self {
        let mut terms = BTreeMap::new();
        for (n, l, coeff) in c.iter() {
            let (alpha, d) =
                mode_indices(n as i32, l).expect("coefficient fields hold valid modes");
            for i in 0..=d {
                let b = d - i;
                let w = coeff * p_weight(alpha, d, i) * Complex64::new(0.0, 2.0).powu(b);
                *terms
                    .entry((l, alpha + 2 * i, b))
                    .or_insert(Complex64::new(0.0, 0.0)) += w;
            }
        }
        Self {
            terms,
            n_max: c.n_max(),
        }
    }

    fn half_plane(&self, phi: f64, envelope: Option<Envelope>) -> HalfPlane {
        let mut rows = vec![Vec::new(); self.n_max as usize + 1];
        let mut acc: Vec<Vec<Kahan>> = vec![Vec::new(); self.n_max as usize + 1];
        for (&(l, a, b), &c) in &self.terms {
            let row = &mut acc[a as usize];
            if row.len() <= b as usize {
                row.resize(b as usize + 1, Kahan::default());
            }
            row[b as usize].add(c * Complex64::from_polar(1.0, l as f64 * phi));
        }
        for (row, sums) in rows.iter_mut().zip(acc) {
            *row = sums.into_iter().map(|k| k.sum).collect();
        }
        HalfPlane { rows, envelope }
    }
}

/// `Ψ = Σ c_{n,l} P_{n,l}`.
#[derive(Debug, Clone)]
pub struct PolynomialBeamField {
    coeffs: CoefficientField,
    table: ModeTable,
}

impl PolynomialBeamField {
    pub fn coefficients(&self) -> &CoefficientField {
        &self.coeffs
    }
}

impl ParaxialField for PolynomialBeamField {
    fn half_plane(&self, phi: f64) -> HalfPlane {
        self.table.half_plane(phi, None)
    }
}

/// `Ψ_μ = Σ c_{n,l} μ^n Q_{n,l}(·; w)`.
#[derive(Debug, Clone)]
pub struct GaussianBeamField {
    coeffs: CoefficientField,
    table: ModeTable,
    mu: f64,
    w: f64,
}

impl GaussianBeamField {
    pub fn coefficients(&self) -> &CoefficientField {
        &self.coeffs
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn width(&self) -> f64 {
        self.w
    }
}

impl ParaxialField for GaussianBeamField {
    fn half_plane(&self, phi: f64) -> HalfPlane {
        self.table.half_plane(
            phi,
            Some(Envelope {
                mu: self.mu,
                w: self.w,
            }),
        )
    }
}

pub fn assemble_polynomial_beam(c: &CoefficientField) -> PolynomialBeamField {
    PolynomialBeamField {
        coeffs: c.clone(),
        table: ModeTable::new(c),
    }
}

pub fn assemble_gaussian_beam(
    c: &CoefficientField,
    mu: f64,
    w: f64,
) -> Result<GaussianBeamField, BeamError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(BeamError::InvalidScale(mu));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(BeamError::InvalidWidth(w));
    }
    Ok(GaussianBeamField {
        coeffs: c.clone(),
        table: ModeTable::new(c),
        mu,
        w,
    })
}

/// `|∇⊥²Ψ + 2i ∂Ψ/∂z| / |Ψ|` by eighth-order central differences, step `h`
/// in `x` and `y` and `h²` in `z` (axial scales go as transverse ones squared).
pub fn paraxial_residual<F>(field: F, r: f64, phi: f64, z: f64, h: f64) -> Result<f64, BeamError>
where
    F: Fn(f64, f64, f64) -> Complex64,
{
    if !(h > 0.0) {
        return Err(BeamError::InvalidStep(h));
    }
    let (x, y) = (r * phi.cos(), r * phi.sin());
    let at = |x: f64, y: f64, z: f64| field(x.hypot(y), y.atan2(x), z);
    let centre = at(x, y, z);
    // weights for offsets 1..=4; the stencils are symmetric (D2) or odd (D1)
    const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut lap = centre * (-2.0 * 205.0 / 72.0);
    for (k, w) in D2.iter().enumerate() {
        let d = (k + 1) as f64 * h;
        lap += w * (at(x + d, y, z) + at(x - d, y, z) + at(x, y + d, z) + at(x, y - d, z));
    }
    lap /= h * h;
    let hz = h * h;
    let mut dz = Complex64::new(0.0, 0.0);
    for (k, w) in D1.iter().enumerate() {
        let d = (k + 1) as f64 * hz;
        dz += w * (at(x, y, z + d) - at(x, y, z - d));
    }
    dz /= hz;
    let res = lap + Complex64::new(0.0, 2.0) * dz;
    Ok(res.norm() / (centre.norm() + f64::MIN_POSITIVE))
}
