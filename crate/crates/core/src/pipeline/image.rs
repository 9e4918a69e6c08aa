//! Phase images as binary PPM (P6).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::propagate::ParaxialField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Plane {
    /// `z = 0`, `x, y ∈ [-extent, extent]`.
    Z0 { extent: f64 },
    /// Half-plane at angle `phi`: `R ∈ [0, extent]` across, `z ∈ [-z_extent, z_extent]` down.
    Azimuthal {
        phi: f64,
        extent: f64,
        z_extent: f64,
    },
}

/// Hue for `arg`, red at zero, cycling through green and blue as it grows.
pub fn hue_rgb(arg: f64, value: f64) -> [u8; 3] {
    let h = (arg.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU) * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    let q = |c: f64| (c * value * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Sample grid for `plane` at `width × height`, row-major, top row first.
pub fn sample_plane(
    field: &dyn ParaxialField,
    plane: Plane,
    width: usize,
    height: usize,
) -> Vec<Complex64> {
    let frac = |i: usize, n: usize| {
        if n > 1 {
            i as f64 / (n - 1) as f64
        } else {
            0.5
        }
    };
    match plane {
        Plane::Z0 { extent } => (0..width * height)
            .into_par_iter()
            .map(|k| {
                let (row, col) = (k / width, k % width);
                let x = extent * (2.0 * frac(col, width) - 1.0);
                let y = extent * (1.0 - 2.0 * frac(row, height));
                field.eval(x.hypot(y), y.atan2(x), 0.0)
            })
            .collect(),
        Plane::Azimuthal {
            phi,
            extent,
            z_extent,
        } => {
            let hp = field.half_plane(phi);
            (0..width * height)
                .into_par_iter()
                .map(|k| {
                    let (row, col) = (k / width, k % width);
                    let r = extent * frac(col, width);
                    let z = z_extent * (1.0 - 2.0 * frac(row, height));
                    hp.eval(r, z)
                })
                .collect()
        }
    }
}

/// P6 image of `arg` of the samples. With `brightness`, each pixel is darkened
/// by `|Ψ| / (|Ψ| + m)`, `m` the median modulus.
pub fn encode_phase(
    samples: &[Complex64],
    width: usize,
    height: usize,
    brightness: bool,
) -> Vec<u8> {
    assert_eq!(samples.len(), width * height, "sample count");
    let scale = if brightness {
        let mut m: Vec<f64> = samples
            .iter()
            .map(|s| s.norm())
            .filter(|v| v.is_finite())
            .collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m.get(m.len() / 2)
            .copied()
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    for s in samples {
        let value = if brightness {
            let a = s.norm();
            if a.is_finite() {
                a / (a + scale)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let arg = if s.re == 0.0 && s.im == 0.0 {
            0.0
        } else {
            s.arg()
        };
        out.extend_from_slice(&hue_rgb(arg, value));
    }
    out
}

pub fn phase_slice(
    field: &dyn ParaxialField,
    plane: Plane,
    width: usize,
    height: usize,
    brightness: bool,
) -> Vec<u8> {
    encode_phase(
        &sample_plane(field, plane, width, height),
        width,
        height,
        brightness,
    )
}
