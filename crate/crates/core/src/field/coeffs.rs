//! Cylindrical coefficients `c_{n,l}` of `F(R, φ, 0) = Σ c_{n,l} R^n e^{ilφ}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldError, SemiholomorphicPoly};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    entries: BTreeMap<(u32, i32), Complex64>,
}

impl CoefficientField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `c` to the entry `(n, l)`.
    pub fn add(&mut self, n: u32, l: i32, c: Complex64) -> Result<(), FieldError> {
        if l.unsigned_abs() > n {
            return Err(FieldError::OutOfRange { n, l });
        }
        if (n as i64 - l as i64) % 2 != 0 {
            return Err(FieldError::Parity { n, l });
        }
        *self.entries.entry((n, l)).or_default() += c;
        Ok(())
    }

    pub fn from_entries<I: IntoIterator<Item = (u32, i32, Complex64)>>(
        entries: I,
    ) -> Result<Self, FieldError> {
        let mut out = Self::new();
        for (n, l, c) in entries {
            out.add(n, l, c)?;
        }
        Ok(out)
    }

    pub fn get(&self, n: u32, l: i32) -> Complex64 {
        self.entries.get(&(n, l)).copied().unwrap_or_default()
    }

    /// `(n, l, c)` ordered by `n`, then `l`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, i32, Complex64)> + '_ {
        self.entries.iter().map(|(&(n, l), &c)| (n, l, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_max(&self) -> u32 {
        self.entries.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// `Σ c_{n,l} R^n e^{ilφ}`.
    pub fn eval_z0(&self, r: f64, phi: f64) -> Complex64 {
        self.iter()
            .map(|(n, l, c)| c * r.powi(n as i32) * Complex64::from_polar(1.0, l as f64 * phi))
            .sum()
    }

    /// One `n l re im` row per entry.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# n l re im\n");
        for (n, l, c) in self.iter() {
            writeln!(out, "{n} {l} {:e} {:e}", c.re, c.im).unwrap();
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self, FieldError> {
        let mut out = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| FieldError::Parse { line: i + 1, msg };
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 4 {
                return Err(err(format!("expected 4 columns, found {}", cols.len())));
            }
            let n: u32 = cols[0].parse().map_err(|e| err(format!("n: {e}")))?;
            let l: i32 = cols[1].parse().map_err(|e| err(format!("l: {e}")))?;
            let re: f64 = cols[2].parse().map_err(|e| err(format!("re: {e}")))?;
            let im: f64 = cols[3].parse().map_err(|e| err(format!("im: {e}")))?;
            out.add(n, l, Complex64::new(re, im))
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(out)
    }
}

fn binomials(n: u32) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// `(x - 1)^p (x + 1)^q` as ascending coefficients in `x`.
fn shifted_product(p: u32, q: u32) -> Vec<f64> {
    let bp = binomials(p);
    let bq = binomials(q);
    let mut out = vec![0.0; (p + q + 1) as usize];
    for (i, &a) in bp.iter().enumerate() {
        let sign = if (p as usize - i) % 2 == 0 { 1.0 } else { -1.0 };
        for (j, &b) in bq.iter().enumerate() {
            out[i + j] += sign * a * b;
        }
    }
    out
}

/// Expand `(R² + 1)^k f` on `z = 0`, with `k` the total degree of `f`.
///
/// `u^i v^j v̄^m` contributes `(R² - 1)^i (2R)^{j+m} (R² + 1)^{k-i-j-m} e^{i(j-m)φ}`.
pub fn restrict_z0_cylindrical(f: &SemiholomorphicPoly) -> Result<CoefficientField, FieldError> {
    if f.is_zero() {
        return Err(FieldError::Zero);
    }
    let k = f.degree();
    let mut out = CoefficientField::new();
    let mut cache: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    for ((i, j, m), c) in f.terms() {
        let e = j + m;
        let radial = cache
            .entry((i, e))
            .or_insert_with(|| shifted_product(i, k - i - e));
        let l = j as i32 - m as i32;
        let front = c * 2f64.powi(e as i32);
        for (p, &b) in radial.iter().enumerate() {
            if b != 0.0 {
                out.add(2 * p as u32 + e, l, front * b)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{BasePolynomial, TrigLoop};
    use crate::field::{build_semiholomorphic, eval_F};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_monomials() {
        let u = SemiholomorphicPoly::from_terms([((1, 0, 0), c(1.0, 0.0))], 1.0);
        let cu = restrict_z0_cylindrical(&u).unwrap();
        assert_eq!(cu.get(0, 0), c(-1.0, 0.0));
        assert_eq!(cu.get(2, 0), c(1.0, 0.0));
        assert_eq!(cu.len(), 2);

        let v = SemiholomorphicPoly::from_terms([((0, 1, 0), c(1.0, 0.0))], 1.0);
        let cv = restrict_z0_cylindrical(&v).unwrap();
        assert_eq!(cv.get(1, 1), c(2.0, 0.0));
        assert_eq!(cv.len(), 1);
    }

    #[test]
    fn rejects_bad_entries() {
        let mut f = CoefficientField::new();
        assert!(matches!(
            f.add(3, 0, c(1.0, 0.0)),
            Err(FieldError::Parity { .. })
        ));
        assert!(matches!(
            f.add(1, -3, c(1.0, 0.0)),
            Err(FieldError::OutOfRange { .. })
        ));
        assert!(restrict_z0_cylindrical(&SemiholomorphicPoly::from_terms([], 1.0)).is_err());
    }

    #[test]
    fn table_round_trip() {
        let f = CoefficientField::from_entries([
            (0, 0, c(-1.5, 0.25)),
            (3, -1, c(1e-17, -3.0)),
            (2, 2, c(0.1, 0.2)),
        ])
        .unwrap();
        let back = CoefficientField::from_table(&f.to_table()).unwrap();
        assert_eq!(f, back);
        assert!(CoefficientField::from_table("1 0 1 0").is_err());
        assert!(CoefficientField::from_table("0 0 x 0").is_err());
    }

    #[test]
    fn matches_direct_evaluation() {
        let p = BasePolynomial::new(&[-1.4, 0.0, 1.4]).unwrap();
        let trig = TrigLoop::from_coeffs(vec![
            c(0.1, -0.2),
            c(0.3, 0.1),
            c(-0.2, 0.05),
            c(0.4, 0.0),
            c(0.02, 0.3),
        ])
        .unwrap();
        let f = build_semiholomorphic(&p, &trig, 0.3).unwrap();
        let cf = restrict_z0_cylindrical(&f).unwrap();
        assert_eq!(cf.n_max(), 2 * f.degree());
        for k in 0..50 {
            let r = 0.04 * k as f64;
            let phi = 0.37 * k as f64;
            let want = eval_F(&f, r * phi.cos(), r * phi.sin(), 0.0);
            let got = cf.eval_z0(r, phi);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "r={r}");
        }
    }
}
