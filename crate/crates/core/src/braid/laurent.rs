//! Integer Laurent polynomials in one variable `t`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A Laurent polynomial `Σ c_e t^e` with integer coefficients.
///
/// Zero coefficients are never stored and exponents are kept sorted, so two
/// polynomials are equal exactly when their term maps are equal.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `coeff · t^exp`.
    pub fn monomial(coeff: i64, exp: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, i64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exp: i32, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i32) -> i64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// Coefficient of the highest power.
    pub fn leading_coeff(&self) -> i64 {
        self.terms.values().next_back().copied().unwrap_or(0)
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect(),
        }
    }

    /// Substitute `t -> t^{-1}`.
    pub fn mirror(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&e, &c)| (-e, c)).collect(),
        }
    }

    /// Substitute `t -> t^k` (k may be negative).
    pub fn substitute_power(&self, k: i32) -> Self {
        assert!(k != 0, "substitution t -> t^0 collapses the polynomial");
        Self::from_terms(self.terms.iter().map(|(&e, &c)| (e * k, c)))
    }

    /// Divide every exponent by `k`, returning `None` unless all are multiples.
    pub fn compress_exponents(&self, k: i32) -> Option<Self> {
        if self.terms.keys().any(|e| e % k != 0) {
            return None;
        }
        Some(Self {
            terms: self.terms.iter().map(|(&e, &c)| (e / k, c)).collect(),
        })
    }

    /// Sum of the coefficients, i.e. the value at `t = 1`.
    pub fn eval_at_one(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|(&e, &c)| c as f64 * t.powi(e)).sum()
    }

    /// True when `p(t) = p(t^{-1})`.
    pub fn is_symmetric(&self) -> bool {
        *self == self.mirror()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact division, `None` if `divisor` does not divide `self` in `Z[t, t^-1]`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let d_lead_exp = divisor.max_exp().unwrap();
        let d_lead = divisor.leading_coeff();
        let d_low = divisor.min_exp().unwrap();
        let mut rem = self.clone();
        let mut quot = Self::zero();
        // Long division from the top; no quotient term can sit below the
        // dividend's lowest power minus the divisor's.
        let floor = self.min_exp().unwrap() - d_low;
        while let Some(top) = rem.max_exp() {
            let c = rem.leading_coeff();
            if c % d_lead != 0 {
                return None;
            }
            let e = top - d_lead_exp;
            if e < floor {
                return None;
            }
            let q = Self::monomial(c / d_lead, e);
            rem = &rem - &(&q * divisor);
            quot = &quot + &q;
        }
        Some(quot)
    }

    /// Exponent/coefficient pairs for reports.
    pub fn to_pairs(&self) -> Vec<(i32, i64)> {
        self.terms().collect()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, &c)| (e, -c)).collect(),
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, &c) in self.terms.iter().rev() {
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match e {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1 {
                        write!(f, "{a}")?;
                    }
                    if e == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(i32, i64)>::deserialize(d)?;
        Ok(Self::from_terms(pairs))
    }
}
