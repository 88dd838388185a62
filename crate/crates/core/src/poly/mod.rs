//! Sparse multivariate polynomials with exact rational coefficients.

mod parse;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

pub use parse::parse_polynomial;

/// A lattice point in `N^n`, used both as monomial exponent and as a point of
/// a Newton polytope. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn zero(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Every coordinate even, i.e. the point lies in `(2N)^n`.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|&e| e % 2 == 0)
    }
}

impl Deref for Exponent {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

impl<const N: usize> From<[u32; N]> for Exponent {
    fn from(v: [u32; N]) -> Self {
        Exponent(v.to_vec())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable index x{index} at position {pos} out of range 1..={nvars}")]
    VariableOutOfRange { pos: usize, index: u64, nvars: usize },
    #[error("non-integer exponent at position {pos}")]
    NonIntegerExponent { pos: usize },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("exponent overflow at position {pos}")]
    ExponentOverflow { pos: usize },
    #[error("number of variables must be positive")]
    ZeroVariables,
    #[error("exponent vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scale factor must be positive")]
    NonpositiveScale,
}

/// Sparse polynomial `sum_alpha f_alpha x^alpha`.
///
/// Stored coefficients are never zero and every exponent has length `nvars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Result<Self, PolyError> {
        if nvars == 0 {
            return Err(PolyError::ZeroVariables);
        }
        Ok(Polynomial {
            nvars,
            terms: BTreeMap::new(),
        })
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, merging like
    /// terms and dropping zeros.
    pub fn from_terms<I, E>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (E, Rational)>,
        E: Into<Exponent>,
    {
        let mut p = Polynomial::zero(nvars)?;
        for (e, c) in terms {
            let e = e.into();
            if e.len() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic) exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> {
        self.terms.keys()
    }

    /// Coefficient of `x^e`, zero if absent.
    pub fn coeff(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant(&self) -> Rational {
        self.coeff(&Exponent::zero(self.nvars))
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    /// Floating point evaluation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| rational_to_f64(c) * monomial_value(e, x))
            .sum()
    }

    /// Coefficient-wise `t * f`.
    pub fn scale(&self, t: &Rational) -> Result<Self, PolyError> {
        if !t.is_positive() {
            return Err(PolyError::NonpositiveScale);
        }
        Ok(Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * t))
                .collect(),
        })
    }

    /// `f + c`.
    pub fn add_constant(&self, c: &Rational) -> Self {
        let mut p = self.clone();
        p.add_term(Exponent::zero(self.nvars), c.clone());
        p
    }

    /// `f + t * g`; both polynomials must have the same number of variables.
    pub fn add_scaled(&self, g: &Polynomial, t: &Rational) -> Result<Self, PolyError> {
        if g.nvars != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: g.nvars,
            });
        }
        let mut p = self.clone();
        for (e, c) in &g.terms {
            p.add_term(e.clone(), c * t);
        }
        Ok(p)
    }

    /// Coefficients converted to `f64`, in canonical order.
    pub fn to_f64_terms(&self) -> Vec<(Exponent, f64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), rational_to_f64(c)))
            .collect()
    }
}

/// `x^e` in floating point.
pub fn monomial_value(e: &[u32], x: &[f64]) -> f64 {
    e.iter()
        .zip(x)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, &xi)| match i32::try_from(k) {
            Ok(k) => xi.powi(k),
            Err(_) => xi.powf(f64::from(k)),
        })
        .product()
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// `ln |r|` without overflow for rationals outside the `f64` range.
pub(crate) fn rational_ln_abs(r: &Rational) -> f64 {
    fn big_ln(n: &num_bigint::BigInt) -> f64 {
        let bits = n.bits();
        if bits <= 1000 {
            n.to_f64().map_or(f64::INFINITY, |v| v.abs().ln())
        } else {
            let shift = bits - 64;
            let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    big_ln(r.numer()) - big_ln(r.denom())
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Polynomial {
    /// Canonical text form, accepted back by [`parse_polynomial`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            let mut factors = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .peekable();
            if factors.peek().is_none() {
                write_rational(f, &abs)?;
                continue;
            }
            if !abs.is_one() {
                write_rational(f, &abs)?;
                write!(f, "*")?;
            }
            let mut first = true;
            for (v, &k) in factors {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                if k == 1 {
                    write!(f, "x{}", v + 1)?;
                } else {
                    write!(f, "x{}^{}", v + 1, k)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ex1() -> Polynomial {
        parse_polynomial("1/4 + x1^8 + x1^2*x2^6 + 4*x1^3*x2^3", 2).unwrap()
    }

    #[test]
    fn evaluate_at_ones() {
        assert!((ex1().evaluate(&[1.0, 1.0]).unwrap() - 6.25).abs() < 1e-15);
    }

    #[test]
    fn evaluate_at_origin_is_constant() {
        let f = ex1();
        assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn motzkin_vanishes_at_ones() {
        let f = parse_polynomial("1/3 + 1/3*x1^4*x2^2 + 1/3*x1^2*x2^4 - x1^2*x2^2", 2).unwrap();
        assert!(f.evaluate(&[1.0, 1.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        assert!(matches!(
            ex1().evaluate(&[1.0]),
            Err(PolyError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn scale_by_four() {
        let g = ex1().scale(&q(4, 1)).unwrap();
        assert_eq!(g.constant(), q(1, 1));
        assert_eq!(g.coeff(&Exponent::from([3, 3])), q(16, 1));
        assert_eq!(ex1().scale(&q(1, 1)).unwrap(), ex1());
    }

    #[test]
    fn scale_rejects_nonpositive() {
        assert_eq!(ex1().scale(&q(0, 1)), Err(PolyError::NonpositiveScale));
        assert_eq!(ex1().scale(&q(-2, 3)), Err(PolyError::NonpositiveScale));
    }

    #[test]
    fn add_constant_zero_is_identity() {
        assert_eq!(ex1().add_constant(&q(0, 1)), ex1());
        let g = ex1().add_constant(&q(-1, 4));
        assert_eq!(g.len(), 3);
        assert!(g.constant().is_zero());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(ex1().to_string(), "1/4 + x1^2*x2^6 + 4*x1^3*x2^3 + x1^8");
        let g = parse_polynomial("-x1 + 2 - 3/6*x2", 2).unwrap();
        assert_eq!(g.to_string(), "2 - 1/2*x2 - x1");
        assert_eq!(Polynomial::zero(2).unwrap().to_string(), "0");
    }

    #[test]
    fn cancellation_removes_term() {
        let mut p = Polynomial::zero(1).unwrap();
        p.add_term(Exponent::from([1]), q(1, 1));
        p.add_term(Exponent::from([0]), q(2, 1));
        p.add_term(Exponent::from([1]), q(-1, 1));
        assert_eq!(p.len(), 1);
        assert_eq!(p.constant(), q(2, 1));
    }
}
