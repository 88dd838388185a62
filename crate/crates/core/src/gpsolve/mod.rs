//! Geometric programs in standard form
//!
//! ```text
//! minimize p_0(z)  subject to  p_i(z) <= 1,  q_j(z) = 1,  z > 0
//! ```
//!
//! with posynomials `p_i` and monomials `q_j`, solved in log space
//! (`z = e^y`) by a barrier method.

mod barrier;
mod lse;
mod sexpr;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use barrier::solve_gp;
pub use lse::LseFunction;
pub use sexpr::{dump_gp, parse_gp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("nonpositive coordinate z{0}")]
    NonpositiveCoordinate(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// `c * prod_i z_i^{e_i}` with `c > 0`, stored as `ln c` so that coefficients
/// far outside the floating-point range remain representable.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub log_coeff: f64,
    /// Variable id to exponent; zero exponents are not stored.
    pub exponents: BTreeMap<usize, f64>,
}

impl Monomial {
    pub fn from_log<I>(log_coeff: f64, exponents: I) -> Self
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut map = BTreeMap::new();
        for (v, e) in exponents {
            *map.entry(v).or_insert(0.0) += e;
        }
        map.retain(|_, e| *e != 0.0);
        Monomial {
            log_coeff,
            exponents: map,
        }
    }

    /// Panics unless `coeff` is positive and finite.
    pub fn new<I>(coeff: f64, exponents: I) -> Self
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        assert!(coeff > 0.0 && coeff.is_finite(), "monomial coefficient must be positive");
        Monomial::from_log(coeff.ln(), exponents)
    }

    pub fn constant(coeff: f64) -> Self {
        Monomial::new(coeff, [])
    }

    pub fn coeff(&self) -> f64 {
        self.log_coeff.exp()
    }

    /// `ln q(e^y)`.
    pub fn log_value_at_log(&self, y: &[f64]) -> f64 {
        self.log_coeff + self.exponents.iter().map(|(&v, &e)| e * y[v]).sum::<f64>()
    }

    fn max_var(&self) -> Option<usize> {
        self.exponents.keys().next_back().copied()
    }

    fn is_finite(&self) -> bool {
        self.log_coeff.is_finite() && self.exponents.values().all(|e| e.is_finite())
    }
}

/// Nonempty sum of monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Posynomial {
    pub terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Posynomial { terms }
    }

    pub fn single(m: Monomial) -> Self {
        Posynomial { terms: vec![m] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricProgram {
    pub nvars: usize,
    pub objective: Posynomial,
    /// Each entry means `p(z) <= 1`.
    pub inequalities: Vec<Posynomial>,
    /// Each entry means `q(z) = 1`.
    pub equalities: Vec<Monomial>,
}

impl GeometricProgram {
    pub fn validate(&self) -> Result<(), GpError> {
        let check = |m: &Monomial, what: &str| -> Result<(), GpError> {
            if !m.is_finite() {
                return Err(GpError::InvalidProgram(format!("non-finite data in {what}")));
            }
            match m.max_var() {
                Some(v) if v >= self.nvars => Err(GpError::InvalidProgram(format!(
                    "variable z{v} in {what} out of range (nvars = {})",
                    self.nvars
                ))),
                _ => Ok(()),
            }
        };
        if self.objective.terms.is_empty() {
            return Err(GpError::InvalidProgram("empty objective".into()));
        }
        for m in &self.objective.terms {
            check(m, "objective")?;
        }
        for (i, p) in self.inequalities.iter().enumerate() {
            if p.terms.is_empty() {
                return Err(GpError::InvalidProgram(format!("empty constraint {i}")));
            }
            for m in &p.terms {
                check(m, "constraint")?;
            }
        }
        for m in &self.equalities {
            check(m, "equality")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

impl fmt::Display for GpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GpStatus::Optimal => "optimal",
            GpStatus::Infeasible => "infeasible",
            GpStatus::Unbounded => "unbounded",
            GpStatus::MaxIter => "max_iter",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpSolution {
    pub status: GpStatus,
    pub z: Vec<f64>,
    pub objective_value: f64,
    /// Barrier gap `m / t` on the log objective at termination.
    pub duality_gap_estimate: f64,
    /// Newton iterations over both phases.
    pub iterations: usize,
    /// Largest constraint violation `max(p_i(z) - 1, |q_j(z) - 1|, 0)`.
    pub max_violation: f64,
}

/// `c * prod z^e`, evaluated through logarithms.
pub fn eval_monomial(m: &Monomial, z: &[f64]) -> Result<f64, GpError> {
    let mut log = m.log_coeff;
    for (&v, &e) in &m.exponents {
        let zi = *z.get(v).ok_or_else(|| {
            GpError::InvalidProgram(format!("variable z{v} missing from point"))
        })?;
        if !(zi > 0.0) {
            return Err(GpError::NonpositiveCoordinate(v));
        }
        log += e * zi.ln();
    }
    Ok(log.exp())
}

pub fn eval_posynomial(p: &Posynomial, z: &[f64]) -> Result<f64, GpError> {
    if let Some(i) = z.iter().position(|&x| !(x > 0.0)) {
        return Err(GpError::NonpositiveCoordinate(i));
    }
    p.terms.iter().map(|m| eval_monomial(m, z)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_evaluation() {
        let m = Monomial::new(1.0, [(0, -1.0), (1, -2.0)]);
        assert!((eval_monomial(&m, &[2.0, 2.0]).unwrap() - 0.125).abs() < 1e-15);
        let five = Posynomial::single(Monomial::constant(5.0));
        assert!((eval_posynomial(&five, &[0.3, 7.0]).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(
            eval_posynomial(&five, &[1.0, 0.0]),
            Err(GpError::NonpositiveCoordinate(1))
        );
    }

    #[test]
    fn huge_coefficients_in_log_space() {
        // (187/208) * (8^208 / (16^13 * 26^8))^(1/187) at a = (1, 1)
        let log_c = (187.0f64 / 208.0).ln()
            + (208.0 * 8f64.ln() - 13.0 * 16f64.ln() - 8.0 * 26f64.ln()) / 187.0;
        let m = Monomial::from_log(log_c, [(0, -13.0 / 187.0), (1, -8.0 / 187.0)]);
        let v = eval_posynomial(&Posynomial::single(m), &[1.0, 1.0]).unwrap();
        assert!((v - 6.51691844633).abs() < 1e-9, "{v}");
    }

    #[test]
    fn zero_exponents_dropped() {
        let m = Monomial::from_log(0.0, [(0, 1.0), (0, -1.0), (2, 0.0)]);
        assert!(m.exponents.is_empty());
    }

    #[test]
    fn validation() {
        let gp = GeometricProgram {
            nvars: 1,
            objective: Posynomial::single(Monomial::new(1.0, [(1, 1.0)])),
            inequalities: vec![],
            equalities: vec![],
        };
        assert!(gp.validate().is_err());
        let gp = GeometricProgram {
            nvars: 1,
            objective: Posynomial::new(vec![]),
            inequalities: vec![],
            equalities: vec![],
        };
        assert!(gp.validate().is_err());
    }
}
