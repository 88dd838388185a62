//! Nonnegative circuit polynomials, the coefficient criteria that imply a SONC
//! decomposition, and explicit certificates built from a solved program.

mod circuit;
mod json;

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use circuit::{circuit_nonneg, circuit_number, classify_circuit, CircuitClass, CircuitPolynomial};
pub use json::{CertificateJson, CircuitJson, RemainderJson};

use crate::geometry::SupportProfile;
use crate::mediated::{maximal_mediated_set, MediatedSet};
use crate::poly::{monomial_value, rational_to_f64, Exponent, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("multiplier table does not match the support: {0}")]
    StructureMismatch(String),
    #[error("solution does not satisfy the coefficient criteria: {0}")]
    InfeasibleSolution(String),
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

/// Multipliers `a_{alpha,j}` keyed by `alpha`.
///
/// For [`verify_theorem31`] each vector has one entry per vertex, origin
/// first. For [`verify_theorem32`] and [`certificate_from_gp`] the origin is
/// omitted: entry `j - 1` belongs to vertex `j`, and entries where
/// `lambda_j = 0` are ignored.
pub type MultiplierTable = BTreeMap<Exponent, Vec<f64>>;

/// Relative slack used when checking the criteria in floating point.
pub const CRITERION_TOL: f64 = 1e-8;

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + CRITERION_TOL * lhs.abs().max(rhs.abs()).max(1e-3)
}

fn lambda_f64(profile: &SupportProfile, alpha: &Exponent) -> Vec<f64> {
    profile.lambdas[alpha]
        .iter()
        .map(|l| l.to_f64().unwrap_or(0.0))
        .collect()
}

fn check_table(
    profile: &SupportProfile,
    a: &MultiplierTable,
    width: usize,
) -> Result<(), CertifyError> {
    if a.len() != profile.delta.len() || !profile.delta.iter().all(|d| a.contains_key(d)) {
        return Err(CertifyError::StructureMismatch(
            "keys must be exactly the points of delta".into(),
        ));
    }
    for (alpha, row) in a {
        if row.len() != width {
            return Err(CertifyError::StructureMismatch(format!(
                "row {alpha} has {} entries, expected {width}",
                row.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(CertifyError::StructureMismatch(format!(
                "row {alpha} has a negative or non-finite entry"
            )));
        }
    }
    Ok(())
}

/// `ln prod_{j >= start, lambda_j > 0} (a_j / lambda_j)^lambda_j`, or `-inf` if
/// a needed multiplier is zero.
fn log_weighted_product(lambda: &[f64], a: &[f64], start: usize) -> f64 {
    (start..lambda.len())
        .filter(|&j| lambda[j] > 0.0)
        .map(|j| lambda[j] * (a[j - start].ln() - lambda[j].ln()))
        .sum()
}

/// First criterion: with multipliers on every vertex including the origin,
/// `|f_alpha| <= prod_j (a_{alpha,j}/lambda_j)^lambda_j` for every
/// `alpha` in delta, and `sum_alpha a_{alpha,j} <= f_{alpha(j)}` for every
/// vertex. Together they imply `f` is SONC.
pub fn verify_theorem31(
    profile: &SupportProfile,
    f: &Polynomial,
    a: &MultiplierTable,
) -> Result<bool, CertifyError> {
    let width = profile.vertices.len();
    check_table(profile, a, width)?;
    for (alpha, row) in a {
        let l = lambda_f64(profile, alpha);
        let lhs = rational_to_f64(&f.coeff(alpha)).abs().ln();
        if !leq(lhs, log_weighted_product(&l, row, 0)) {
            return Ok(false);
        }
    }
    for (j, v) in profile.vertices.iter().enumerate() {
        let used: f64 = a.values().map(|row| row[j]).sum();
        if !leq(used, rational_to_f64(&f.coeff(v))) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multiplier on the origin forced by the other multipliers of `alpha`:
/// `lambda_0 |f_alpha|^{1/lambda_0} prod_{j>=1} (lambda_j/a_j)^{lambda_j/lambda_0}`.
/// Zero when `lambda_0 = 0`.
pub fn origin_multiplier(
    profile: &SupportProfile,
    f: &Polynomial,
    alpha: &Exponent,
    a: &[f64],
) -> f64 {
    let l = lambda_f64(profile, alpha);
    let l0 = l[0];
    if l0 <= 0.0 {
        return 0.0;
    }
    let fa = rational_to_f64(&f.coeff(alpha)).abs();
    let log = l0.ln() + fa.ln() / l0 - log_weighted_product(&l, a, 1) / l0;
    log.exp()
}

/// Second criterion: `f - r` is SONC when the top-face circuits are
/// dominated, the vertex budgets hold, and the constant covers the origin
/// multipliers: `f_0 - r >= sum_alpha origin_multiplier(alpha)`.
pub fn verify_theorem32(
    profile: &SupportProfile,
    f: &Polynomial,
    r: f64,
    a: &MultiplierTable,
) -> Result<bool, CertifyError> {
    if !r.is_finite() {
        return Err(CertifyError::StructureMismatch("r is not finite".into()));
    }
    check_table(profile, a, profile.rank())?;
    for alpha in profile.delta_top() {
        let l = lambda_f64(profile, alpha);
        let lhs = rational_to_f64(&f.coeff(alpha)).abs().ln();
        if !leq(lhs, log_weighted_product(&l, &a[alpha], 1)) {
            return Ok(false);
        }
    }
    for j in 1..profile.vertices.len() {
        let used: f64 = a.values().map(|row| row[j - 1]).sum();
        if !leq(used, rational_to_f64(&f.coeff(&profile.vertices[j]))) {
            return Ok(false);
        }
    }
    let needed: f64 = profile
        .delta_lt2d()
        .map(|alpha| origin_multiplier(profile, f, alpha, &a[alpha]))
        .sum();
    if !needed.is_finite() {
        return Ok(false);
    }
    Ok(leq(needed, rational_to_f64(&f.constant()) - r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CircuitStatus {
    NonnegCircuit,
    BinomialSos,
}

impl CircuitStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CircuitStatus::NonnegCircuit => "nonneg-circuit",
            CircuitStatus::BinomialSos => "binomial-SOS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nonneg-circuit" => Some(CircuitStatus::NonnegCircuit),
            "binomial-SOS" => Some(CircuitStatus::BinomialSos),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedCircuit {
    pub circuit: CircuitPolynomial,
    pub status: CircuitStatus,
}

/// Explicit decomposition `f - r = sum_i p_i + sum_k c_k x^{2 m_k}` with
/// nonnegative circuit polynomials `p_i` and nonnegative monomial squares.
#[derive(Clone, Debug, PartialEq)]
pub struct SoncCertificate {
    pub r: f64,
    pub circuits: Vec<CertifiedCircuit>,
    pub remainder: Vec<(Exponent, f64)>,
}

/// Absolute tolerance on reconstructed coefficients.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

impl SoncCertificate {
    /// Coefficients of `r + sum p_i + remainder`, merged by exponent.
    pub fn expanded(&self) -> BTreeMap<Exponent, f64> {
        let mut out: BTreeMap<Exponent, f64> = BTreeMap::new();
        for cc in &self.circuits {
            for (e, b) in cc.circuit.terms() {
                *out.entry(e.clone()).or_default() += b;
            }
        }
        for (e, c) in &self.remainder {
            *out.entry(e.clone()).or_default() += c;
        }
        if let Some(dim) = self.dimension() {
            *out.entry(Exponent::zero(dim)).or_default() += self.r;
        }
        out
    }

    fn dimension(&self) -> Option<usize> {
        self.circuits
            .first()
            .map(|c| c.circuit.beta().len())
            .or_else(|| self.remainder.first().map(|(e, _)| e.len()))
    }

    /// Largest coefficient mismatch against `f`.
    pub fn reconstruction_error(&self, f: &Polynomial) -> f64 {
        let mut diff = self.expanded();
        if self.dimension().is_none() {
            diff.insert(Exponent::zero(f.nvars()), self.r);
        }
        for (e, c) in f.terms() {
            *diff.entry(e.clone()).or_default() -= rational_to_f64(c);
        }
        diff.values().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Re-checks every claim of the certificate against `f`: each circuit is
    /// nonnegative, each remainder term is a monomial square with a
    /// nonnegative coefficient, and the sum reproduces `f - r`.
    pub fn verify(&self, f: &Polynomial) -> Result<(), CertifyError> {
        let dim = f.nvars();
        for cc in &self.circuits {
            if cc.circuit.beta().len() != dim {
                return Err(CertifyError::Malformed("circuit dimension mismatch".into()));
            }
            if !circuit_nonneg(&cc.circuit) {
                return Err(CertifyError::InfeasibleSolution(format!(
                    "circuit at {} is not nonnegative",
                    cc.circuit.beta()
                )));
            }
        }
        for (e, c) in &self.remainder {
            if e.len() != dim {
                return Err(CertifyError::Malformed("remainder dimension mismatch".into()));
            }
            if !e.is_even() || !(*c >= 0.0) {
                return Err(CertifyError::InfeasibleSolution(format!(
                    "remainder term at {e} is not a monomial square"
                )));
            }
        }
        let err = self.reconstruction_error(f);
        if !(err <= RECONSTRUCTION_TOL) {
            return Err(CertifyError::InfeasibleSolution(format!(
                "reconstruction error {err:e}"
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.r
            + self.circuits.iter().map(|c| c.circuit.evaluate(x)).sum::<f64>()
            + self
                .remainder
                .iter()
                .map(|(e, c)| c * monomial_value(e, x))
                .sum::<f64>()
    }

    /// Marks circuits whose inner exponent lies in the maximal mediated set
    /// of their simplex as sums of binomial squares.
    pub fn upgrade_with(&mut self, ms: &MediatedSet) {
        for cc in &mut self.circuits {
            if ms.contains(cc.circuit.beta()) {
                cc.status = CircuitStatus::BinomialSos;
            }
        }
    }

    /// Computes the mediated set of each circuit's own simplex and upgrades.
    /// Circuits whose simplex is too large to enumerate are left unchanged.
    pub fn upgrade(&mut self) {
        for cc in &mut self.circuits {
            if let Ok(ms) = maximal_mediated_set(cc.circuit.vertices()) {
                if ms.contains(cc.circuit.beta()) {
                    cc.status = CircuitStatus::BinomialSos;
                }
            }
        }
    }
}

/// Clamps a slack that should be nonnegative; tiny negatives are rounding.
fn clamp_slack(slack: f64, scale: f64, what: &str) -> Result<f64, CertifyError> {
    if slack.abs() <= 1e-14 * scale.abs().max(1.0) {
        Ok(0.0)
    } else if slack >= 0.0 {
        Ok(slack)
    } else if slack >= -CRITERION_TOL * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(CertifyError::InfeasibleSolution(format!(
            "{what} is negative ({slack:e})"
        )))
    }
}

/// Builds the explicit certificate for `f - r` from multipliers satisfying
/// the second criterion. One circuit per `alpha` in delta, supported on the
/// vertices with `lambda_j > 0`; the remainder collects the square terms of
/// `omega \ delta` and the unused vertex and constant budget.
pub fn certificate_from_gp(
    profile: &SupportProfile,
    f: &Polynomial,
    r: f64,
    a: &MultiplierTable,
) -> Result<SoncCertificate, CertifyError> {
    if !verify_theorem32(profile, f, r, a)? {
        return Err(CertifyError::InfeasibleSolution(
            "multipliers violate the coefficient criteria".into(),
        ));
    }
    let k = profile.rank();
    let mut used = vec![0.0; k + 1];
    let mut circuits = Vec::with_capacity(profile.delta.len());
    for alpha in &profile.delta {
        let lambda = &profile.lambdas[alpha];
        let row = &a[alpha];
        let mut vertices = Vec::new();
        let mut coeffs = Vec::new();
        for (j, l) in lambda.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            let b = if j == 0 {
                origin_multiplier(profile, f, alpha, row)
            } else {
                row[j - 1]
            };
            used[j] += b;
            vertices.push(profile.vertices[j].clone());
            coeffs.push(b);
        }
        let c = rational_to_f64(&f.coeff(alpha));
        let circuit = CircuitPolynomial::new(vertices, coeffs, alpha.clone(), c)?;
        if !circuit_nonneg(&circuit) {
            return Err(CertifyError::InfeasibleSolution(format!(
                "circuit at {alpha} is not nonnegative"
            )));
        }
        circuits.push(CertifiedCircuit {
            circuit,
            status: CircuitStatus::NonnegCircuit,
        });
    }

    let mut remainder: Vec<(Exponent, f64)> = Vec::new();
    let f0 = rational_to_f64(&f.constant()) - r;
    let slack0 = clamp_slack(f0 - used[0], f0, "constant slack")?;
    if slack0 > 0.0 {
        remainder.push((profile.vertices[0].clone(), slack0));
    }
    for (v, u) in profile.vertices.iter().zip(&used).skip(1) {
        let fv = rational_to_f64(&f.coeff(v));
        let s = clamp_slack(fv - u, fv, "vertex slack")?;
        if s > 0.0 {
            remainder.push((v.clone(), s));
        }
    }
    for alpha in &profile.omega {
        if profile.delta.binary_search(alpha).is_err() {
            let c = f.coeff(alpha);
            debug_assert!(!c.is_negative());
            remainder.push((alpha.clone(), rational_to_f64(&c)));
        }
    }
    remainder.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(SoncCertificate {
        r,
        circuits,
        remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_profile;
    use crate::poly::parse_polynomial;

    fn ex1() -> (Polynomial, SupportProfile) {
        let f = parse_polynomial("1/4 + x1^8 + x1^2*x2^6 + 4*x1^3*x2^3", 2).unwrap();
        let p = build_profile(&f).unwrap();
        (f, p)
    }

    fn table(rows: &[(&[u32], &[f64])]) -> MultiplierTable {
        rows.iter()
            .map(|(e, v)| (Exponent(e.to_vec()), v.to_vec()))
            .collect()
    }

    #[test]
    fn example_one_criteria() {
        let (f, p) = ex1();
        let a = table(&[(&[3, 3], &[1.0, 1.0])]);
        assert!(verify_theorem32(&p, &f, -3.75, &a).unwrap());
        assert!(!verify_theorem32(&p, &f, -3.7, &a).unwrap());
        let o = origin_multiplier(&p, &f, &Exponent::from([3, 3]), &[1.0, 1.0]);
        assert!((o - 4.0).abs() < 1e-12);
    }

    #[test]
    fn theorem31_needs_constant_budget() {
        let (f, p) = ex1();
        assert!(!verify_theorem31(&p, &f, &table(&[(&[3, 3], &[0.25, 1.0, 1.0])])).unwrap());
        let g = f.add_constant(&crate::Rational::from_integer(4.into()));
        assert!(verify_theorem31(&p, &g, &table(&[(&[3, 3], &[4.25, 1.0, 1.0])])).unwrap());
    }

    #[test]
    fn table_shape_errors() {
        let (f, p) = ex1();
        assert!(matches!(
            verify_theorem32(&p, &f, 0.0, &table(&[(&[3, 3], &[1.0])])),
            Err(CertifyError::StructureMismatch(_))
        ));
        assert!(matches!(
            verify_theorem32(&p, &f, 0.0, &table(&[(&[1, 3], &[1.0, 1.0])])),
            Err(CertifyError::StructureMismatch(_))
        ));
        assert!(matches!(
            verify_theorem32(&p, &f, 0.0, &table(&[(&[3, 3], &[-1.0, 1.0])])),
            Err(CertifyError::StructureMismatch(_))
        ));
    }

    #[test]
    fn example_one_certificate() {
        let (f, p) = ex1();
        let a = table(&[(&[3, 3], &[1.0, 1.0])]);
        let mut cert = certificate_from_gp(&p, &f, -3.75, &a).unwrap();
        assert_eq!(cert.circuits.len(), 1);
        assert!(cert.remainder.is_empty());
        cert.verify(&f).unwrap();
        let theta = circuit_number(&cert.circuits[0].circuit);
        assert!((theta - 4.0).abs() < 1e-12);
        cert.upgrade();
        assert_eq!(cert.circuits[0].status, CircuitStatus::BinomialSos);
        let x = [0.7, -1.1];
        let fx = f.evaluate(&x).unwrap();
        assert!((cert.evaluate(&x) - fx).abs() < 1e-12);
    }

    #[test]
    fn certificate_rejects_overshoot() {
        let (f, p) = ex1();
        let a = table(&[(&[3, 3], &[1.0, 1.0])]);
        assert!(matches!(
            certificate_from_gp(&p, &f, -3.0, &a),
            Err(CertifyError::InfeasibleSolution(_))
        ));
    }

    #[test]
    fn verify_detects_tampering() {
        let (f, p) = ex1();
        let a = table(&[(&[3, 3], &[1.0, 1.0])]);
        let mut cert = certificate_from_gp(&p, &f, -3.75, &a).unwrap();
        cert.r = -3.5;
        assert!(cert.verify(&f).is_err());
        cert.r = -3.75;
        cert.remainder.push((Exponent::from([1, 0]), 1.0));
        assert!(cert.verify(&f).is_err());
    }
}
