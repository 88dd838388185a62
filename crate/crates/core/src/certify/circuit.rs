use num_traits::{Signed, ToPrimitive, Zero};

use super::CertifyError;
use crate::linalg::AffineFrame;
use crate::mediated::MediatedSet;
use crate::poly::{monomial_value, Exponent};
use crate::Rational;

/// Polynomial `sum_j b_j x^{v_j} + c x^beta` whose exponents `v_j` are the
/// even, affinely independent vertices of a simplex containing `beta`.
///
/// Vertices with `lambda_j = 0` are permitted and contribute a factor 1 to the
/// circuit number (the `0/0 = 1` convention); in that case the nonnegativity
/// test is a sufficient condition only.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitPolynomial {
    vertices: Vec<Exponent>,
    vertex_coeffs: Vec<f64>,
    beta: Exponent,
    c: f64,
    lambdas: Vec<Rational>,
}

/// Outcome of [`classify_circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CircuitClass {
    NotNonnegative,
    MonomialSquares,
    BinomialSos,
    SoncOnly,
}

impl CircuitPolynomial {
    pub fn new(
        vertices: Vec<Exponent>,
        vertex_coeffs: Vec<f64>,
        beta: Exponent,
        c: f64,
    ) -> Result<Self, CertifyError> {
        if vertices.is_empty() || vertices.len() != vertex_coeffs.len() {
            return Err(CertifyError::InvalidCircuit(
                "vertex and coefficient counts differ".into(),
            ));
        }
        if let Some(v) = vertices.iter().find(|v| !v.is_even()) {
            return Err(CertifyError::InvalidCircuit(format!("vertex {v} is not even")));
        }
        if vertex_coeffs.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(CertifyError::InvalidCircuit(
                "vertex coefficients must be positive and finite".into(),
            ));
        }
        if !c.is_finite() || c == 0.0 {
            return Err(CertifyError::InvalidCircuit(
                "inner coefficient must be finite and nonzero".into(),
            ));
        }
        if vertices.contains(&beta) {
            return Err(CertifyError::InvalidCircuit(
                "inner exponent coincides with a vertex".into(),
            ));
        }
        let frame = AffineFrame::new(&vertices).ok_or_else(|| {
            CertifyError::InvalidCircuit("vertices are affinely dependent".into())
        })?;
        let lambdas = frame
            .barycentric(&beta)
            .filter(|l| l.iter().all(|x| !x.is_negative()))
            .ok_or_else(|| {
                CertifyError::InvalidCircuit(format!("inner exponent {beta} outside the simplex"))
            })?;
        Ok(CircuitPolynomial {
            vertices,
            vertex_coeffs,
            beta,
            c,
            lambdas,
        })
    }

    pub fn vertices(&self) -> &[Exponent] {
        &self.vertices
    }

    pub fn vertex_coeffs(&self) -> &[f64] {
        &self.vertex_coeffs
    }

    pub fn beta(&self) -> &Exponent {
        &self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambdas(&self) -> &[Rational] {
        &self.lambdas
    }

    /// All terms, vertices first then the inner term.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.vertices
            .iter()
            .zip(self.vertex_coeffs.iter().copied())
            .chain(std::iter::once((&self.beta, self.c)))
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms().map(|(e, b)| b * monomial_value(e, x)).sum()
    }
}

/// `Theta = prod_j (b_j / lambda_j)^lambda_j`, accumulated in log space.
pub fn circuit_number(cp: &CircuitPolynomial) -> f64 {
    let log: f64 = cp
        .lambdas
        .iter()
        .zip(&cp.vertex_coeffs)
        .filter(|(l, _)| !l.is_zero())
        .map(|(l, &b)| {
            let l = l.to_f64().unwrap_or(0.0);
            l * (b.ln() - l.ln())
        })
        .sum();
    log.exp()
}

/// `x <= bound` with a 1e-12 relative allowance, falling back to 1e-9
/// absolute when the bound is close to zero.
pub(crate) fn within_bound(x: f64, bound: f64) -> bool {
    if x <= bound + 1e-12 * bound.abs() {
        return true;
    }
    bound.abs() < 1e-6 && x <= bound + 1e-9
}

/// Nonnegativity of a circuit polynomial via its circuit number:
/// `|c| <= Theta` for odd `beta`, `c >= -Theta` for even `beta`.
pub fn circuit_nonneg(cp: &CircuitPolynomial) -> bool {
    let theta = circuit_number(cp);
    if cp.beta.is_even() {
        within_bound(-cp.c, theta)
    } else {
        within_bound(cp.c.abs(), theta)
    }
}

/// Sum-of-squares classification given the maximal mediated set of the
/// circuit's simplex (or of any simplex having it as a face).
pub fn classify_circuit(cp: &CircuitPolynomial, ms: &MediatedSet) -> CircuitClass {
    if cp.c > 0.0 && cp.beta.is_even() {
        CircuitClass::MonomialSquares
    } else if !circuit_nonneg(cp) {
        CircuitClass::NotNonnegative
    } else if ms.contains(&cp.beta) {
        CircuitClass::BinomialSos
    } else {
        CircuitClass::SoncOnly
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mediated::maximal_mediated_set;

    fn e(v: &[u32]) -> Exponent {
        Exponent(v.to_vec())
    }

    fn section_two(c: f64) -> CircuitPolynomial {
        CircuitPolynomial::new(
            vec![e(&[0, 0]), e(&[6, 0]), e(&[0, 4])],
            vec![7.0 / 12.0, 1.0, 1.0],
            e(&[1, 1]),
            c,
        )
        .unwrap()
    }

    fn theta_closed() -> f64 {
        6f64.powf(1.0 / 6.0) * 4f64.powf(0.25)
    }

    #[test]
    fn circuit_number_matches_closed_form() {
        let cp = section_two(-1.0);
        assert!((circuit_number(&cp) - theta_closed()).abs() < 1e-14);
    }

    #[test]
    fn agiform_has_unit_circuit_number() {
        let cp = CircuitPolynomial::new(
            vec![e(&[0, 0]), e(&[4, 2]), e(&[2, 4])],
            vec![1.0 / 3.0; 3],
            e(&[2, 2]),
            -1.0,
        )
        .unwrap();
        assert!((circuit_number(&cp) - 1.0).abs() < 1e-15);
        assert!(circuit_nonneg(&cp));
    }

    #[test]
    fn nonnegativity_boundary() {
        assert!(circuit_nonneg(&section_two(theta_closed())));
        assert!(circuit_nonneg(&section_two(-theta_closed())));
        assert!(!circuit_nonneg(&section_two(theta_closed() + 0.01)));
        assert!(!circuit_nonneg(&section_two(-theta_closed() - 0.01)));
    }

    #[test]
    fn violated_circuit_takes_negative_values() {
        // minimizer of the relaxed form sits where b_j x^{v_j} = lambda_j * scale
        let cp = section_two(-(theta_closed() + 0.01));
        let mut best = f64::INFINITY;
        for i in 1..400 {
            for k in 1..400 {
                let x = [i as f64 / 200.0, k as f64 / 200.0];
                best = best.min(cp.evaluate(&x));
            }
        }
        assert!(best < 0.0);
    }

    #[test]
    fn even_inner_point_with_positive_coefficient() {
        let cp = CircuitPolynomial::new(
            vec![e(&[0, 0]), e(&[4, 0]), e(&[0, 4])],
            vec![1.0, 1.0, 1.0],
            e(&[2, 2]),
            10.0 * 2.0,
        )
        .unwrap();
        assert!(circuit_nonneg(&cp));
        let ms = maximal_mediated_set(cp.vertices()).unwrap();
        assert_eq!(classify_circuit(&cp, &ms), CircuitClass::MonomialSquares);
    }

    #[test]
    fn classification_examples() {
        let cp = section_two(-1.5);
        let ms = maximal_mediated_set(cp.vertices()).unwrap();
        assert_eq!(classify_circuit(&cp, &ms), CircuitClass::BinomialSos);
        assert_eq!(
            classify_circuit(&section_two(-3.0), &ms),
            CircuitClass::NotNonnegative
        );

        let motzkin = CircuitPolynomial::new(
            vec![e(&[0, 0]), e(&[4, 2]), e(&[2, 4])],
            vec![1.0 / 3.0; 3],
            e(&[2, 2]),
            -1.0,
        )
        .unwrap();
        let ms = maximal_mediated_set(motzkin.vertices()).unwrap();
        assert_eq!(classify_circuit(&motzkin, &ms), CircuitClass::SoncOnly);
    }

    #[test]
    fn invalid_circuits_rejected() {
        let bad = |v: Vec<Exponent>, b: Vec<f64>, beta: Exponent, c: f64| {
            CircuitPolynomial::new(v, b, beta, c).is_err()
        };
        assert!(bad(vec![e(&[0]), e(&[3])], vec![1.0, 1.0], e(&[1]), -1.0));
        assert!(bad(vec![e(&[0]), e(&[2])], vec![1.0, -1.0], e(&[1]), -1.0));
        assert!(bad(vec![e(&[0]), e(&[2])], vec![1.0, 1.0], e(&[3]), -1.0));
        assert!(bad(vec![e(&[0]), e(&[2])], vec![1.0, 1.0], e(&[1]), 0.0));
        assert!(bad(vec![e(&[0]), e(&[2])], vec![1.0], e(&[1]), 1.0));
    }
}
