use serde::{Deserialize, Serialize};

use super::{circuit_number, CertifiedCircuit, CertifyError, CircuitPolynomial, CircuitStatus, SoncCertificate};
use crate::poly::Exponent;

/// Wire format of a [`SoncCertificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub r: f64,
    pub circuits: Vec<CircuitJson>,
    pub remainder: Vec<RemainderJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub vertices: Vec<Vec<u32>>,
    pub vertex_coeffs: Vec<f64>,
    pub beta: Vec<u32>,
    pub c: f64,
    pub theta: f64,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderJson {
    pub exponent: Vec<u32>,
    pub coeff: f64,
}

impl From<&SoncCertificate> for CertificateJson {
    fn from(cert: &SoncCertificate) -> Self {
        CertificateJson {
            r: cert.r,
            circuits: cert
                .circuits
                .iter()
                .map(|cc| CircuitJson {
                    vertices: cc.circuit.vertices().iter().map(|v| v.0.clone()).collect(),
                    vertex_coeffs: cc.circuit.vertex_coeffs().to_vec(),
                    beta: cc.circuit.beta().0.clone(),
                    c: cc.circuit.c(),
                    theta: circuit_number(&cc.circuit),
                    status: cc.status.as_str().to_string(),
                })
                .collect(),
            remainder: cert
                .remainder
                .iter()
                .map(|(e, c)| RemainderJson {
                    exponent: e.0.clone(),
                    coeff: *c,
                })
                .collect(),
        }
    }
}

impl TryFrom<CertificateJson> for SoncCertificate {
    type Error = CertifyError;

    /// Structural validation only: circuits must be well formed and the
    /// recorded circuit numbers must match. Use [`SoncCertificate::verify`]
    /// to check the decomposition against a polynomial.
    fn try_from(j: CertificateJson) -> Result<Self, CertifyError> {
        if !j.r.is_finite() {
            return Err(CertifyError::Malformed("r is not finite".into()));
        }
        let mut circuits = Vec::with_capacity(j.circuits.len());
        let mut dim: Option<usize> = None;
        let mut same_dim = |n: usize| match dim {
            Some(d) if d != n => Err(CertifyError::Malformed("mixed exponent lengths".into())),
            _ => {
                dim = Some(n);
                Ok(())
            }
        };
        for cj in j.circuits {
            same_dim(cj.beta.len())?;
            let status = CircuitStatus::parse(&cj.status)
                .ok_or_else(|| CertifyError::Malformed(format!("unknown status {:?}", cj.status)))?;
            let circuit = CircuitPolynomial::new(
                cj.vertices.into_iter().map(Exponent).collect(),
                cj.vertex_coeffs,
                Exponent(cj.beta),
                cj.c,
            )?;
            let theta = circuit_number(&circuit);
            if !((cj.theta - theta).abs() <= 1e-9 * theta.abs().max(1.0)) {
                return Err(CertifyError::Malformed(format!(
                    "recorded circuit number {} differs from {theta}",
                    cj.theta
                )));
            }
            circuits.push(CertifiedCircuit { circuit, status });
        }
        let mut remainder = Vec::with_capacity(j.remainder.len());
        for rj in j.remainder {
            same_dim(rj.exponent.len())?;
            if !rj.coeff.is_finite() {
                return Err(CertifyError::Malformed("remainder coefficient is not finite".into()));
            }
            remainder.push((Exponent(rj.exponent), rj.coeff));
        }
        Ok(SoncCertificate {
            r: j.r,
            circuits,
            remainder,
        })
    }
}

impl SoncCertificate {
    pub fn to_json(&self) -> CertificateJson {
        CertificateJson::from(self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("certificate serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, CertifyError> {
        let j: CertificateJson =
            serde_json::from_str(text).map_err(|e| CertifyError::Malformed(e.to_string()))?;
        SoncCertificate::try_from(j)
    }
}
