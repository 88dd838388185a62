//! The geometric program whose optimum `m*` yields the bound
//! `f_gp = f_0 - m*`, and the end-to-end [`lower_bound`] pipeline.

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::certify::{certificate_from_gp, origin_multiplier, CertifyError, MultiplierTable, SoncCertificate};
use crate::geometry::{build_profile, GeometryError, SupportProfile};
use crate::gpsolve::{solve_gp, GeometricProgram, GpError, GpSolution, GpStatus, Monomial, Posynomial};
use crate::poly::{rational_ln_abs, rational_to_f64, Exponent, Polynomial};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] GpError),
    #[error("geometric program finished with status {}", .0.status)]
    SolverStatus(Box<GpSolution>),
    #[error(transparent)]
    Certificate(#[from] CertifyError),
    #[error("closed form needs exactly one non-square point with lambda_0 > 0")]
    ClosedFormNotApplicable,
}

impl BoundError {
    /// Status of the solver run when the failure came from the solver.
    pub fn solver_status(&self) -> Option<GpStatus> {
        match self {
            BoundError::SolverStatus(s) => Some(s.status),
            _ => None,
        }
    }
}

/// A geometric program together with the meaning of its variables:
/// variable `i` is `a_{alpha, j}` for `variables[i] = (alpha, j)`, `j >= 1`.
#[derive(Clone, Debug)]
pub struct GpEncoding {
    pub program: GeometricProgram,
    pub variables: Vec<(Exponent, usize)>,
    /// `false` when the objective sum is empty and the program only decides
    /// feasibility (the objective is then the constant 1).
    pub has_objective: bool,
}

fn lambda_f64(l: &[crate::Rational]) -> Vec<f64> {
    l.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect()
}

/// Builds the program: minimize `sum_{alpha: lambda_0 > 0} lambda_0
/// |f_alpha|^{1/lambda_0} prod_j (lambda_j / a_{alpha,j})^{lambda_j/lambda_0}`
/// subject to `sum_alpha a_{alpha,j} / f_{alpha(j)} <= 1` for each vertex
/// and `|f_alpha| prod_j (lambda_j / a_{alpha,j})^{lambda_j} <= 1` for each
/// `alpha` with `lambda_0 = 0`. Factors with `lambda_j = 0` are omitted.
pub fn build_gp(profile: &SupportProfile, f: &Polynomial) -> GpEncoding {
    let k = profile.rank();
    let mut variables = Vec::new();
    let mut index = std::collections::BTreeMap::new();
    for alpha in &profile.delta {
        for (j, l) in profile.lambdas[alpha].iter().enumerate().skip(1) {
            if l.is_positive() {
                index.insert((alpha.clone(), j), variables.len());
                variables.push((alpha.clone(), j));
            }
        }
    }

    let mut objective = Vec::new();
    let mut top = Vec::new();
    for alpha in &profile.delta {
        let l = lambda_f64(&profile.lambdas[alpha]);
        let log_fa = rational_ln_abs(&f.coeff(alpha));
        let active: Vec<(usize, usize)> = (1..=k)
            .filter_map(|j| index.get(&(alpha.clone(), j)).map(|&v| (j, v)))
            .collect();
        if profile.lambdas[alpha][0].is_zero() {
            let log_c = log_fa + active.iter().map(|&(j, _)| l[j] * l[j].ln()).sum::<f64>();
            top.push(Posynomial::single(Monomial::from_log(
                log_c,
                active.iter().map(|&(j, v)| (v, -l[j])),
            )));
        } else {
            let l0 = l[0];
            let log_c = l0.ln()
                + log_fa / l0
                + active.iter().map(|&(j, _)| l[j] / l0 * l[j].ln()).sum::<f64>();
            objective.push(Monomial::from_log(
                log_c,
                active.iter().map(|&(j, v)| (v, -l[j] / l0)),
            ));
        }
    }

    let mut inequalities = Vec::new();
    for j in 1..=k {
        let log_fv = rational_ln_abs(&f.coeff(&profile.vertices[j]));
        let terms: Vec<Monomial> = variables
            .iter()
            .enumerate()
            .filter(|(_, (_, jj))| *jj == j)
            .map(|(v, _)| Monomial::from_log(-log_fv, [(v, 1.0)]))
            .collect();
        if !terms.is_empty() {
            inequalities.push(Posynomial::new(terms));
        }
    }
    inequalities.extend(top);

    let has_objective = !objective.is_empty();
    if !has_objective {
        objective.push(Monomial::from_log(0.0, []));
    }
    GpEncoding {
        program: GeometricProgram {
            nvars: variables.len(),
            objective: Posynomial::new(objective),
            inequalities,
            equalities: Vec::new(),
        },
        variables,
        has_objective,
    }
}

impl GpEncoding {
    /// Multiplier table (origin omitted, zeros where `lambda_j = 0`) read
    /// off a solver point.
    pub fn multipliers(&self, profile: &SupportProfile, z: &[f64]) -> MultiplierTable {
        let mut table: MultiplierTable = profile
            .delta
            .iter()
            .map(|a| (a.clone(), vec![0.0; profile.rank()]))
            .collect();
        for ((alpha, j), &v) in self.variables.iter().zip(z) {
            if let Some(row) = table.get_mut(alpha) {
                row[j - 1] = v;
            }
        }
        table
    }
}

#[derive(Clone, Debug)]
pub struct BoundResult {
    pub f_gp: f64,
    pub m_star: f64,
    /// `a*_{alpha, j}` for `j = 1..=k`; entries with `lambda_j = 0` are zero.
    pub a_star: MultiplierTable,
    pub solver: GpSolution,
    pub certificate: SoncCertificate,
    pub profile: SupportProfile,
}

impl BoundResult {
    /// `a*_{alpha, j}` addressed by the vertex exponent `alpha(j)`.
    pub fn a_star_at(&self, alpha: &Exponent, vertex: &Exponent) -> Option<f64> {
        let j = self.profile.vertices.iter().position(|v| v == vertex)?;
        if j == 0 {
            return None;
        }
        self.a_star.get(alpha).map(|row| row[j - 1])
    }
}

/// `f_gp` with the default solver settings.
pub fn lower_bound(f: &Polynomial) -> Result<BoundResult, BoundError> {
    lower_bound_with(f, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn lower_bound_with(f: &Polynomial, tol: f64, max_iter: usize) -> Result<BoundResult, BoundError> {
    let profile = build_profile(f)?;
    lower_bound_for_profile(profile, f, tol, max_iter)
}

pub(crate) fn lower_bound_for_profile(
    profile: SupportProfile,
    f: &Polynomial,
    tol: f64,
    max_iter: usize,
) -> Result<BoundResult, BoundError> {
    let enc = build_gp(&profile, f);
    let solver = solve_gp(&enc.program, tol, max_iter)?;
    if solver.status != GpStatus::Optimal {
        return Err(BoundError::SolverStatus(Box::new(solver)));
    }
    let a_star = enc.multipliers(&profile, &solver.z);
    // recomputed from a* so that m* is exactly what the certificate uses
    let m_star: f64 = profile
        .delta_lt2d()
        .map(|alpha| origin_multiplier(&profile, f, alpha, &a_star[alpha]))
        .sum();
    let f_gp = rational_to_f64(&f.constant()) - m_star;
    let certificate = certificate_from_gp(&profile, f, f_gp, &a_star)?;
    Ok(BoundResult {
        f_gp,
        m_star,
        a_star,
        solver,
        certificate,
        profile,
    })
}

/// Closed-form optimum when delta is a single point `alpha` with
/// `lambda_0 > 0`: the budget constraints are tight at
/// `a_{alpha,j} = f_{alpha(j)}`.
pub fn closed_form_single_circuit(profile: &SupportProfile, f: &Polynomial) -> Result<f64, BoundError> {
    let [alpha] = profile.delta.as_slice() else {
        return Err(BoundError::ClosedFormNotApplicable);
    };
    let lambda = &profile.lambdas[alpha];
    if !lambda[0].is_positive() {
        return Err(BoundError::ClosedFormNotApplicable);
    }
    let l = lambda_f64(lambda);
    let l0 = l[0];
    let mut log = l0.ln() + rational_ln_abs(&f.coeff(alpha)) / l0;
    for (lj, v) in l.iter().zip(&profile.vertices).skip(1) {
        if *lj > 0.0 {
            log += lj / l0 * (lj.ln() - rational_ln_abs(&f.coeff(v)));
        }
    }
    Ok(rational_to_f64(&f.constant()) - log.exp())
}
