//! Lower bounds for `min f` over `K = {x : g_i(x) >= 0}` via
//! `h(mu) = f - sum_i mu_i g_i`: every `h(mu)_gp` with `mu > 0` bounds
//! `min_K f` from below, and the best such bound is searched over `mu`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::geometry::{simplex_profile, GeometryError, SupportProfile};
use crate::gpbuild::{lower_bound_with, BoundError, BoundResult, DEFAULT_MAX_ITER};
use crate::gpsolve::{solve_gp, GeometricProgram, GpError, GpSolution, GpStatus, Monomial, Posynomial};
use crate::poly::{rational_ln_abs, rational_to_f64, Exponent, Polynomial};
use crate::Rational;

/// Grid of the coordinate search: `GRID_POINTS` log-spaced values per axis.
pub const MU_MIN: f64 = 1e-3;
pub const MU_MAX: f64 = 1e3;
pub const GRID_POINTS: usize = 25;
pub const SEARCH_ROUNDS: usize = 3;
const GOLDEN_STEPS: usize = 40;
/// Lower limit on each multiplier in the geometric route, which keeps the
/// program bounded when the optimum is approached as `mu -> 0`.
pub const MU_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstrainedError {
    #[error("constraint {index} has {got} variables, objective has {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("union support: {0}")]
    SupportNotSimplex(#[from] GeometryError),
    #[error("multipliers must be positive and finite")]
    NonpositiveMu,
    #[error("no multiplier produced a bound")]
    InnerInfeasible,
    #[error(transparent)]
    Solver(#[from] GpError),
    #[error("geometric program finished with status {}", .0.status)]
    SolverStatus(Box<GpSolution>),
    #[error(transparent)]
    Bound(#[from] Box<BoundError>),
}

#[derive(Clone, Debug)]
pub struct ConstrainedProblem {
    pub f: Polynomial,
    pub g: Vec<Polynomial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProgramClass {
    Geometric,
    Signomial,
}

/// `h(mu)` plus a flag raised when cancellation removed a point of the
/// union support.
#[derive(Clone, Debug)]
pub struct HPolynomial {
    pub h: Polynomial,
    pub support_changed: bool,
}

#[derive(Clone, Debug)]
pub struct ConstrainedBound {
    pub bound: f64,
    pub mu: Vec<f64>,
    pub class: ProgramClass,
    /// Unconstrained bound of `h(mu)` at the returned multipliers.
    pub inner: Option<BoundResult>,
    /// Number of inner bound computations (coordinate search) or solver
    /// iterations (geometric route).
    pub evaluations: usize,
}

impl ConstrainedProblem {
    pub fn new(f: Polynomial, g: Vec<Polynomial>) -> Result<Self, ConstrainedError> {
        for (index, gi) in g.iter().enumerate() {
            if gi.nvars() != f.nvars() {
                return Err(ConstrainedError::DimensionMismatch {
                    index,
                    expected: f.nvars(),
                    got: gi.nvars(),
                });
            }
        }
        Ok(ConstrainedProblem { f, g })
    }

    pub fn union_support(&self) -> BTreeSet<Exponent> {
        self.f
            .support()
            .chain(self.g.iter().flat_map(|g| g.support()))
            .cloned()
            .collect()
    }

    /// Sign of `h(mu)_alpha` for all `mu > 0`, or `None` when the
    /// contributions `f_alpha` and `-g_{i,alpha}` disagree.
    pub fn coefficient_sign(&self, alpha: &Exponent) -> Option<i8> {
        let mut sign = 0i8;
        let contributions = std::iter::once(self.f.coeff(alpha))
            .chain(self.g.iter().map(|g| -g.coeff(alpha)));
        for c in contributions {
            if c.is_zero() {
                continue;
            }
            let s = if c.is_positive() { 1 } else { -1 };
            if sign != 0 && s != sign {
                return None;
            }
            sign = s;
        }
        Some(sign)
    }

    /// Simplex data of the union support. Non-square status of a point
    /// follows its sign for `mu > 0`; points of undetermined sign are
    /// counted as non-squares.
    pub fn shared_profile(&self) -> Result<SupportProfile, ConstrainedError> {
        let support = self.union_support();
        Ok(simplex_profile(self.f.nvars(), support, |a| {
            !a.is_even() || self.coefficient_sign(a) != Some(1)
        })?)
    }
}

/// `h(mu) = f - sum_i mu_i g_i` with each `mu_i` converted exactly to a rational.
pub fn build_h(problem: &ConstrainedProblem, mu: &[f64]) -> Result<HPolynomial, ConstrainedError> {
    if mu.len() != problem.g.len() || mu.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(ConstrainedError::NonpositiveMu);
    }
    let mut h = problem.f.clone();
    for (g, &m) in problem.g.iter().zip(mu) {
        let m = Rational::from_float(m).ok_or(ConstrainedError::NonpositiveMu)?;
        h = h
            .add_scaled(g, &-m)
            .expect("dimensions checked at construction");
    }
    let support_changed = h.len() != problem.union_support().len();
    Ok(HPolynomial { h, support_changed })
}

/// Geometric when the program over `(a, mu)` is posynomial: positive `f`
/// and nonnegative `g_i` coefficients on every vertex, `g_i(0) >= 0`, and a
/// `mu`-independent sign for every non-vertex coefficient of `h`.
pub fn classify_program(problem: &ConstrainedProblem) -> ProgramClass {
    let Ok(profile) = problem.shared_profile() else {
        return ProgramClass::Signomial;
    };
    let origin = &profile.vertices[0];
    if problem.g.iter().any(|g| g.coeff(origin).is_negative()) {
        return ProgramClass::Signomial;
    }
    for v in &profile.vertices[1..] {
        if !problem.f.coeff(v).is_positive() || problem.g.iter().any(|g| g.coeff(v).is_negative()) {
            return ProgramClass::Signomial;
        }
    }
    if profile.omega.iter().any(|a| problem.coefficient_sign(a).is_none()) {
        return ProgramClass::Signomial;
    }
    ProgramClass::Geometric
}

/// Best lower bound on `min_K f`: the geometric route when
/// [`classify_program`] allows it, otherwise coordinate search over `mu`.
pub fn constrained_bound(problem: &ConstrainedProblem, tol: f64) -> Result<ConstrainedBound, ConstrainedError> {
    if problem.g.is_empty() {
        let inner = lower_bound_with(&problem.f, tol, DEFAULT_MAX_ITER).map_err(Box::new)?;
        return Ok(ConstrainedBound {
            bound: inner.f_gp,
            mu: Vec::new(),
            class: ProgramClass::Geometric,
            inner: Some(inner),
            evaluations: 1,
        });
    }
    match classify_program(problem) {
        ProgramClass::Geometric => geometric_route(problem, tol),
        ProgramClass::Signomial => {
            problem.shared_profile()?;
            coordinate_search(problem, tol)
        }
    }
}

fn geometric_route(problem: &ConstrainedProblem, tol: f64) -> Result<ConstrainedBound, ConstrainedError> {
    let profile = problem.shared_profile()?;
    let f = &problem.f;
    let s = problem.g.len();
    let k = profile.rank();

    let mut nvars = 0;
    let mut a_var = BTreeMap::new();
    for alpha in &profile.delta {
        for (j, l) in profile.lambdas[alpha].iter().enumerate().skip(1) {
            if l.is_positive() {
                a_var.insert((alpha.clone(), j), nvars);
                nvars += 1;
            }
        }
    }
    let mu_var: Vec<usize> = (nvars..nvars + s).collect();
    nvars += s;
    // t_alpha >= |h_alpha(mu)| for coefficients that move with mu
    let mut t_var = BTreeMap::new();
    for alpha in &profile.delta {
        if problem.g.iter().any(|g| !g.coeff(alpha).is_zero()) {
            t_var.insert(alpha.clone(), nvars);
            nvars += 1;
        }
    }

    let mut objective = Vec::new();
    let mut inequalities = Vec::new();
    for alpha in &profile.delta {
        let l: Vec<f64> = profile.lambdas[alpha].iter().map(rational_to_f64).collect();
        let active: Vec<(usize, usize)> = (1..=k)
            .filter_map(|j| a_var.get(&(alpha.clone(), j)).map(|&v| (j, v)))
            .collect();
        let (log_h, t) = match t_var.get(alpha) {
            Some(&t) => (0.0, Some(t)),
            None => (rational_ln_abs(&f.coeff(alpha)), None),
        };
        if l[0] == 0.0 {
            let log_c = log_h + active.iter().map(|&(j, _)| l[j] * l[j].ln()).sum::<f64>();
            let exps = active.iter().map(|&(j, v)| (v, -l[j])).chain(t.map(|t| (t, 1.0)));
            inequalities.push(Posynomial::single(Monomial::from_log(log_c, exps)));
        } else {
            let l0 = l[0];
            let log_c = l0.ln()
                + log_h / l0
                + active.iter().map(|&(j, _)| l[j] / l0 * l[j].ln()).sum::<f64>();
            let exps = active
                .iter()
                .map(|&(j, v)| (v, -l[j] / l0))
                .chain(t.map(|t| (t, 1.0 / l0)));
            objective.push(Monomial::from_log(log_c, exps));
        }
        if let Some(t) = t {
            let mut terms = Vec::new();
            let fa = f.coeff(alpha);
            if !fa.is_zero() {
                terms.push(Monomial::from_log(rational_ln_abs(&fa), [(t, -1.0)]));
            }
            for (g, &m) in problem.g.iter().zip(&mu_var) {
                let ga = g.coeff(alpha);
                if !ga.is_zero() {
                    terms.push(Monomial::from_log(rational_ln_abs(&ga), [(m, 1.0), (t, -1.0)]));
                }
            }
            inequalities.push(Posynomial::new(terms));
        }
    }
    for j in 1..=k {
        let v = &profile.vertices[j];
        let log_fv = rational_ln_abs(&f.coeff(v));
        let mut terms: Vec<Monomial> = a_var
            .iter()
            .filter(|((_, jj), _)| *jj == j)
            .map(|(_, &var)| Monomial::from_log(-log_fv, [(var, 1.0)]))
            .collect();
        for (g, &m) in problem.g.iter().zip(&mu_var) {
            let gv = g.coeff(v);
            if gv.is_positive() {
                terms.push(Monomial::from_log(rational_ln_abs(&gv) - log_fv, [(m, 1.0)]));
            }
        }
        if !terms.is_empty() {
            inequalities.push(Posynomial::new(terms));
        }
    }
    for (g, &m) in problem.g.iter().zip(&mu_var) {
        let g0 = g.constant();
        if g0.is_positive() {
            objective.push(Monomial::from_log(rational_ln_abs(&g0), [(m, 1.0)]));
        }
        inequalities.push(Posynomial::single(Monomial::from_log(MU_FLOOR.ln(), [(m, -1.0)])));
    }
    let has_objective = !objective.is_empty();
    if !has_objective {
        objective.push(Monomial::from_log(0.0, []));
    }
    let gp = GeometricProgram {
        nvars,
        objective: Posynomial::new(objective),
        inequalities,
        equalities: Vec::new(),
    };
    let sol = solve_gp(&gp, tol, DEFAULT_MAX_ITER)?;
    if sol.status != GpStatus::Optimal {
        return Err(ConstrainedError::SolverStatus(Box::new(sol)));
    }
    let gamma = if has_objective { sol.objective_value } else { 0.0 };
    let bound = rational_to_f64(&f.constant()) - gamma;
    let mu: Vec<f64> = mu_var.iter().map(|&v| sol.z[v]).collect();
    let inner = build_h(problem, &mu)
        .ok()
        .and_then(|h| lower_bound_with(&h.h, tol, DEFAULT_MAX_ITER).ok());
    Ok(ConstrainedBound {
        bound,
        mu,
        class: ProgramClass::Geometric,
        inner,
        evaluations: sol.iterations,
    })
}

struct Search<'a> {
    problem: &'a ConstrainedProblem,
    tol: f64,
    evaluations: usize,
    cache: BTreeMap<Vec<u64>, f64>,
}

impl Search<'_> {
    /// `h(mu)_gp`, or `-inf` where `h(mu)` violates the assumptions or the
    /// inner program fails.
    fn value(&mut self, mu: &[f64]) -> f64 {
        let key: Vec<u64> = mu.iter().map(|m| m.to_bits()).collect();
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        self.evaluations += 1;
        let v = build_h(self.problem, mu)
            .ok()
            .and_then(|h| lower_bound_with(&h.h, self.tol, DEFAULT_MAX_ITER).ok())
            .map_or(f64::NEG_INFINITY, |r| r.f_gp);
        self.cache.insert(key, v);
        v
    }
}

fn better(v: f64, mu: &[f64], best_v: f64, best_mu: &[f64]) -> bool {
    v > best_v || (v == best_v && mu.partial_cmp(best_mu) == Some(std::cmp::Ordering::Less))
}

fn coordinate_search(problem: &ConstrainedProblem, tol: f64) -> Result<ConstrainedBound, ConstrainedError> {
    let s = problem.g.len();
    let (lo, hi) = (MU_MIN.log10(), MU_MAX.log10());
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let mut search = Search {
        problem,
        tol,
        evaluations: 0,
        cache: BTreeMap::new(),
    };
    // log10 of the current multipliers, starting at the grid centre
    let mut cur = vec![grid[GRID_POINTS / 2]; s];
    let to_mu = |c: &[f64]| c.iter().map(|e| 10f64.powf(*e)).collect::<Vec<f64>>();
    let mut best_mu = to_mu(&cur);
    let mut best = search.value(&best_mu);

    for _ in 0..SEARCH_ROUNDS {
        for i in 0..s {
            let mut best_k = None;
            for (k, &e) in grid.iter().enumerate() {
                let mut trial = cur.clone();
                trial[i] = e;
                let mu = to_mu(&trial);
                let v = search.value(&mu);
                if better(v, &mu, best, &best_mu) {
                    best = v;
                    best_mu = mu;
                    best_k = Some(k);
                    cur = trial;
                }
            }
            // golden-section refinement around the best grid point on this axis
            let k = best_k.unwrap_or_else(|| {
                grid.iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - cur[i]).abs().total_cmp(&(b.1 - cur[i]).abs()))
                    .map_or(0, |(k, _)| k)
            });
            let mut a = grid[k.saturating_sub(1)];
            let mut b = grid[(k + 1).min(GRID_POINTS - 1)];
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            let eval_at = |e: f64, search: &mut Search| {
                let mut trial = cur.clone();
                trial[i] = e;
                let mu = to_mu(&trial);
                (search.value(&mu), trial, mu)
            };
            let mut x1 = b - ratio * (b - a);
            let mut x2 = a + ratio * (b - a);
            let mut f1 = eval_at(x1, &mut search);
            let mut f2 = eval_at(x2, &mut search);
            for _ in 0..GOLDEN_STEPS {
                if f1.0 >= f2.0 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - ratio * (b - a);
                    f1 = eval_at(x1, &mut search);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + ratio * (b - a);
                    f2 = eval_at(x2, &mut search);
                }
            }
            for (v, trial, mu) in [f1, f2] {
                if better(v, &mu, best, &best_mu) {
                    best = v;
                    best_mu = mu;
                    cur = trial;
                }
            }
        }
    }
    if !best.is_finite() {
        return Err(ConstrainedError::InnerInfeasible);
    }
    let inner = build_h(problem, &best_mu)
        .ok()
        .and_then(|h| lower_bound_with(&h.h, tol, DEFAULT_MAX_ITER).ok());
    Ok(ConstrainedBound {
        bound: best,
        mu: best_mu,
        class: ProgramClass::Signomial,
        inner,
        evaluations: search.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpbuild::lower_bound;
    use crate::poly::parse_polynomial;

    fn p(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    #[test]
    fn h_construction() {
        let prob = ConstrainedProblem::new(p("1 + x1^2", 1), vec![p("x1", 1)]).unwrap();
        let h = build_h(&prob, &[1.0]).unwrap();
        assert_eq!(h.h, p("1 + x1^2 - x1", 1));
        assert!(!h.support_changed);
        assert_eq!(build_h(&prob, &[0.0]).unwrap_err(), ConstrainedError::NonpositiveMu);
        let h = build_h(&prob, &[1e-300]).unwrap();
        assert!(rational_to_f64(&h.h.coeff(&Exponent::from([1]))).abs() < 1e-299);
    }

    #[test]
    fn cancellation_flag() {
        let prob = ConstrainedProblem::new(p("1 + 2*x1^2 - x1", 1), vec![p("x1^2", 1)]).unwrap();
        assert!(build_h(&prob, &[2.0]).unwrap().support_changed);
    }

    #[test]
    fn classification() {
        let geo = ConstrainedProblem::new(p("1 + x1^2 - x1", 1), vec![p("2 + x1", 1)]).unwrap();
        assert_eq!(classify_program(&geo), ProgramClass::Geometric);
        let neg0 = ConstrainedProblem::new(p("1 + x1^2", 1), vec![p("x1 - 1", 1)]).unwrap();
        assert_eq!(classify_program(&neg0), ProgramClass::Signomial);
        let vertex = ConstrainedProblem::new(p("1 + x1^2 - x1", 1), vec![p("1 - x1^2", 1)]).unwrap();
        assert_eq!(classify_program(&vertex), ProgramClass::Signomial);
    }

    #[test]
    fn half_line_bound_is_exact() {
        // min of 1 + x^2 on x >= 1 is 2, attained by h(2)_gp
        let prob = ConstrainedProblem::new(p("1 + x1^2", 1), vec![p("x1 - 1", 1)]).unwrap();
        let r = constrained_bound(&prob, 1e-9).unwrap();
        assert_eq!(r.class, ProgramClass::Signomial);
        assert!((r.bound - 2.0).abs() < 1e-6, "{}", r.bound);
        assert!((r.mu[0] - 2.0).abs() < 1e-3, "{:?}", r.mu);
        let inner = r.inner.unwrap();
        assert!((inner.f_gp - r.bound).abs() < 1e-9);
    }

    #[test]
    fn no_constraints_delegates() {
        let f = p("1/4 + x1^8 + x1^2*x2^6 + 4*x1^3*x2^3", 2);
        let prob = ConstrainedProblem::new(f.clone(), vec![]).unwrap();
        let r = constrained_bound(&prob, 1e-9).unwrap();
        assert_eq!(r.bound, lower_bound(&f).unwrap().f_gp);
    }

    #[test]
    fn geometric_route_approaches_unconstrained() {
        let f = p("1 + x1^2 - x1", 1);
        let prob = ConstrainedProblem::new(f.clone(), vec![p("2 + x1", 1)]).unwrap();
        let r = constrained_bound(&prob, 1e-9).unwrap();
        assert_eq!(r.class, ProgramClass::Geometric);
        let free = lower_bound(&f).unwrap().f_gp;
        assert!(r.bound <= free + 1e-9);
        assert!((r.bound - free).abs() < 1e-6, "{} vs {free}", r.bound);
    }

    #[test]
    fn dimension_checked() {
        assert!(matches!(
            ConstrainedProblem::new(p("1", 1), vec![p("1", 2)]),
            Err(ConstrainedError::DimensionMismatch { index: 0, .. })
        ));
    }
}
