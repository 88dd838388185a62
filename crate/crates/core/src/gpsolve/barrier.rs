use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::lse::LseFunction;
use super::{eval_monomial, eval_posynomial, GeometricProgram, GpError, GpSolution, GpStatus, Monomial};

const NEWTON_TOL: f64 = 1e-10;
const ARMIJO: f64 = 0.01;
const SHRINK: f64 = 0.5;
const T_GROWTH: f64 = 10.0;
/// Phase I optimum above this means the program is infeasible.
const INFEASIBLE_GAP: f64 = 1e-8;
/// Log-space coordinates beyond this leave the double range of `z = e^y`.
const MAX_LOG_COORD: f64 = 700.0;
const FEASIBILITY_TOL: f64 = 1e-8;
const PHASE_ONE_BOX: f64 = 0.9 * MAX_LOG_COORD;

fn monomial_row(m: &Monomial, n: usize) -> (DVector<f64>, f64) {
    let mut a = DVector::zeros(n);
    for (&v, &e) in &m.exponents {
        a[v] = e;
    }
    (a, m.log_coeff)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Converged,
    Stopped,
    MaxIter,
    Unbounded,
}

struct Run {
    x: DVector<f64>,
    outcome: Outcome,
    iterations: usize,
    gap: f64,
}

struct Barrier<'a> {
    obj: &'a LseFunction,
    cons: &'a [LseFunction],
}

impl Barrier<'_> {
    fn phi(&self, t: f64, x: &DVector<f64>) -> f64 {
        let mut v = t * self.obj.value(x);
        for c in self.cons {
            let fi = c.value(x);
            if !(fi < 0.0) {
                return f64::INFINITY;
            }
            v -= (-fi).ln();
        }
        v
    }

    /// Value, gradient, Hessian, and the magnitude of the summands of the
    /// value (the scale of its rounding error).
    fn derivatives(&self, t: f64, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>, f64) {
        let (f0, g0, h0) = self.obj.eval(x);
        let mut v = t * f0;
        let mut mag = v.abs();
        let mut g = g0 * t;
        let mut h = h0 * t;
        for c in self.cons {
            let (fi, gi, hi) = c.eval(x);
            let inv = -1.0 / fi;
            v -= (-fi).ln();
            mag += (-fi).ln().abs();
            g += &gi * inv;
            h += hi * inv + (&gi * gi.transpose()) * (inv * inv);
        }
        (v, g, h, mag)
    }

    /// One centering step sequence at fixed `t`.
    fn center(
        &self,
        t: f64,
        x: &mut DVector<f64>,
        max_iter: usize,
        iterations: &mut usize,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Outcome {
        for _ in 0..max_iter {
            let (v, g, h, mag) = self.derivatives(t, x);
            let Some(dx) = newton_direction(h, &g) else {
                return Outcome::Converged;
            };
            let slope = g.dot(&dx);
            // near the center the decrease drowns in rounding of the value
            let noise = 1e-14 * mag;
            if -slope / 2.0 <= NEWTON_TOL.max(noise) {
                return Outcome::Converged;
            }
            let mut s = 1.0;
            loop {
                let trial = &*x + &dx * s;
                let pv = self.phi(t, &trial);
                if pv.is_finite() && pv <= v + ARMIJO * s * slope + noise {
                    *x = trial;
                    break;
                }
                s *= SHRINK;
                if s < 1e-16 {
                    // no representable progress left; treat as centered
                    return Outcome::Converged;
                }
            }
            *iterations += 1;
            if stop(x) {
                return Outcome::Stopped;
            }
            if x.amax() > MAX_LOG_COORD {
                return Outcome::Unbounded;
            }
        }
        Outcome::MaxIter
    }

    fn run(
        &self,
        x0: DVector<f64>,
        tol: f64,
        max_iter: usize,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Run {
        let m = self.cons.len() as f64;
        let mut x = x0;
        let mut t = 1.0;
        let mut iterations = 0;
        loop {
            let outcome = self.center(t, &mut x, max_iter, &mut iterations, stop);
            let gap = m / t;
            if outcome != Outcome::Converged || gap < tol {
                return Run {
                    x,
                    outcome,
                    iterations,
                    gap,
                };
            }
            t *= T_GROWTH;
        }
    }
}

/// Solves `h dx = -g` by Cholesky, adding a growing multiple of the identity
/// when `h` is not numerically positive definite.
fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    if n == 0 {
        return None;
    }
    let scale = h.diagonal().amax().max(1.0);
    let mut reg = 0.0;
    for _ in 0..30 {
        let hr = &h + DMatrix::identity(n, n) * reg;
        if let Some(ch) = hr.cholesky() {
            let dx = ch.solve(&(-g));
            if dx.iter().all(|v| v.is_finite()) {
                return Some(dx);
            }
        }
        reg = if reg == 0.0 { 1e-12 * scale } else { reg * 10.0 };
    }
    None
}

/// Equality constraints `E y + c = 0` as `y = y_p + N w`.
struct Affine {
    yp: DVector<f64>,
    null: DMatrix<f64>,
}

fn eliminate_equalities(gp: &GeometricProgram) -> Option<Affine> {
    let n = gp.nvars;
    if gp.equalities.is_empty() {
        return Some(Affine {
            yp: DVector::zeros(n),
            null: DMatrix::identity(n, n),
        });
    }
    let p = gp.equalities.len();
    let mut e = DMatrix::zeros(p, n);
    let mut c = DVector::zeros(p);
    for (i, q) in gp.equalities.iter().enumerate() {
        let (row, lc) = monomial_row(q, n);
        e.row_mut(i).copy_from(&row.transpose());
        c[i] = lc;
    }
    let svd = e.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.amax().max(1.0);
    let yp = svd.solve(&(-&c), eps).ok()?;
    let resid = (&e * &yp + &c).amax();
    if resid > 1e-9 * (1.0 + c.amax()) {
        return None;
    }
    let eig = SymmetricEigen::new(e.tr_mul(&e));
    let cut = 1e-12 * eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .filter(|(&l, _)| l.abs() <= cut)
        .map(|(_, v)| v.into_owned())
        .collect();
    let null = if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Some(Affine { yp, null })
}

/// Solves a geometric program by a log-space barrier method.
///
/// `max_iter` bounds the Newton iterations of each centering step; the
/// returned `iterations` counts all of them across Phase I and Phase II.
pub fn solve_gp(gp: &GeometricProgram, tol: f64, max_iter: usize) -> Result<GpSolution, GpError> {
    gp.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(GpError::InvalidProgram("tolerance must be positive".into()));
    }
    let n = gp.nvars;
    let Some(aff) = eliminate_equalities(gp) else {
        return Ok(infeasible(n, 0));
    };
    let obj = LseFunction::from_posynomial(&gp.objective, n).reparametrize(&aff.yp, &aff.null);
    let mut cons: Vec<LseFunction> = gp
        .inequalities
        .iter()
        .map(|p| LseFunction::from_posynomial(p, n).reparametrize(&aff.yp, &aff.null))
        .collect();
    let r = aff.null.ncols();
    let mut w = DVector::zeros(r);
    let mut iterations = 0;

    let worst = |cons: &[LseFunction], w: &DVector<f64>| {
        cons.iter().map(|c| c.value(w)).fold(f64::NEG_INFINITY, f64::max)
    };

    let start = worst(&cons, &w);
    if !cons.is_empty() && !(start < 0.0) {
        if r == 0 {
            // the equalities pin a single point
            if start > FEASIBILITY_TOL {
                return Ok(infeasible(n, 0));
            }
            cons = cons.iter().map(|c| c.shifted(-(start.max(0.0) + 1e-12))).collect();
        } else {
            // Phase I over (w, s): minimize s s.t. F_i(w) - s <= 0, -1 - s <= 0
            let mut a = DMatrix::zeros(1, r + 1);
            a[(0, r)] = 1.0;
            let p1_obj = LseFunction::new(a.clone(), DVector::zeros(1));
            let mut p1_cons: Vec<LseFunction> =
                cons.iter().map(|c| c.with_extra_column(-1.0)).collect();
            p1_cons.push(LseFunction::new(-a, DVector::from_element(1, -1.0)));
            // Variables that only shrink constraints have nothing to stop
            // them in Phase I; keep them inside the representable range.
            for i in 0..r {
                for sign in [1.0, -1.0] {
                    let mut row = DMatrix::zeros(1, r + 1);
                    row[(0, i)] = sign;
                    p1_cons.push(LseFunction::new(row, DVector::from_element(1, -PHASE_ONE_BOX)));
                }
            }
            let mut x0 = w.clone().resize_vertically(r + 1, 0.0);
            x0[r] = start + 1.0;
            let barrier = Barrier {
                obj: &p1_obj,
                cons: &p1_cons,
            };
            let run = barrier.run(x0, tol, max_iter, &|x: &DVector<f64>| x[r] < 0.0);
            iterations += run.iterations;
            let s = run.x[r];
            w = run.x.rows(0, r).into_owned();
            match run.outcome {
                Outcome::Stopped => {}
                Outcome::MaxIter => {
                    return Ok(finish(gp, &aff, &obj, &w, GpStatus::MaxIter, run.gap, iterations))
                }
                Outcome::Unbounded => return Ok(infeasible(n, iterations)),
                Outcome::Converged => {
                    if s > INFEASIBLE_GAP {
                        return Ok(infeasible(n, iterations));
                    }
                    let delta = s.max(0.0) + 1e-9;
                    cons = cons.iter().map(|c| c.shifted(-delta)).collect();
                }
            }
        }
    }

    if r == 0 {
        return Ok(finish(gp, &aff, &obj, &w, GpStatus::Optimal, 0.0, iterations));
    }
    let barrier = Barrier {
        obj: &obj,
        cons: &cons,
    };
    let run = barrier.run(w, tol, max_iter, &|_: &DVector<f64>| false);
    iterations += run.iterations;
    let status = match run.outcome {
        Outcome::Converged | Outcome::Stopped => GpStatus::Optimal,
        Outcome::MaxIter => GpStatus::MaxIter,
        Outcome::Unbounded => GpStatus::Unbounded,
    };
    let sol = finish(gp, &aff, &obj, &run.x, status, run.gap, iterations);
    if sol.status == GpStatus::Optimal && !(sol.max_violation <= FEASIBILITY_TOL) {
        return Err(GpError::Numerical(format!(
            "constraint violation {:e} at the computed optimum",
            sol.max_violation
        )));
    }
    Ok(sol)
}

fn infeasible(n: usize, iterations: usize) -> GpSolution {
    GpSolution {
        status: GpStatus::Infeasible,
        z: vec![f64::NAN; n],
        objective_value: f64::NAN,
        duality_gap_estimate: f64::INFINITY,
        iterations,
        max_violation: f64::INFINITY,
    }
}

fn finish(
    gp: &GeometricProgram,
    aff: &Affine,
    obj: &LseFunction,
    w: &DVector<f64>,
    status: GpStatus,
    gap: f64,
    iterations: usize,
) -> GpSolution {
    let y = &aff.yp + &aff.null * w;
    let z: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let objective_value = obj.value(w).exp();
    let mut viol: f64 = 0.0;
    for p in &gp.inequalities {
        let v = eval_posynomial(p, &z).unwrap_or(f64::INFINITY);
        viol = viol.max(v - 1.0);
    }
    for q in &gp.equalities {
        let v = eval_monomial(q, &z).unwrap_or(f64::INFINITY);
        viol = viol.max((v - 1.0).abs());
    }
    GpSolution {
        status,
        z,
        objective_value,
        duality_gap_estimate: gap,
        iterations,
        max_violation: viol.max(0.0),
    }
}
