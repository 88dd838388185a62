use nalgebra::{DMatrix, DVector};

use super::Posynomial;

/// `F(x) = ln sum_k exp(a_k . x + b_k)`, the log of a posynomial after the
/// change of variables `z = e^y` (and possibly an affine reparametrization).
#[derive(Clone, Debug, PartialEq)]
pub struct LseFunction {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LseFunction {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        assert_eq!(a.nrows(), b.len());
        LseFunction { a, b }
    }

    /// `ln p(e^y)` over `n` variables.
    pub fn from_posynomial(p: &Posynomial, n: usize) -> Self {
        let rows = p.terms.len();
        let mut a = DMatrix::zeros(rows, n);
        let mut b = DVector::zeros(rows);
        for (k, m) in p.terms.iter().enumerate() {
            b[k] = m.log_coeff;
            for (&v, &e) in &m.exponents {
                a[(k, v)] = e;
            }
        }
        LseFunction::new(a, b)
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Value and softmax weights.
    fn value_weights(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let s = &self.a * x + &self.b;
        let m = s.max();
        let mut p = s.map(|v| (v - m).exp());
        let total = p.sum();
        p /= total;
        (m + total.ln(), p)
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.value_weights(x).0
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, p) = self.value_weights(x);
        self.a.tr_mul(&p)
    }

    /// Value, gradient `A^T p` and Hessian `A^T (diag p - p p^T) A`.
    pub fn eval(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let (v, p) = self.value_weights(x);
        let g = self.a.tr_mul(&p);
        let mut weighted = self.a.clone();
        for (mut row, &pk) in weighted.row_iter_mut().zip(p.iter()) {
            row *= pk;
        }
        let h = self.a.tr_mul(&weighted) - &g * g.transpose();
        (v, g, h)
    }

    /// Same function in new coordinates `x = x0 + N w`.
    pub fn reparametrize(&self, x0: &DVector<f64>, n: &DMatrix<f64>) -> LseFunction {
        LseFunction {
            a: &self.a * n,
            b: &self.b + &self.a * x0,
        }
    }

    /// Appends a column `coef` to every row (a new variable entering each
    /// exponent with the same weight).
    pub fn with_extra_column(&self, coef: f64) -> LseFunction {
        let rows = self.a.nrows();
        let cols = self.a.ncols();
        let mut a = self.a.clone().resize(rows, cols + 1, 0.0);
        a.column_mut(cols).fill(coef);
        LseFunction {
            a,
            b: self.b.clone(),
        }
    }

    pub fn shifted(&self, delta: f64) -> LseFunction {
        LseFunction {
            a: self.a.clone(),
            b: self.b.add_scalar(delta),
        }
    }
}
