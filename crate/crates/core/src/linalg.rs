//! Exact rational linear algebra on lattice points.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::poly::Exponent;
use crate::Rational;

fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Affinely independent vertex set with a precomputed integer inverse, so
/// barycentric coordinates of many points are cheap to compute exactly.
///
/// Coordinates are solved from `sum_j lambda_j v_j = p`, `sum_j lambda_j = 1`.
/// The system has `dim + 1` rows and `m` unknowns; `rows` selects `m`
/// independent rows, `adj / det` is the inverse of that square block, and the
/// remaining rows are checked for consistency (points outside the affine span).
#[derive(Clone, Debug)]
pub(crate) struct AffineFrame {
    vertices: Vec<Exponent>,
    rows: Vec<usize>,
    adj: Vec<Vec<BigInt>>,
    det: BigInt,
}

impl AffineFrame {
    /// `None` when the vertices are affinely dependent or of mixed length.
    pub(crate) fn new(vertices: &[Exponent]) -> Option<Self> {
        let m = vertices.len();
        if m == 0 {
            return None;
        }
        let dim = vertices[0].len();
        if vertices.iter().any(|v| v.len() != dim) {
            return None;
        }
        // row r < dim: coordinate r; row dim: all ones
        let row = |r: usize| -> Vec<Rational> {
            (0..m)
                .map(|j| {
                    if r == dim {
                        rat(1)
                    } else {
                        rat(i64::from(vertices[j][r]))
                    }
                })
                .collect()
        };

        // greedy independent row selection, ones row first
        let mut basis: Vec<Vec<Rational>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let mut rows = Vec::new();
        for r in std::iter::once(dim).chain(0..dim) {
            let mut v = row(r);
            for (b, &pc) in basis.iter().zip(&pivots) {
                if !v[pc].is_zero() {
                    let f = &v[pc] / &b[pc];
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= &f * y;
                    }
                }
            }
            if let Some(pc) = v.iter().position(|x| !x.is_zero()) {
                basis.push(v);
                pivots.push(pc);
                rows.push(r);
                if rows.len() == m {
                    break;
                }
            }
        }
        if rows.len() < m {
            return None;
        }
        rows.sort_unstable();

        let block: Vec<Vec<Rational>> = rows.iter().map(|&r| row(r)).collect();
        let (inv, det) = invert(block)?;
        let adj = inv
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| {
                        let y = x * &det;
                        debug_assert!(y.is_integer());
                        y.to_integer()
                    })
                    .collect()
            })
            .collect();
        let mut frame = AffineFrame {
            vertices: vertices.to_vec(),
            rows,
            adj,
            det: det.to_integer(),
        };
        if frame.det.is_negative() {
            frame.det = -frame.det;
            for r in &mut frame.adj {
                for x in r {
                    *x = -x.clone();
                }
            }
        }
        Some(frame)
    }

    fn rhs(&self, p: &[u32], r: usize) -> BigInt {
        if r == p.len() {
            BigInt::from(1)
        } else {
            BigInt::from(p[r])
        }
    }

    /// Integer numerators `n_j` with `lambda_j = n_j / det`, or `None` when
    /// `p` is outside the affine span.
    fn numerators(&self, p: &[u32]) -> Option<Vec<BigInt>> {
        let dim = self.vertices[0].len();
        if p.len() != dim {
            return None;
        }
        let b: Vec<BigInt> = self.rows.iter().map(|&r| self.rhs(p, r)).collect();
        let nums: Vec<BigInt> = self
            .adj
            .iter()
            .map(|row| row.iter().zip(&b).map(|(a, x)| a * x).sum())
            .collect();
        for r in 0..=dim {
            if self.rows.binary_search(&r).is_ok() {
                continue;
            }
            let lhs: BigInt = nums
                .iter()
                .zip(&self.vertices)
                .map(|(n, v)| {
                    if r == dim {
                        n.clone()
                    } else {
                        n * BigInt::from(v[r])
                    }
                })
                .sum();
            if lhs != &self.det * self.rhs(p, r) {
                return None;
            }
        }
        Some(nums)
    }

    /// Exact barycentric coordinates, or `None` outside the affine span.
    pub(crate) fn barycentric(&self, p: &[u32]) -> Option<Vec<Rational>> {
        let nums = self.numerators(p)?;
        Some(
            nums.into_iter()
                .map(|n| Rational::new(n, self.det.clone()))
                .collect(),
        )
    }

    /// Membership in the closed simplex.
    pub(crate) fn contains(&self, p: &[u32]) -> bool {
        self.numerators(p)
            .is_some_and(|nums| nums.iter().all(|n| !n.is_negative()))
    }
}

/// Gauss-Jordan inverse and determinant of a square rational matrix.
fn invert(mut a: Vec<Vec<Rational>>) -> Option<(Vec<Vec<Rational>>, Rational)> {
    let n = a.len();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| rat(i64::from(i == j))).collect())
        .collect();
    let mut det = rat(1);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
                let t = &f * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Some((inv, det))
}

/// Exact test whether `p` lies in the convex hull of `points`, by a phase-one
/// simplex method with Bland's rule over the rationals.
pub(crate) fn in_convex_hull(p: &[u32], points: &[&Exponent]) -> bool {
    if points.is_empty() {
        return false;
    }
    if points.iter().any(|q| q.0.as_slice() == p) {
        return true;
    }
    let dim = p.len();
    // bounding box prefilter
    for i in 0..dim {
        let lo = points.iter().map(|q| q[i]).min().unwrap_or(0);
        let hi = points.iter().map(|q| q[i]).max().unwrap_or(0);
        if p[i] < lo || p[i] > hi {
            return false;
        }
    }

    let m = points.len();
    let rows = dim + 1;
    let cols = m + rows;
    // tableau rows: [A | I | b]
    let mut t: Vec<Vec<Rational>> = (0..rows)
        .map(|r| {
            let mut v: Vec<Rational> = Vec::with_capacity(cols + 1);
            for q in points {
                v.push(if r == dim {
                    rat(1)
                } else {
                    rat(i64::from(q[r]))
                });
            }
            for k in 0..rows {
                v.push(rat(i64::from(k == r)));
            }
            v.push(if r == dim {
                rat(1)
            } else {
                rat(i64::from(p[r]))
            });
            v
        })
        .collect();
    let mut basis: Vec<usize> = (m..cols).collect();
    // reduced costs for minimizing the sum of artificials
    let mut cost: Vec<Rational> = (0..=cols)
        .map(|j| {
            if (m..cols).contains(&j) {
                rat(0)
            } else {
                -t.iter().map(|row| row[j].clone()).sum::<Rational>()
            }
        })
        .collect();

    while let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if t[r][enter].is_positive() {
                let ratio = &t[r][cols] / &t[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((lr, _)) = leave else {
            // unbounded direction cannot occur: objective is bounded below by 0
            break;
        };
        let piv = t[lr][enter].clone();
        for x in t[lr].iter_mut() {
            *x /= &piv;
        }
        let pivot_row = t[lr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != lr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (x, y) in cost.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        basis[lr] = enter;
    }
    // remaining artificial mass
    basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= m)
        .all(|(r, _)| t[r][cols].is_zero())
}
