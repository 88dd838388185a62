//! Certified lower bounds for sparse real polynomials whose Newton polytope is
//! a simplex with even vertices.
//!
//! The pipeline is:
//!
//! 1. [`poly`]: parse and represent the polynomial with exact rational coefficients.
//! 2. [`geometry`]: check the simplex assumption and compute exact barycentric
//!    coordinates of every non-vertex support point.
//! 3. [`gpbuild`]: assemble a geometric program whose optimum `m*` gives the
//!    bound `f_gp = f_0 - m*`, and solve it with [`gpsolve`].
//! 4. [`certify`]: turn the solution into a sum of nonnegative circuit
//!    polynomials (SONC) that can be re-checked independently, optionally
//!    upgraded to binomial squares with the [`mediated`] set machinery.
//!
//! [`constrained`] extends the bound to semialgebraic sets and [`oracle`]
//! provides brute-force numeric checks used by tests and the CLI.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod constrained;
pub mod geometry;
pub mod gpbuild;
pub mod gpsolve;
pub mod mediated;
pub mod oracle;
pub mod poly;

mod linalg;

/// Exact coefficient type used by polynomials and geometry.
pub type Rational = num_rational::BigRational;

pub use certify::{CircuitClass, CircuitPolynomial, CircuitStatus, SoncCertificate};
pub use geometry::{build_profile, lattice_points, newton_vertices, SupportProfile};
pub use gpbuild::{lower_bound, BoundResult};
pub use gpsolve::{solve_gp, GeometricProgram, GpSolution, GpStatus, Monomial, Posynomial};
pub use mediated::{maximal_mediated_set, MediatedSet};
pub use poly::{parse_polynomial, Exponent, Polynomial};
