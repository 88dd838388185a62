//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use soncbound::geometry::{lattice_points_capped, simplex_profile};
use soncbound::{Exponent, Polynomial, Rational};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn poly(text: &str, nvars: usize) -> Polynomial {
    soncbound::parse_polynomial(text, nvars).unwrap()
}

/// Random multiple of `1/den` in `[lo, hi]`.
pub fn rational(rng: &mut TestRng, lo: i64, hi: i64, den: i64) -> Rational {
    let n = rng.random_range(lo * den..=hi * den);
    Rational::new(BigInt::from(n), BigInt::from(den))
}

pub fn rational_nonzero(rng: &mut TestRng, lo: i64, hi: i64, den: i64) -> Rational {
    loop {
        let r = rational(rng, lo, hi, den);
        if r != Rational::from_integer(BigInt::from(0)) {
            return r;
        }
    }
}

/// Origin plus `n` even vertices from a lower-triangular pattern with a
/// positive diagonal, hence affinely independent.
pub fn random_simplex(rng: &mut TestRng, n: usize, max_half: u32) -> Vec<Exponent> {
    let mut vs = vec![Exponent::zero(n)];
    for i in 0..n {
        let mut v = vec![0u32; n];
        v[i] = 2 * rng.random_range(1..=max_half);
        for c in v.iter_mut().take(i) {
            *c = 2 * rng.random_range(0..=1);
        }
        vs.push(Exponent(v));
    }
    vs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inner {
    /// Any non-vertex lattice point, any sign.
    Any,
    /// Strictly interior points with negative coefficients.
    InteriorNegative,
    /// Exactly one strictly interior point, any sign, odd or negative.
    SingleCircuit,
}

/// Non-vertex lattice points of the simplex, optionally strictly interior.
pub fn inner_points(vertices: &[Exponent], interior: bool) -> Vec<Exponent> {
    let n = vertices[0].len();
    let all = lattice_points_capped(vertices, 20_000).expect("small simplex");
    all.into_iter()
        .filter(|p| !vertices.contains(p))
        .filter(|p| {
            if !interior {
                return true;
            }
            let mut support: Vec<Exponent> = vertices.to_vec();
            support.push(p.clone());
            let prof = simplex_profile(n, support, |_| true).unwrap();
            prof.lambdas[p].iter().all(|l| *l > Rational::from_integer(BigInt::from(0)))
        })
        .collect()
}

/// Random polynomial on a random simplex with `inner` non-vertex terms, or
/// `None` when the simplex has too few suitable points.
pub fn random_polynomial(rng: &mut TestRng, n: usize, inner: usize, kind: Inner) -> Option<Polynomial> {
    let vertices = random_simplex(rng, n, 3);
    let interior = kind != Inner::Any;
    let mut cands = inner_points(&vertices, interior);
    if kind == Inner::SingleCircuit {
        // needs a non-square term
        cands.retain(|p| !p.is_even());
    }
    let want = if kind == Inner::SingleCircuit { 1 } else { inner };
    if cands.len() < want {
        return None;
    }
    let mut terms: Vec<(Exponent, Rational)> = Vec::new();
    terms.push((Exponent::zero(n), rational(rng, 0, 2, 8)));
    for v in &vertices[1..] {
        terms.push((v.clone(), rational(rng, 1, 3, 8)));
    }
    for _ in 0..want {
        let k = rng.random_range(0..cands.len());
        let p = cands.swap_remove(k);
        let c = match kind {
            Inner::InteriorNegative => -rational(rng, 1, 3, 8),
            _ => rational_nonzero(rng, -3, 3, 8),
        };
        terms.push((p, c));
    }
    Some(Polynomial::from_terms(n, terms).unwrap())
}

/// Keeps drawing until the generator succeeds.
pub fn draw(rng: &mut TestRng, n: usize, inner: usize, kind: Inner) -> Polynomial {
    loop {
        if let Some(f) = random_polynomial(rng, n, inner, kind) {
            return f;
        }
    }
}

/// Relative error with the denominator floored at 1, so that reference
/// values near zero are compared absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
