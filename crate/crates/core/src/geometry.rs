//! Newton polytope analysis for the simplex setting: vertex detection,
//! barycentric coordinates of the non-vertex support, and lattice points.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg::{in_convex_hull, AffineFrame};
use crate::poly::{Exponent, Polynomial};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("polynomial has no terms")]
    EmptySupport,
    #[error("Newton polytope is not a simplex (hull vertices {})", join_exponents(.vertices))]
    NotASimplex { vertices: Vec<Exponent> },
    #[error("vertex {vertex} has an odd coordinate")]
    OddVertex { vertex: Exponent },
    #[error("vertex {vertex} has nonpositive coefficient")]
    NonpositiveVertexCoefficient { vertex: Exponent },
    #[error("support point {point} lies outside the simplex")]
    PointOutsideSimplex { point: Exponent },
    #[error("exponent dimension mismatch")]
    DimensionMismatch,
    #[error("invalid vertex list at position {pos}: {msg}")]
    VertexSyntax { pos: usize, msg: String },
}

fn join_exponents(v: &[Exponent]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Geometric data of a polynomial whose Newton polytope (with the origin
/// adjoined) is a simplex with even vertices.
#[derive(Clone, Debug)]
pub struct SupportProfile {
    pub nvars: usize,
    /// `vertices[0]` is the origin; the rest are sorted lexicographically.
    pub vertices: Vec<Exponent>,
    /// Non-vertex support points, sorted.
    pub omega: Vec<Exponent>,
    /// Points of `omega` whose term is not a monomial square.
    pub delta: Vec<Exponent>,
    /// Barycentric vector `(lambda_0, ..., lambda_k)` of every point in `omega`.
    pub lambdas: BTreeMap<Exponent, Vec<Rational>>,
    /// Maximal vertex degree.
    pub degree2d: u64,
    frame: AffineFrame,
}

impl SupportProfile {
    /// Number of non-origin vertices (the affine rank of the simplex).
    pub fn rank(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn lambda(&self, alpha: &Exponent) -> Option<&[Rational]> {
        self.lambdas.get(alpha).map(Vec::as_slice)
    }

    /// Points of `delta` strictly inside the origin's reach, i.e. with
    /// `lambda_0 > 0`. For simplices whose vertices all have degree `2d`
    /// this is exactly the set of `alpha` in `delta` with `|alpha| < 2d`.
    pub fn delta_lt2d(&self) -> impl Iterator<Item = &Exponent> {
        self.delta
            .iter()
            .filter(|a| self.lambdas[*a][0].is_positive())
    }

    /// Points of `delta` on the face opposite the origin (`lambda_0 = 0`).
    pub fn delta_top(&self) -> impl Iterator<Item = &Exponent> {
        self.delta.iter().filter(|a| self.lambdas[*a][0].is_zero())
    }

    /// Exact barycentric coordinates of an arbitrary lattice point relative
    /// to this simplex; `None` outside its affine span.
    pub fn barycentric(&self, p: &[u32]) -> Option<Vec<Rational>> {
        self.frame.barycentric(p)
    }

    pub fn contains(&self, p: &[u32]) -> bool {
        self.frame.contains(p)
    }
}

/// Vertices of the convex hull of `points`: the points that are not convex
/// combinations of the others. Duplicates are ignored; output is sorted.
pub fn hull_vertices(points: &[Exponent]) -> Vec<Exponent> {
    let uniq: Vec<Exponent> = points
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    uniq.iter()
        .enumerate()
        .filter(|(i, p)| {
            let others: Vec<&Exponent> = uniq
                .iter()
                .enumerate()
                .filter(|(j, _)| j != i)
                .map(|(_, q)| q)
                .collect();
            !in_convex_hull(p, &others)
        })
        .map(|(_, p)| p.clone())
        .collect()
}

/// Vertices of `New(f) = conv(supp f)`.
pub fn newton_vertices(f: &Polynomial) -> Vec<Exponent> {
    let pts: Vec<Exponent> = f.support().cloned().collect();
    hull_vertices(&pts)
}

/// Builds the simplex data for a support set, adjoining the origin.
///
/// `in_delta` decides which non-vertex points carry a term that is not a
/// monomial square. Coefficient checks on vertices are left to the caller.
pub fn simplex_profile<I, D>(nvars: usize, support: I, in_delta: D) -> Result<SupportProfile, GeometryError>
where
    I: IntoIterator<Item = Exponent>,
    D: Fn(&Exponent) -> bool,
{
    let mut pts: BTreeSet<Exponent> = support.into_iter().collect();
    if pts.is_empty() {
        return Err(GeometryError::EmptySupport);
    }
    if pts.iter().any(|p| p.len() != nvars) {
        return Err(GeometryError::DimensionMismatch);
    }
    let origin = Exponent::zero(nvars);
    pts.insert(origin.clone());
    let all: Vec<Exponent> = pts.iter().cloned().collect();
    let vertices = hull_vertices(&all);
    debug_assert_eq!(vertices.first(), Some(&origin));

    let frame = AffineFrame::new(&vertices).ok_or_else(|| GeometryError::NotASimplex {
        vertices: vertices.clone(),
    })?;
    if let Some(v) = vertices.iter().find(|v| !v.is_even()) {
        return Err(GeometryError::OddVertex { vertex: v.clone() });
    }

    let vset: BTreeSet<&Exponent> = vertices.iter().collect();
    let omega: Vec<Exponent> = all.iter().filter(|p| !vset.contains(p)).cloned().collect();
    let mut lambdas = BTreeMap::new();
    for a in &omega {
        let l = frame
            .barycentric(a)
            .ok_or_else(|| GeometryError::NotASimplex {
                vertices: vertices.clone(),
            })?;
        if l.iter().any(|x| x.is_negative()) {
            return Err(GeometryError::PointOutsideSimplex { point: a.clone() });
        }
        lambdas.insert(a.clone(), l);
    }
    let delta = omega.iter().filter(|a| in_delta(a)).cloned().collect();
    let degree2d = vertices.iter().map(Exponent::degree).max().unwrap_or(0);
    Ok(SupportProfile {
        nvars,
        vertices,
        omega,
        delta,
        lambdas,
        degree2d,
        frame,
    })
}

/// Support profile of `f` under the standing assumption: simplex Newton
/// polytope with even vertices, the origin among them, positive coefficients
/// on the non-origin vertices. A missing constant term is treated as a zero
/// coefficient on the origin vertex.
pub fn build_profile(f: &Polynomial) -> Result<SupportProfile, GeometryError> {
    if f.is_zero() {
        return Err(GeometryError::EmptySupport);
    }
    let profile = simplex_profile(f.nvars(), f.support().cloned(), |a| {
        f.coeff(a).is_negative() || !a.is_even()
    })?;
    for v in &profile.vertices[1..] {
        if !f.coeff(v).is_positive() {
            return Err(GeometryError::NonpositiveVertexCoefficient { vertex: v.clone() });
        }
    }
    Ok(profile)
}

/// Upper bound on box cells scanned by [`lattice_points_capped`].
const MAX_SCAN: u128 = 50_000_000;

/// All lattice points of the simplex spanned by `vertices`.
pub fn lattice_points(vertices: &[Exponent]) -> Vec<Exponent> {
    lattice_points_capped(vertices, usize::MAX).unwrap_or_default()
}

/// Like [`lattice_points`] but gives up (returns `None`) once more than `cap`
/// points are found or the bounding box is unreasonably large.
pub fn lattice_points_capped(vertices: &[Exponent], cap: usize) -> Option<Vec<Exponent>> {
    let first = vertices.first()?;
    let dim = first.len();
    if vertices.iter().any(|v| v.len() != dim) {
        return None;
    }
    let lo: Vec<u32> = (0..dim)
        .map(|i| vertices.iter().map(|v| v[i]).min().unwrap_or(0))
        .collect();
    let hi: Vec<u32> = (0..dim)
        .map(|i| vertices.iter().map(|v| v[i]).max().unwrap_or(0))
        .collect();
    let cells: u128 = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| u128::from(h - l) + 1)
        .try_fold(1u128, |acc, w| acc.checked_mul(w))?;
    if cells > MAX_SCAN {
        return None;
    }

    let frame = AffineFrame::new(vertices);
    let refs: Vec<&Exponent> = vertices.iter().collect();
    let member = |p: &[u32]| match &frame {
        Some(fr) => fr.contains(p),
        None => in_convex_hull(p, &refs),
    };

    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        if member(&cur) {
            if out.len() >= cap {
                return None;
            }
            out.push(Exponent(cur.clone()));
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == dim {
                out.sort();
                return Some(out);
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Parses a vertex list such as `"0,0;6,0;0,6"`.
pub fn parse_vertex_list(text: &str) -> Result<Vec<Exponent>, GeometryError> {
    let mut out: Vec<Exponent> = Vec::new();
    let mut offset = 0;
    for chunk in text.split(';') {
        let mut coords = Vec::new();
        let mut pos = offset;
        for field in chunk.split(',') {
            let trimmed = field.trim();
            let lead = field.len() - field.trim_start().len();
            let v: u32 = trimmed.parse().map_err(|_| GeometryError::VertexSyntax {
                pos: pos + lead,
                msg: format!("expected a nonnegative integer, found {trimmed:?}"),
            })?;
            coords.push(v);
            pos += field.len() + 1;
        }
        if let Some(prev) = out.first() {
            if prev.len() != coords.len() {
                return Err(GeometryError::VertexSyntax {
                    pos: offset,
                    msg: format!("expected {} coordinates, found {}", prev.len(), coords.len()),
                });
            }
        }
        out.push(Exponent(coords));
        offset += chunk.len() + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn e(v: &[u32]) -> Exponent {
        Exponent(v.to_vec())
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn vertices_of_example_one() {
        let f = parse_polynomial("1/4 + x1^8 + x1^2*x2^6 + 4*x1^3*x2^3", 2).unwrap();
        assert_eq!(newton_vertices(&f), vec![e(&[0, 0]), e(&[2, 6]), e(&[8, 0])]);
    }

    #[test]
    fn single_point_hull() {
        let f = parse_polynomial("3", 2).unwrap();
        assert_eq!(newton_vertices(&f), vec![e(&[0, 0])]);
    }

    #[test]
    fn profile_of_section_two_example() {
        let f = parse_polynomial("7/12 + x1^6 + x2^4 - 2*x1*x2", 2).unwrap();
        let p = build_profile(&f).unwrap();
        assert_eq!(p.vertices, vec![e(&[0, 0]), e(&[0, 4]), e(&[6, 0])]);
        // order of vertices: origin, (0,4), (6,0)
        assert_eq!(p.lambdas[&e(&[1, 1])], vec![q(7, 12), q(1, 4), q(1, 6)]);
        assert_eq!(p.delta, vec![e(&[1, 1])]);
    }

    #[test]
    fn profile_of_example_two() {
        let f = parse_polynomial("187/208 + x1^80 + x2^78 - 8*x1^5*x2^3", 2).unwrap();
        let p = build_profile(&f).unwrap();
        let l = &p.lambdas[&e(&[5, 3])];
        // vertices sorted: (0,0), (0,78), (80,0)
        assert_eq!(l[2], q(1, 16));
        assert_eq!(l[1], q(1, 26));
        assert_eq!(l[0], q(187, 208));
        assert_eq!(p.degree2d, 80);
    }

    #[test]
    fn monomial_squares_have_empty_delta() {
        let f = parse_polynomial("1 + x1^2", 1).unwrap();
        let p = build_profile(&f).unwrap();
        assert!(p.omega.is_empty());
        assert!(p.delta.is_empty());
        let g = parse_polynomial("1 + x1^2 + x1^4 + x2^4", 2).unwrap();
        let p = build_profile(&g).unwrap();
        assert_eq!(p.omega, vec![e(&[2, 0])]);
        assert!(p.delta.is_empty());
    }

    #[test]
    fn rejects_non_simplex() {
        let f = parse_polynomial("1 + x1^2 + x2^2 + x1^2*x2^2", 2).unwrap();
        assert!(matches!(build_profile(&f), Err(GeometryError::NotASimplex { .. })));
    }

    #[test]
    fn rejects_odd_vertex() {
        let f = parse_polynomial("1 + x1^3 + x1", 1).unwrap();
        assert!(matches!(build_profile(&f), Err(GeometryError::OddVertex { .. })));
    }

    #[test]
    fn rejects_negative_vertex_coefficient() {
        let f = parse_polynomial("1 - x1^4 + x1", 1).unwrap();
        assert!(matches!(
            build_profile(&f),
            Err(GeometryError::NonpositiveVertexCoefficient { .. })
        ));
    }

    #[test]
    fn missing_constant_adjoins_origin() {
        let f = parse_polynomial("x1^2 - x1", 1).unwrap();
        let p = build_profile(&f).unwrap();
        assert_eq!(p.vertices, vec![e(&[0]), e(&[2])]);
        assert_eq!(p.delta, vec![e(&[1])]);
    }

    #[test]
    fn lower_dimensional_simplex_accepted() {
        let f = parse_polynomial("1 + x1^2*x2^2 - x1*x2", 2).unwrap();
        let p = build_profile(&f).unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(p.lambdas[&e(&[1, 1])], vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn boundary_points_get_zero_lambda() {
        let f = parse_polynomial("1 + x1^6 + x2^6 - x1^4", 2).unwrap();
        let p = build_profile(&f).unwrap();
        let l = &p.lambdas[&e(&[4, 0])];
        assert!(l.iter().any(Zero::is_zero));
        assert_eq!(p.delta_lt2d().count(), 1);
    }

    #[test]
    fn lattice_point_counts() {
        assert_eq!(lattice_points(&[e(&[0, 0]), e(&[6, 0]), e(&[0, 6])]).len(), 28);
        assert_eq!(lattice_points(&[e(&[4, 2])]), vec![e(&[4, 2])]);
        assert_eq!(
            lattice_points(&[e(&[0, 0]), e(&[2, 0]), e(&[0, 2])]),
            vec![
                e(&[0, 0]),
                e(&[0, 1]),
                e(&[0, 2]),
                e(&[1, 0]),
                e(&[1, 1]),
                e(&[2, 0])
            ]
        );
    }

    #[test]
    fn lattice_points_cap() {
        let v = [e(&[0, 0]), e(&[6, 0]), e(&[0, 6])];
        assert!(lattice_points_capped(&v, 27).is_none());
        assert_eq!(lattice_points_capped(&v, 28).unwrap().len(), 28);
    }

    #[test]
    fn vertex_list_parsing() {
        assert_eq!(
            parse_vertex_list("0,0;6,0;0,6").unwrap(),
            vec![e(&[0, 0]), e(&[6, 0]), e(&[0, 6])]
        );
        assert_eq!(parse_vertex_list(" 0, 0 ; 2 ,4").unwrap().len(), 2);
        assert!(matches!(
            parse_vertex_list("0,0;6"),
            Err(GeometryError::VertexSyntax { pos: 4, .. })
        ));
        assert!(matches!(
            parse_vertex_list("0,0;a,1"),
            Err(GeometryError::VertexSyntax { pos: 4, .. })
        ));
        assert!(parse_vertex_list("").is_err());
    }
}
