//! Maximal mediated sets of simplices with even vertices.
//!
//! A set `L` with `P ⊆ L ⊆ conv(P) ∩ N^n` is `P`-mediated when every point of
//! `L \ P` is the midpoint of two distinct even points of `L`. The maximal one,
//! `P*`, decides whether a nonnegative circuit polynomial is a sum of binomial
//! squares: it is exactly when the inner exponent lies in `P*`.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::geometry::lattice_points_capped;
use crate::linalg::AffineFrame;
use crate::poly::Exponent;

/// Refuse simplices with more lattice points than this.
pub const MAX_LATTICE_POINTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MediatedError {
    #[error("vertex set is empty or affinely dependent")]
    NotASimplex,
    #[error("vertex {0} is not even")]
    OddVertex(Exponent),
    #[error("simplex has more than {MAX_LATTICE_POINTS} lattice points")]
    TooManyLatticePoints,
    #[error("point {0} lies outside the simplex")]
    PointOutsideSimplex(Exponent),
}

#[derive(Clone, Debug)]
pub struct MediatedSet {
    pub hat_p: Vec<Exponent>,
    pub pstar: BTreeSet<Exponent>,
    pub is_h_simplex: bool,
    /// Number of lattice points of `conv(hat_p)`.
    pub lattice_count: usize,
    frame: AffineFrame,
}

impl MediatedSet {
    pub fn contains(&self, beta: &Exponent) -> bool {
        self.pstar.contains(beta)
    }
}

/// Midpoints `(s + t) / 2` of even points `s, t` of `l`. With `distinct_only`
/// the pairs `s = t` are skipped.
pub fn averages(l: &BTreeSet<Exponent>, distinct_only: bool) -> BTreeSet<Exponent> {
    let even: Vec<&Exponent> = l.iter().filter(|p| p.is_even()).collect();
    let mut out = BTreeSet::new();
    for (i, s) in even.iter().enumerate() {
        let start = if distinct_only { i + 1 } else { i };
        for t in &even[start..] {
            out.insert(midpoint(s, t));
        }
    }
    out
}

fn midpoint(s: &[u32], t: &[u32]) -> Exponent {
    Exponent(
        s.iter()
            .zip(t)
            .map(|(&a, &b)| ((u64::from(a) + u64::from(b)) / 2) as u32)
            .collect(),
    )
}

/// Whether `beta` is the midpoint of two distinct even points of `l`.
fn is_mediated_point(beta: &Exponent, l: &HashSet<Exponent>, even: &[Exponent]) -> bool {
    even.iter().any(|s| {
        if s == beta {
            return false;
        }
        // t = 2 beta - s, must be a lattice point
        let mut t = Vec::with_capacity(s.len());
        for (&b, &si) in beta.iter().zip(s.iter()) {
            let twice = 2 * u64::from(b);
            if u64::from(si) > twice {
                return false;
            }
            t.push((twice - u64::from(si)) as u32);
        }
        l.contains(&Exponent(t))
    })
}

/// One round of simultaneous removal: keep `hat_p` and the points of `l` that
/// are midpoints of distinct even points of `l`.
pub(crate) fn prune_round(l: &BTreeSet<Exponent>, hat: &BTreeSet<Exponent>) -> BTreeSet<Exponent> {
    let set: HashSet<Exponent> = l.iter().cloned().collect();
    let even: Vec<Exponent> = l.iter().filter(|p| p.is_even()).cloned().collect();
    l.iter()
        .filter(|b| hat.contains(*b) || is_mediated_point(b, &set, &even))
        .cloned()
        .collect()
}

/// Computes `P*` by the fixpoint `L <- P ∪ (L ∩ Ā(L))` starting from all
/// lattice points of the simplex.
pub fn maximal_mediated_set(hat_p: &[Exponent]) -> Result<MediatedSet, MediatedError> {
    let frame = AffineFrame::new(hat_p).ok_or(MediatedError::NotASimplex)?;
    if let Some(v) = hat_p.iter().find(|v| !v.is_even()) {
        return Err(MediatedError::OddVertex(v.clone()));
    }
    let all = lattice_points_capped(hat_p, MAX_LATTICE_POINTS)
        .ok_or(MediatedError::TooManyLatticePoints)?;
    let lattice_count = all.len();
    let hat: BTreeSet<Exponent> = hat_p.iter().cloned().collect();
    let mut l: BTreeSet<Exponent> = all.into_iter().collect();
    loop {
        let next = prune_round(&l, &hat);
        if next.len() == l.len() {
            break;
        }
        l = next;
    }
    Ok(MediatedSet {
        hat_p: hat_p.to_vec(),
        is_h_simplex: l.len() == lattice_count,
        pstar: l,
        lattice_count,
        frame,
    })
}

/// Membership of `beta` in `P*`; `beta` must lie in the simplex.
pub fn beta_in_pstar(ms: &MediatedSet, beta: &Exponent) -> Result<bool, MediatedError> {
    if !ms.frame.contains(beta) {
        return Err(MediatedError::PointOutsideSimplex(beta.clone()));
    }
    Ok(ms.pstar.contains(beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[u32]) -> Exponent {
        Exponent(v.to_vec())
    }

    fn set(v: &[&[u32]]) -> BTreeSet<Exponent> {
        v.iter().map(|p| e(p)).collect()
    }

    #[test]
    fn averages_examples() {
        assert_eq!(averages(&set(&[&[0, 0], &[2, 0]]), true), set(&[&[1, 0]]));
        assert_eq!(averages(&set(&[&[0, 0]]), false), set(&[&[0, 0]]));
        assert!(averages(&set(&[&[0, 0]]), true).is_empty());
        assert_eq!(
            averages(&set(&[&[0, 0], &[6, 0], &[0, 6]]), true),
            set(&[&[3, 0], &[0, 3], &[3, 3]])
        );
    }

    #[test]
    fn triangle_six_is_h_simplex() {
        let ms = maximal_mediated_set(&[e(&[0, 0]), e(&[6, 0]), e(&[0, 6])]).unwrap();
        assert_eq!(ms.pstar.len(), 28);
        assert!(ms.is_h_simplex);
    }

    #[test]
    fn motzkin_simplex_excludes_center() {
        let ms = maximal_mediated_set(&[e(&[0, 0]), e(&[4, 2]), e(&[2, 4])]).unwrap();
        assert!(!ms.is_h_simplex);
        assert!(!ms.contains(&e(&[2, 2])));
        assert_eq!(
            ms.pstar,
            set(&[&[0, 0], &[4, 2], &[2, 4], &[2, 1], &[1, 2], &[3, 3]])
        );
    }

    #[test]
    fn beta_membership() {
        let ms = maximal_mediated_set(&[e(&[0, 0]), e(&[6, 0]), e(&[0, 4])]).unwrap();
        assert!(beta_in_pstar(&ms, &e(&[1, 1])).unwrap());
        assert!(beta_in_pstar(&ms, &e(&[6, 0])).unwrap());
        assert!(beta_in_pstar(&ms, &e(&[3, 2])).unwrap());
        assert_eq!(
            beta_in_pstar(&ms, &e(&[6, 4])),
            Err(MediatedError::PointOutsideSimplex(e(&[6, 4])))
        );
    }

    #[test]
    fn rejects_bad_vertex_sets() {
        assert_eq!(
            maximal_mediated_set(&[e(&[0, 0]), e(&[3, 0])]).unwrap_err(),
            MediatedError::OddVertex(e(&[3, 0]))
        );
        assert_eq!(
            maximal_mediated_set(&[e(&[0, 0]), e(&[2, 2]), e(&[4, 4])]).unwrap_err(),
            MediatedError::NotASimplex
        );
        assert_eq!(
            maximal_mediated_set(&[e(&[0, 0]), e(&[2000, 0]), e(&[0, 2000])]).unwrap_err(),
            MediatedError::TooManyLatticePoints
        );
    }
}
