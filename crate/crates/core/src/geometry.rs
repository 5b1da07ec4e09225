//! Newton-polytope geometry: vertex detection, support classification and
//! barycentric covers of inner terms.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpError, LpProblem};
use crate::poly::Exponent;
use crate::relaxation::LagrangianSupport;

/// Tolerance on cover reconstruction.
pub const COVER_TOL: f64 = 1e-9;

/// Weights below this are treated as structural zeros.
const WEIGHT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Origin,
    SupportEven,
    BoundConstraint,
}

/// Even exponents available as cover vertices. Index 0 is always the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    points: Vec<(Exponent, Provenance)>,
}

impl CandidateSet {
    /// A set holding only the origin of `n`-space.
    pub fn new(n: usize) -> Self {
        CandidateSet {
            points: vec![(Exponent::zeros(n), Provenance::Origin)],
        }
    }

    pub fn dim(&self) -> usize {
        self.points[0].0.dim()
    }

    /// Adds an even point; returns its index. Points already present keep
    /// their first provenance tag.
    pub fn insert(&mut self, e: Exponent, tag: Provenance) -> Result<usize> {
        if e.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: e.dim(),
            });
        }
        if !e.is_even() {
            return Err(Error::Malformed(format!(
                "cover candidate {e} has an odd entry"
            )));
        }
        if let Some(i) = self.index_of(&e) {
            return Ok(i);
        }
        self.points.push((e, tag));
        Ok(self.points.len() - 1)
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.points.iter().position(|(p, _)| p == e)
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.index_of(e).is_some()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &Exponent {
        &self.points[i].0
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        self.points[i].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, Provenance)> + '_ {
        self.points.iter().map(|(e, t)| (e, *t))
    }
}

/// Barycentric certificate that `beta` lies in the hull of some candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub beta: Exponent,
    /// `(candidate index, weight)` with strictly positive weights, sorted by index.
    pub weights: Vec<(usize, f64)>,
}

impl Cover {
    /// Weight on the origin (candidate 0).
    pub fn origin_weight(&self) -> f64 {
        self.weights
            .iter()
            .find(|(j, _)| *j == 0)
            .map_or(0.0, |&(_, w)| w)
    }

    /// `max(|sum w - 1|, ||sum w_j p_j - beta||_inf)`.
    pub fn residual(&self, cands: &CandidateSet) -> f64 {
        let n = self.beta.dim();
        let mut acc = vec![0.0; n];
        let mut total = 0.0;
        for &(j, w) in &self.weights {
            total += w;
            for (a, &p) in acc.iter_mut().zip(cands.point(j).entries()) {
                *a += w * f64::from(p);
            }
        }
        acc.iter()
            .zip(self.beta.entries())
            .map(|(a, &b)| (a - f64::from(b)).abs())
            .fold((total - 1.0).abs(), f64::max)
    }
}

/// Whether an inner term needs both signs of its coefficient controlled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sidedness {
    /// Some entry is odd: `|f_beta| <= theta`.
    TwoSided,
    /// All entries even: only `-f_beta <= theta`.
    OneSided,
}

impl Sidedness {
    pub fn of(beta: &Exponent) -> Self {
        if beta.is_even() {
            Sidedness::OneSided
        } else {
            Sidedness::TwoSided
        }
    }
}

/// Result of splitting a Lagrangian support into cover vertices and inner terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub candidates: Vec<Exponent>,
    pub inner: Vec<(Exponent, Sidedness)>,
}

pub fn is_monomial_square(e: &Exponent, coeff: f64) -> bool {
    e.is_even() && coeff >= 0.0
}

/// Convex-combination LP: is `target` in `conv(points)`? Maximizes the weight
/// of `points[prefer]` when given.
fn hull_lp(points: &[&Exponent], target: &Exponent, prefer: Option<usize>) -> LpProblem {
    let n = target.dim();
    let k = points.len();
    let mut a = Vec::with_capacity(n + 1);
    a.push(vec![1.0; k]);
    for d in 0..n {
        a.push(points.iter().map(|p| f64::from(p.entries()[d])).collect());
    }
    let mut b = vec![1.0];
    b.extend(target.entries().iter().map(|&v| f64::from(v)));
    let mut objective = vec![0.0; k];
    if let Some(j) = prefer {
        objective[j] = 1.0;
    }
    LpProblem { a, b, objective }
}

/// Points of `support` that are vertices of its convex hull.
pub fn polytope_vertices(support: &[Exponent]) -> Result<Vec<Exponent>> {
    let unique: BTreeSet<&Exponent> = support.iter().collect();
    let pts: Vec<&Exponent> = unique.into_iter().collect();
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let others: Vec<&Exponent> = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| *q)
            .collect();
        if others.is_empty() {
            out.push((*p).clone());
            continue;
        }
        match lp_solve(&hull_lp(&others, p, None)) {
            Ok(_) => {}
            Err(LpError::Infeasible) => out.push((*p).clone()),
            Err(e) => return Err(Error::Numerical(e.to_string())),
        }
    }
    Ok(out)
}

/// Splits the Lagrangian support: candidates are the points of `cands`,
/// every other support exponent is an inner term.
pub fn classify_support(lag: &LagrangianSupport, cands: &CandidateSet) -> Classification {
    let candidates = cands.iter().map(|(e, _)| e.clone()).collect();
    let inner = lag
        .exponents()
        .filter(|e| !cands.contains(e))
        .map(|e| (e.clone(), Sidedness::of(e)))
        .collect();
    Classification { candidates, inner }
}

/// Barycentric coordinates of `beta` over `cands`, preferring origin weight.
///
/// Returns `Ok(None)` when `beta` is outside the hull of the candidates.
pub fn barycentric_coordinates(beta: &Exponent, cands: &CandidateSet) -> Result<Option<Cover>> {
    if beta.dim() != cands.dim() {
        return Err(Error::Dimension {
            expected: cands.dim(),
            found: beta.dim(),
        });
    }
    let pts: Vec<&Exponent> = cands.iter().map(|(e, _)| e).collect();
    let sol = match lp_solve(&hull_lp(&pts, beta, Some(0))) {
        Ok(s) => s,
        Err(LpError::Infeasible) => return Ok(None),
        Err(e) => return Err(Error::Numerical(e.to_string())),
    };
    let mut weights: Vec<(usize, f64)> = sol
        .x
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > WEIGHT_EPS)
        .map(|(j, &w)| (j, w))
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    for (_, w) in weights.iter_mut() {
        *w /= total;
    }
    let cover = Cover {
        beta: beta.clone(),
        weights,
    };
    if cover.residual(cands) > COVER_TOL {
        return Err(Error::Numerical(format!(
            "cover of {beta} has residual {:e}",
            cover.residual(cands)
        )));
    }
    Ok(Some(cover))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    fn cands(n: usize, pts: &[&[u32]]) -> CandidateSet {
        let mut c = CandidateSet::new(n);
        for p in pts {
            c.insert(e(p), Provenance::SupportEven).unwrap();
        }
        c
    }

    #[test]
    fn monomial_square_examples() {
        assert!(is_monomial_square(&e(&[4, 2]), 1.0));
        assert!(!is_monomial_square(&e(&[2, 2]), -3.0));
        assert!(!is_monomial_square(&e(&[1, 0]), 5.0));
    }

    #[test]
    fn vertices_examples() {
        let v = polytope_vertices(&[e(&[0, 0]), e(&[2, 0]), e(&[0, 2]), e(&[1, 1])]).unwrap();
        assert_eq!(v, vec![e(&[0, 0]), e(&[0, 2]), e(&[2, 0])]);
        let m = polytope_vertices(&[e(&[4, 2]), e(&[2, 4]), e(&[2, 2]), e(&[0, 0])]).unwrap();
        assert_eq!(m, vec![e(&[0, 0]), e(&[2, 4]), e(&[4, 2])]);
        assert_eq!(polytope_vertices(&[e(&[0, 0])]).unwrap(), vec![e(&[0, 0])]);
    }

    #[test]
    fn motzkin_cover_is_thirds() {
        let c = cands(2, &[&[4, 2], &[2, 4]]);
        let cover = barycentric_coordinates(&e(&[2, 2]), &c).unwrap().unwrap();
        assert_eq!(cover.weights.len(), 3);
        for &(_, w) in &cover.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoint_and_unavailable() {
        let c = cands(1, &[&[2]]);
        let cover = barycentric_coordinates(&e(&[1]), &c).unwrap().unwrap();
        assert_eq!(cover.weights, vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(barycentric_coordinates(&e(&[3]), &c).unwrap(), None);
    }

    #[test]
    fn origin_weight_is_preferred() {
        // (2,2) is both the midpoint of (4,0),(0,4) and a third-combination
        // that uses the origin.
        let c = cands(2, &[&[4, 0], &[0, 4], &[4, 2], &[2, 4]]);
        let cover = barycentric_coordinates(&e(&[2, 2]), &c).unwrap().unwrap();
        assert!((cover.origin_weight() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn candidate_set_rejects_odd_points_and_dedups() {
        let mut c = CandidateSet::new(2);
        assert!(c.insert(e(&[1, 0]), Provenance::SupportEven).is_err());
        let i = c.insert(e(&[2, 0]), Provenance::SupportEven).unwrap();
        let j = c.insert(e(&[2, 0]), Provenance::BoundConstraint).unwrap();
        assert_eq!(i, j);
        assert_eq!(c.provenance(i), Provenance::SupportEven);
        assert_eq!(c.insert(e(&[0, 0]), Provenance::SupportEven).unwrap(), 0);
    }
}
