//! Bound constraints `x_i^{a_i} <= max(|l_i|, |u_i|)^{a_i}` and the candidate
//! set / cover map they feed.
//!
//! The points `a_i * e_i` added by the bound constraints, together with the
//! origin, always cover an inner term `beta` once `sum_i beta_i / a_i <= 1`:
//! take weight `beta_i / a_i` on `a_i * e_i` and the remainder on the origin.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{barycentric_coordinates, CandidateSet, Cover, Provenance};
use crate::poly::{Exponent, PopInstance};
use crate::relaxation::LagrangianSupport;

/// `M_i^{a_i} - x_i^{a_i} >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundConstraint {
    pub var: usize,
    pub exponent: u32,
    pub big_m: f64,
}

impl BoundConstraint {
    /// The exponent `a_i * e_i` in `n` variables.
    pub fn point(&self, n: usize) -> Exponent {
        Exponent::unit(n, self.var, self.exponent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum ExponentStrategy {
    /// One exponent for every variable: the smallest even integer at least
    /// the largest inner-term degree.
    #[default]
    Uniform,
    /// Per-variable exponents, doubled until every inner term is covered.
    PerVariable,
    /// Caller-supplied exponents (must be even and at least 2).
    Fixed(Vec<u32>),
}

fn even_ceil(v: u64) -> u32 {
    let v = v.max(2);
    let e = v + (v % 2);
    u32::try_from(e).unwrap_or(u32::MAX - 1)
}

/// `true` when `sum_i beta_i / a_i <= 1`, i.e. origin plus bound points cover `beta`.
pub fn bound_points_cover(beta: &Exponent, a: &[u32]) -> bool {
    beta.entries()
        .iter()
        .zip(a)
        .map(|(&b, &ai)| f64::from(b) / f64::from(ai))
        .sum::<f64>()
        <= 1.0 + 1e-12
}

pub fn select_bound_exponents(
    inst: &PopInstance,
    inner_terms: &[Exponent],
    strategy: &ExponentStrategy,
) -> Result<Vec<u32>> {
    let n = inst.n;
    match strategy {
        ExponentStrategy::Uniform => {
            let d = inner_terms.iter().map(Exponent::degree).max().unwrap_or(0);
            Ok(vec![even_ceil(d); n])
        }
        ExponentStrategy::PerVariable => {
            let mut a: Vec<u32> = (0..n)
                .map(|i| {
                    let m = inner_terms
                        .iter()
                        .map(|b| u64::from(b.entries()[i]))
                        .max()
                        .unwrap_or(0);
                    even_ceil(m)
                })
                .collect();
            while let Some(beta) = inner_terms.iter().find(|b| !bound_points_cover(b, &a)) {
                // Double the exponent carrying the largest share of beta.
                let (i, _) = beta
                    .entries()
                    .iter()
                    .zip(&a)
                    .enumerate()
                    .map(|(i, (&b, &ai))| (i, f64::from(b) / f64::from(ai)))
                    .fold((0, f64::NEG_INFINITY), |best, cur| {
                        if cur.1 > best.1 {
                            cur
                        } else {
                            best
                        }
                    });
                a[i] = a[i].saturating_mul(2);
            }
            Ok(a)
        }
        ExponentStrategy::Fixed(a) => {
            if a.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: a.len(),
                });
            }
            if let Some(&bad) = a.iter().find(|&&v| v < 2 || v % 2 != 0) {
                return Err(Error::Malformed(format!(
                    "bound exponent {bad} must be even and at least 2"
                )));
            }
            Ok(a.clone())
        }
    }
}

pub fn make_bound_constraints(inst: &PopInstance, a: &[u32]) -> Result<Vec<BoundConstraint>> {
    if a.len() != inst.n {
        return Err(Error::Dimension {
            expected: inst.n,
            found: a.len(),
        });
    }
    inst.box_radius()
        .into_iter()
        .zip(a)
        .enumerate()
        .map(|(var, (radius, &exponent))| {
            let big_m = radius.powi(exponent as i32);
            if !big_m.is_finite() {
                return Err(Error::Numerical(format!(
                    "bound constraint for variable {var} overflows: {radius}^{exponent}"
                )));
            }
            Ok(BoundConstraint {
                var,
                exponent,
                big_m,
            })
        })
        .collect()
}

/// Candidate vertices together with one cover per inner term.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverMap {
    pub candidates: CandidateSet,
    pub covers: BTreeMap<Exponent, Cover>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoverOutcome {
    Covered(CoverMap),
    Unavailable(Exponent),
}

/// Candidate set of a Lagrangian: the origin, the even support points whose
/// objective coefficient is positive, and the bound points `a_i * e_i`.
pub fn candidate_set(lag: &LagrangianSupport, bcs: &[BoundConstraint]) -> Result<CandidateSet> {
    let n = lag.nvars();
    let mut cands = CandidateSet::new(n);
    for (e, coeff) in lag.iter() {
        if !e.is_zero() && e.is_even() && coeff.constant > 0.0 {
            cands.insert(e.clone(), Provenance::SupportEven)?;
        }
    }
    for bc in bcs {
        cands.insert(bc.point(n), Provenance::BoundConstraint)?;
    }
    Ok(cands)
}

pub fn build_candidates_and_covers(
    lag: &LagrangianSupport,
    bcs: &[BoundConstraint],
) -> Result<CoverOutcome> {
    let candidates = candidate_set(lag, bcs)?;
    let mut covers = BTreeMap::new();
    for beta in lag.exponents().filter(|e| !candidates.contains(e)) {
        match barycentric_coordinates(beta, &candidates)? {
            Some(c) => {
                covers.insert(beta.clone(), c);
            }
            None => return Ok(CoverOutcome::Unavailable(beta.clone())),
        }
    }
    Ok(CoverOutcome::Covered(CoverMap { candidates, covers }))
}
