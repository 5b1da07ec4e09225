//! Sparse multivariate polynomials and box-constrained problem instances.
//!
//! A [`Polynomial`] is a map from [`Exponent`] vectors to nonzero real
//! coefficients. A [`PopInstance`] bundles an objective, a list of
//! constraints read as `g_i(x) >= 0`, and a finite variable box.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are rejected as zero when parsing.
pub const ZERO_COEFF: f64 = 1e-300;

/// Terms whose merged coefficient falls below this magnitude are dropped.
pub const CANCEL_TOL: f64 = 1e-14;

/// Largest accepted exponent entry (exclusive).
pub const MAX_EXPONENT: u64 = 1 << 31;

/// A vector of nonnegative integer exponents, one per variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    /// `a * e_i`: zero everywhere except entry `i`, which is `a`.
    pub fn unit(n: usize, i: usize, a: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = a;
        Exponent(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// All entries even (the origin included).
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|&e| e % 2 == 0)
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }

    /// `x^alpha`, with `0^0 = 1`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.0.len());
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e != 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A sparse polynomial in `n` variables with nonzero stored coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(n);
        if c.abs() >= CANCEL_TOL {
            p.terms.insert(Exponent::zeros(n), c);
        }
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, rejecting
    /// zero coefficients, wrong dimensions and repeated exponents.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if e.dim() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: e.dim(),
                });
            }
            if !c.is_finite() {
                return Err(Error::Malformed(format!("non-finite coefficient at {e}")));
            }
            if c.abs() < ZERO_COEFF {
                return Err(Error::ZeroCoefficient(e));
            }
            if map.contains_key(&e) {
                return Err(Error::DuplicateExponent(e));
            }
            map.insert(e, c);
        }
        Ok(Polynomial { n, terms: map })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> + '_ {
        self.terms.keys()
    }

    /// Coefficient at `e`, zero when `e` is outside the support.
    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Exponent::zeros(self.n))
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "point dimension must match variable count");
        self.terms.iter().map(|(e, &c)| c * e.monomial(x)).sum()
    }

    /// Returns `self + s * p`, dropping terms that cancel below [`CANCEL_TOL`].
    pub fn scale_add(&self, s: f64, p: &Polynomial) -> Polynomial {
        assert_eq!(self.n, p.n, "polynomials must share the variable count");
        let mut terms = self.terms.clone();
        for (e, &c) in &p.terms {
            let v = terms.get(e).copied().unwrap_or(0.0) + s * c;
            if v.abs() < CANCEL_TOL {
                terms.remove(e);
            } else {
                terms.insert(e.clone(), v);
            }
        }
        Polynomial { n: self.n, terms }
    }

    /// `p(c + y)` as a polynomial in `y`.
    pub fn translate(&self, c: &[f64]) -> Polynomial {
        assert_eq!(c.len(), self.n, "shift dimension must match variable count");
        let mut terms: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (e, &coef) in &self.terms {
            // expand prod_i (c_i + y_i)^{e_i} one variable at a time
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(self.n), coef)];
            for (i, &ei) in e.entries().iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (ei as usize + 1));
                let mut binom = 1.0f64;
                for k in 0..=ei {
                    let factor = binom * c[i].powi((ei - k) as i32);
                    if factor != 0.0 {
                        for (ks, v) in &partial {
                            let mut ks = ks.clone();
                            ks.push(k);
                            next.push((ks, v * factor));
                        }
                    }
                    binom = binom * f64::from(ei - k) / f64::from(k + 1);
                }
                partial = next;
            }
            for (ks, v) in partial {
                *terms.entry(Exponent::new(ks)).or_insert(0.0) += v;
            }
        }
        terms.retain(|_, v| *v != 0.0);
        Polynomial { n: self.n, terms }
    }

    /// `p(d_1 z_1, ..., d_n z_n)` as a polynomial in `z`.
    pub fn scale_vars(&self, d: &[f64]) -> Polynomial {
        assert_eq!(d.len(), self.n, "scale dimension must match variable count");
        let mut terms = BTreeMap::new();
        for (e, &c) in &self.terms {
            let v = c * e.monomial(d);
            if v != 0.0 {
                terms.insert(e.clone(), v);
            }
        }
        Polynomial { n: self.n, terms }
    }

    /// Drops non-constant terms below `rel` times the largest coefficient.
    /// Returns the sum of their absolute values, which bounds their
    /// contribution anywhere in `[-1, 1]^n`.
    pub fn drop_small(&self, rel: f64) -> (Polynomial, f64) {
        let big = self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut mass = 0.0;
        let mut terms = BTreeMap::new();
        for (e, &c) in &self.terms {
            if !e.is_zero() && c.abs() < rel * big {
                mass += c.abs();
            } else {
                terms.insert(e.clone(), c);
            }
        }
        (Polynomial { n: self.n, terms }, mass)
    }

    /// `self + c`.
    pub fn add_constant(&self, c: f64) -> Polynomial {
        let mut terms = self.terms.clone();
        let zero = Exponent::zeros(self.n);
        let v = terms.get(&zero).copied().unwrap_or(0.0) + c;
        if v == 0.0 {
            terms.remove(&zero);
        } else {
            terms.insert(zero, v);
        }
        Polynomial { n: self.n, terms }
    }

    pub fn total_degree(&self) -> Result<u64> {
        self.terms
            .keys()
            .map(Exponent::degree)
            .max()
            .ok_or(Error::UndefinedDegree)
    }
}

/// Relative size below which recentered coefficients are dropped.
const RECENTER_DROP: f64 = 1e-12;

/// A polynomial optimization problem `min f(x) s.t. g_i(x) >= 0, l <= x <= u`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopInstance {
    pub n: usize,
    pub objective: Polynomial,
    pub constraints: Vec<Polynomial>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

type RawTerm = (Vec<u64>, f64);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    objective: Vec<RawTerm>,
    #[serde(default)]
    constraints: Vec<Vec<RawTerm>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn raw_to_poly(n: usize, raw: Vec<RawTerm>) -> Result<Polynomial> {
    let mut terms = Vec::with_capacity(raw.len());
    for (exps, c) in raw {
        if exps.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: exps.len(),
            });
        }
        let mut e = Vec::with_capacity(n);
        for v in exps {
            if v >= MAX_EXPONENT {
                return Err(Error::DegreeOverflow(v));
            }
            e.push(v as u32);
        }
        terms.push((Exponent(e), c));
    }
    Polynomial::from_terms(n, terms)
}

fn poly_to_raw(p: &Polynomial) -> Vec<RawTerm> {
    p.terms()
        .map(|(e, c)| (e.entries().iter().map(|&v| u64::from(v)).collect(), c))
        .collect()
}

impl PopInstance {
    /// Validates and assembles an instance.
    pub fn new(
        objective: Polynomial,
        constraints: Vec<Polynomial>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.nvars();
        for g in &constraints {
            if g.nvars() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: g.nvars(),
                });
            }
        }
        for v in [&lower, &upper] {
            if v.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l > u {
                return Err(Error::InvalidBounds {
                    var: i,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(PopInstance {
            n,
            objective,
            constraints,
            lower,
            upper,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let n = raw.n;
        let objective = raw_to_poly(n, raw.objective)?;
        let constraints = raw
            .constraints
            .into_iter()
            .map(|g| raw_to_poly(n, g))
            .collect::<Result<Vec<_>>>()?;
        PopInstance::new(objective, constraints, raw.lower, raw.upper)
    }

    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            n: self.n,
            objective: poly_to_raw(&self.objective),
            constraints: self.constraints.iter().map(poly_to_raw).collect(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        };
        serde_json::to_string(&raw).expect("instance serialization cannot fail")
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// `max{|l_i|, |u_i|}` for each variable.
    pub fn box_radius(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.abs().max(u.abs()))
            .collect()
    }

    /// Copy of the instance restricted to another box.
    pub fn with_box(&self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        PopInstance::new(
            self.objective.clone(),
            self.constraints.clone(),
            lower,
            upper,
        )
    }

    /// The problem in `z` with `x = center + half_width * z`, over `[-1, 1]^n`.
    ///
    /// Negligible coefficients are dropped in the relaxing direction: their
    /// mass is subtracted from the objective and added to every constraint,
    /// so lower bounds of the result are lower bounds of the original.
    pub fn recentered(&self) -> Result<Self> {
        let center: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        let half: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (u - l))
            .collect();
        let scale: Vec<f64> = half.iter().map(|&h| if h > 0.0 { h } else { 1.0 }).collect();
        let unit: Vec<f64> = half.iter().map(|&h| if h > 0.0 { 1.0 } else { 0.0 }).collect();
        let map = |p: &Polynomial| p.translate(&center).scale_vars(&scale).drop_small(RECENTER_DROP);
        let (f, fm) = map(&self.objective);
        let constraints = self
            .constraints
            .iter()
            .map(|g| {
                let (g, gm) = map(g);
                g.add_constant(gm)
            })
            .collect();
        PopInstance::new(
            f.add_constant(-fm),
            constraints,
            unit.iter().map(|u| -u).collect(),
            unit,
        )
    }

    /// True when every constraint holds at `x` up to `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|g| g.evaluate(x) >= -tol)
    }
}
