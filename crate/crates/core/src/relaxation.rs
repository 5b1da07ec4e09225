//! Lagrangian assembly and the convex lower-bounding model.
//!
//! The Lagrangian is
//!
//! ```text
//! L(x) = f(x) - gamma - sum_i mu_i g_i(x) - sum_i nu_i (M_i^{a_i} - x_i^{a_i})
//! ```
//!
//! and each of its coefficients is an affine function of `(gamma, mu, nu)`.
//! `L` is certified nonnegative by splitting every cover vertex coefficient
//! among the circuits that use it and requiring, per inner term `beta`,
//!
//! ```text
//! |f_beta(mu)| <= t_beta <= prod_j (c_{beta,j} / lambda_j)^{lambda_j}
//! ```
//!
//! (only `-f_beta <= t_beta` when `beta` is even). The right-hand side is the
//! circuit number, a weighted geometric mean and therefore concave, so the
//! whole model is convex in `(gamma, mu, nu, t, c)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::covers::{BoundConstraint, CoverMap};
use crate::error::{Error, Result};
use crate::geometry::Sidedness;
use crate::poly::{Exponent, PopInstance};

/// `constant + gamma_coeff * gamma + sum mu_terms[i] mu_i + sum nu_terms[i] nu_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineCoeff {
    pub constant: f64,
    /// Keyed by constraint index.
    pub mu_terms: BTreeMap<usize, f64>,
    /// Keyed by variable index.
    pub nu_terms: BTreeMap<usize, f64>,
    pub gamma_coeff: f64,
}

impl AffineCoeff {
    /// Value at `(gamma, mu, nu)`; `nu` is indexed by variable.
    pub fn eval(&self, gamma: f64, mu: &[f64], nu: &[f64]) -> f64 {
        self.constant
            + self.gamma_coeff * gamma
            + self.mu_terms.iter().map(|(&i, &a)| a * mu[i]).sum::<f64>()
            + self.nu_terms.iter().map(|(&i, &a)| a * nu[i]).sum::<f64>()
    }

    /// Value with `gamma` left out.
    pub fn eval_without_gamma(&self, mu: &[f64], nu: &[f64]) -> f64 {
        self.eval(0.0, mu, nu)
    }

    /// True when the coefficient is the constant zero.
    pub fn is_zero(&self) -> bool {
        self.constant == 0.0
            && self.gamma_coeff == 0.0
            && self.mu_terms.values().all(|&v| v == 0.0)
            && self.nu_terms.values().all(|&v| v == 0.0)
    }
}

/// The Lagrangian's support with multiplier-affine coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSupport {
    n: usize,
    m: usize,
    coeffs: BTreeMap<Exponent, AffineCoeff>,
    bounds: Vec<BoundConstraint>,
}

impl LagrangianSupport {
    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn num_constraints(&self) -> usize {
        self.m
    }

    pub fn bounds(&self) -> &[BoundConstraint] {
        &self.bounds
    }

    pub fn coeff(&self, e: &Exponent) -> Option<&AffineCoeff> {
        self.coeffs.get(e)
    }

    pub fn origin(&self) -> &AffineCoeff {
        &self.coeffs[&Exponent::zeros(self.n)]
    }

    pub fn exponents(&self) -> impl Iterator<Item = &Exponent> + '_ {
        self.coeffs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, &AffineCoeff)> + '_ {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

pub fn assemble_lagrangian(inst: &PopInstance, bcs: &[BoundConstraint]) -> LagrangianSupport {
    let n = inst.n;
    let mut coeffs: BTreeMap<Exponent, AffineCoeff> = BTreeMap::new();
    let origin = Exponent::zeros(n);
    coeffs.entry(origin.clone()).or_default().gamma_coeff = -1.0;
    for (e, c) in inst.objective.terms() {
        coeffs.entry(e.clone()).or_default().constant += c;
    }
    for (i, g) in inst.constraints.iter().enumerate() {
        for (e, c) in g.terms() {
            *coeffs
                .entry(e.clone())
                .or_default()
                .mu_terms
                .entry(i)
                .or_default() -= c;
        }
    }
    for bc in bcs {
        *coeffs
            .get_mut(&origin)
            .expect("origin present")
            .nu_terms
            .entry(bc.var)
            .or_default() -= bc.big_m;
        *coeffs
            .entry(bc.point(n))
            .or_default()
            .nu_terms
            .entry(bc.var)
            .or_default() += 1.0;
    }
    LagrangianSupport {
        n,
        m: inst.num_constraints(),
        coeffs,
        bounds: bcs.to_vec(),
    }
}

/// `sum terms[k].1 * x[terms[k].0] + constant >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
    pub label: String,
}

impl LinearConstraint {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }
}

/// `x[t] <= prod_j (x[c_j] / lambda_j)^{lambda_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoConstraint {
    pub t: usize,
    pub factors: Vec<(usize, f64)>,
}

/// Weighted geometric mean `prod_j (c_j / lambda_j)^{lambda_j}`, the circuit number.
pub fn circuit_number(c: &[f64], lambda: &[f64]) -> f64 {
    debug_assert_eq!(c.len(), lambda.len());
    if c.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    c.iter()
        .zip(lambda)
        .map(|(&cj, &lj)| lj * (cj / lj).ln())
        .sum::<f64>()
        .exp()
}

impl GeoConstraint {
    pub fn value(&self, x: &[f64]) -> f64 {
        let c: Vec<f64> = self.factors.iter().map(|&(j, _)| x[j]).collect();
        let l: Vec<f64> = self.factors.iter().map(|&(_, w)| w).collect();
        circuit_number(&c, &l)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitVertex {
    /// Index into the candidate set.
    pub cand: usize,
    pub lambda: f64,
    /// Model variable holding `c_{beta,j}`.
    pub var: usize,
}

/// One circuit: inner term, its coefficient and its cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub beta: Exponent,
    pub sidedness: Sidedness,
    pub coeff: AffineCoeff,
    pub t_var: usize,
    pub vertices: Vec<CircuitVertex>,
}

impl Circuit {
    /// The magnitude the circuit number has to dominate.
    pub fn required(&self, mu: &[f64], nu: &[f64]) -> f64 {
        let f = self.coeff.eval_without_gamma(mu, nu);
        match self.sidedness {
            Sidedness::TwoSided => f.abs(),
            Sidedness::OneSided => (-f).max(0.0),
        }
    }
}

/// A candidate vertex and the splitting variables drawing on its coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexRow {
    pub exponent: Exponent,
    pub cand: usize,
    pub coeff: AffineCoeff,
    pub c_vars: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Gamma,
    Mu,
    Nu,
    T,
    C,
}

/// Convex program: maximize `gamma` subject to linear and geometric-mean constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationModel {
    pub n: usize,
    pub m: usize,
    /// Variable index per bound-constrained variable (`None` without bounds).
    pub nu_vars: Vec<Option<usize>>,
    pub bounds: Vec<BoundConstraint>,
    pub kinds: Vec<VarKind>,
    pub names: Vec<String>,
    pub linear: Vec<LinearConstraint>,
    pub geo: Vec<GeoConstraint>,
    pub circuits: Vec<Circuit>,
    pub vertex_rows: Vec<VertexRow>,
    pub covers: CoverMap,
    /// Index into `linear` of the origin budget, the only row containing `gamma`.
    pub origin_row: usize,
}

pub const GAMMA_VAR: usize = 0;

impl RelaxationModel {
    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn mu_var(&self, i: usize) -> usize {
        1 + i
    }

    /// `mu` and `nu` (indexed by variable, zero when unbounded) read from `x`.
    pub fn multipliers(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mu = (0..self.m).map(|i| x[self.mu_var(i)]).collect();
        let nu = self
            .nu_vars
            .iter()
            .map(|v| v.map_or(0.0, |j| x[j]))
            .collect();
        (mu, nu)
    }

    /// Origin coefficient minus the origin splittings, with `gamma` left out:
    /// the largest `gamma` compatible with the rest of `x`.
    pub fn origin_budget(&self, x: &[f64]) -> f64 {
        let row = &self.linear[self.origin_row];
        row.constant
            + row
                .terms
                .iter()
                .filter(|&&(j, _)| j != GAMMA_VAR)
                .map(|&(j, a)| a * x[j])
                .sum::<f64>()
    }

    /// Largest violation of any constraint at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let lin = self
            .linear
            .iter()
            .map(|c| (-c.value(x)).max(0.0))
            .fold(0.0, f64::max);
        self.geo
            .iter()
            .map(|g| (x[g.t] - g.value(x)).max(0.0))
            .fold(lin, f64::max)
    }

    /// Text dump, one constraint per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "MAX gamma");
        for c in &self.linear {
            let _ = write!(s, "LIN {}:", c.label);
            for &(j, a) in &c.terms {
                let _ = write!(s, " {:+} {}", a, self.names[j]);
            }
            let _ = writeln!(s, " {:+} >= 0", c.constant);
        }
        for g in &self.geo {
            let _ = write!(s, "GEO {} <= prod", self.names[g.t]);
            for &(j, l) in &g.factors {
                let _ = write!(s, " ({}/{l})^{l}", self.names[j]);
            }
            let _ = writeln!(s);
        }
        s
    }
}

struct Builder {
    kinds: Vec<VarKind>,
    names: Vec<String>,
    linear: Vec<LinearConstraint>,
}

impl Builder {
    fn var(&mut self, kind: VarKind, name: String) -> usize {
        self.kinds.push(kind);
        self.names.push(name);
        self.kinds.len() - 1
    }

    fn affine_terms(
        coeff: &AffineCoeff,
        mu_var: impl Fn(usize) -> usize,
        nu_vars: &[Option<usize>],
    ) -> Result<Vec<(usize, f64)>> {
        let mut terms = Vec::new();
        if coeff.gamma_coeff != 0.0 {
            terms.push((GAMMA_VAR, coeff.gamma_coeff));
        }
        for (&i, &a) in &coeff.mu_terms {
            terms.push((mu_var(i), a));
        }
        for (&i, &a) in &coeff.nu_terms {
            let j = nu_vars.get(i).copied().flatten().ok_or_else(|| {
                Error::Malformed(format!("nu term for unbounded variable {i}"))
            })?;
            terms.push((j, a));
        }
        Ok(terms)
    }
}

pub fn build_model(lag: &LagrangianSupport, covers: &CoverMap) -> Result<RelaxationModel> {
    let n = lag.nvars();
    let m = lag.num_constraints();
    let cands = &covers.candidates;
    let mut b = Builder {
        kinds: Vec::new(),
        names: Vec::new(),
        linear: Vec::new(),
    };
    b.var(VarKind::Gamma, "gamma".into());
    for i in 0..m {
        let j = b.var(VarKind::Mu, format!("mu[{i}]"));
        b.linear.push(LinearConstraint {
            terms: vec![(j, 1.0)],
            constant: 0.0,
            label: format!("mu[{i}]>=0"),
        });
    }
    let mut nu_vars = vec![None; n];
    for bc in lag.bounds() {
        let j = b.var(VarKind::Nu, format!("nu[{}]", bc.var));
        nu_vars[bc.var] = Some(j);
        b.linear.push(LinearConstraint {
            terms: vec![(j, 1.0)],
            constant: 0.0,
            label: format!("nu[{}]>=0", bc.var),
        });
    }
    let mu_var = |i: usize| 1 + i;

    let mut splits: Vec<Vec<usize>> = vec![Vec::new(); cands.len()];
    let mut circuits = Vec::new();
    for beta in lag.exponents().filter(|e| !cands.contains(e)) {
        let coeff = lag.coeff(beta).expect("exponent from lag").clone();
        let sidedness = Sidedness::of(beta);
        if sidedness == Sidedness::OneSided && coeff.is_zero() {
            continue;
        }
        let cover = covers
            .covers
            .get(beta)
            .ok_or_else(|| Error::CoverUnavailable(beta.clone()))?;
        let t_var = b.var(VarKind::T, format!("t[{beta}]"));
        let mut vertices = Vec::with_capacity(cover.weights.len());
        for &(cand, lambda) in &cover.weights {
            let var = b.var(VarKind::C, format!("c[{beta},{}]", cands.point(cand)));
            splits[cand].push(var);
            vertices.push(CircuitVertex { cand, lambda, var });
        }
        b.linear.push(LinearConstraint {
            terms: vec![(t_var, 1.0)],
            constant: 0.0,
            label: format!("t[{beta}]>=0"),
        });
        let fterms = Builder::affine_terms(&coeff, mu_var, &nu_vars)?;
        // t + f >= 0 always; t - f >= 0 for two-sided terms.
        let mut plus = vec![(t_var, 1.0)];
        plus.extend(fterms.iter().copied());
        b.linear.push(LinearConstraint {
            terms: plus,
            constant: coeff.constant,
            label: format!("t[{beta}]>=-f"),
        });
        if sidedness == Sidedness::TwoSided {
            let mut minus = vec![(t_var, 1.0)];
            minus.extend(fterms.iter().map(|&(j, a)| (j, -a)));
            b.linear.push(LinearConstraint {
                terms: minus,
                constant: -coeff.constant,
                label: format!("t[{beta}]>=f"),
            });
        }
        circuits.push(Circuit {
            beta: beta.clone(),
            sidedness,
            coeff,
            t_var,
            vertices,
        });
    }

    let mut vertex_rows = Vec::with_capacity(cands.len());
    let origin_row = b.linear.len();
    for (cand, (e, _)) in cands.iter().enumerate() {
        let coeff = lag.coeff(e).cloned().unwrap_or_default();
        let mut terms = Builder::affine_terms(&coeff, mu_var, &nu_vars)?;
        terms.extend(splits[cand].iter().map(|&j| (j, -1.0)));
        b.linear.push(LinearConstraint {
            terms,
            constant: coeff.constant,
            label: format!("split{e}"),
        });
        vertex_rows.push(VertexRow {
            exponent: e.clone(),
            cand,
            coeff,
            c_vars: splits[cand].clone(),
        });
    }

    let geo = circuits
        .iter()
        .map(|c| GeoConstraint {
            t: c.t_var,
            factors: c.vertices.iter().map(|v| (v.var, v.lambda)).collect(),
        })
        .collect();

    Ok(RelaxationModel {
        n,
        m,
        nu_vars,
        bounds: lag.bounds().to_vec(),
        kinds: b.kinds,
        names: b.names,
        linear: b.linear,
        geo,
        circuits,
        vertex_rows,
        covers: covers.clone(),
        origin_row,
    })
}
