//! A-posteriori repair of solver output into a certified bound.
//!
//! The solver only returns an approximately feasible point. Repair clamps the
//! multipliers, shrinks vertex splittings until every leftover coefficient is
//! nonnegative, and then recomputes each circuit's origin share in closed
//! form: with `P = prod_{j != 0} (c_j / lambda_j)^{lambda_j}`, the smallest
//! origin coefficient that makes the circuit number reach `r` is
//! `c_0 = lambda_0 (r / P)^{1 / lambda_0}`. Because `gamma` appears only in
//! the origin coefficient, the bound follows by subtraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Exponent, PopInstance};
use crate::relaxation::{circuit_number, RelaxationModel};
use crate::solver::{SolveResult, Status};

/// How the closed-form origin share is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RepairMode {
    /// Plain floating point, followed by an exact floating-point check.
    #[default]
    Standard,
    /// Outward-rounded interval evaluation of every operation.
    Strict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedCircuit {
    pub beta: Exponent,
    pub vertices: Vec<Exponent>,
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
    /// `|f_beta(mu)|`, or `max(0, -f_beta(mu))` for even `beta`.
    pub required: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub gamma: f64,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub circuits: Vec<CertifiedCircuit>,
    /// Per candidate vertex: coefficient minus everything the circuits draw.
    pub leftovers: Vec<(Exponent, f64)>,
    pub mode: RepairMode,
}

#[derive(Serialize)]
struct CircuitJson<'a> {
    beta: &'a Exponent,
    lambda: Vec<(&'a Exponent, f64)>,
    c: Vec<(&'a Exponent, f64)>,
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    gamma: f64,
    mu: &'a [f64],
    nu: &'a [f64],
    circuits: Vec<CircuitJson<'a>>,
    leftovers: Vec<(&'a Exponent, f64)>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        let doc = CertificateJson {
            gamma: self.gamma,
            mu: &self.mu,
            nu: &self.nu,
            circuits: self
                .circuits
                .iter()
                .map(|c| CircuitJson {
                    beta: &c.beta,
                    lambda: c.vertices.iter().zip(c.lambda.iter().copied()).collect(),
                    c: c.vertices.iter().zip(c.c.iter().copied()).collect(),
                })
                .collect(),
            leftovers: self.leftovers.iter().map(|(e, v)| (e, *v)).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("certificate serialization cannot fail")
    }

    /// Re-packs the certificate as a solver result for `model`.
    pub fn to_solve_result(&self, model: &RelaxationModel) -> SolveResult {
        let mut x = vec![0.0; model.num_vars()];
        x[crate::relaxation::GAMMA_VAR] = self.gamma;
        for i in 0..model.m {
            x[model.mu_var(i)] = self.mu[i];
        }
        for (i, v) in model.nu_vars.iter().enumerate() {
            if let Some(j) = v {
                x[*j] = self.nu[i];
            }
        }
        for (circ, cert) in model.circuits.iter().zip(&self.circuits) {
            x[circ.t_var] = cert.required;
            for (v, &c) in circ.vertices.iter().zip(&cert.c) {
                x[v.var] = c;
            }
        }
        SolveResult::from_point(model, x, Status::Optimal)
    }

    /// Checks leftovers and circuit conditions in plain floating point.
    pub fn verify(&self) -> bool {
        self.leftovers.iter().all(|(_, v)| *v >= 0.0)
            && self
                .circuits
                .iter()
                .all(|c| c.required == 0.0 || circuit_number(&c.c, &c.lambda) >= c.required)
    }
}

/// Outward-rounded helpers; libm transcendental functions are padded by two ulps.
mod outward {
    pub fn down(v: f64) -> f64 {
        v.next_down()
    }
    pub fn up(v: f64) -> f64 {
        v.next_up()
    }
    pub fn ln_down(v: f64) -> f64 {
        down(down(v.ln()))
    }
    pub fn ln_up(v: f64) -> f64 {
        up(up(v.ln()))
    }
    pub fn exp_down(v: f64) -> f64 {
        down(down(v.exp())).max(0.0)
    }
    pub fn exp_up(v: f64) -> f64 {
        up(up(v.exp()))
    }
}

/// Lower bound on `sum lambda_j ln(c_j / lambda_j)` (or upper when `upward`).
fn log_product(c: &[f64], lambda: &[f64], mode: RepairMode, upward: bool) -> f64 {
    match mode {
        RepairMode::Standard => c
            .iter()
            .zip(lambda)
            .map(|(&cj, &lj)| lj * (cj / lj).ln())
            .sum(),
        RepairMode::Strict => {
            let mut acc = 0.0f64;
            for (&cj, &lj) in c.iter().zip(lambda) {
                let term = if upward {
                    outward::up(lj * outward::ln_up(outward::up(cj / lj)))
                } else {
                    outward::down(lj * outward::ln_down(outward::down(cj / lj)))
                };
                acc = if upward {
                    outward::up(acc + term)
                } else {
                    outward::down(acc + term)
                };
            }
            acc
        }
    }
}

fn circuit_holds(c: &[f64], lambda: &[f64], required: f64, mode: RepairMode) -> bool {
    if required <= 0.0 {
        return true;
    }
    if c.iter().any(|&v| v <= 0.0) {
        return false;
    }
    let lp = log_product(c, lambda, mode, false);
    match mode {
        RepairMode::Standard => lp.exp() >= required,
        RepairMode::Strict => outward::exp_down(lp) >= required,
    }
}

/// Sum rounded down (strict) or plain.
fn sum_down(vals: impl Iterator<Item = f64>, mode: RepairMode) -> f64 {
    match mode {
        RepairMode::Standard => vals.sum(),
        RepairMode::Strict => vals.fold(0.0, |a, v| outward::down(a + v)),
    }
}

pub fn repair_and_certify(
    model: &RelaxationModel,
    res: &SolveResult,
    mode: RepairMode,
) -> Result<Certificate> {
    if res.status != Status::Optimal {
        return Err(Error::RepairFailure(format!(
            "solver status is {}",
            res.status
        )));
    }
    let mu: Vec<f64> = res.mu.iter().map(|v| v.max(0.0)).collect();
    let nu: Vec<f64> = res.nu.iter().map(|v| v.max(0.0)).collect();
    let mut c: Vec<Vec<f64>> = res
        .c
        .iter()
        .map(|cs| cs.iter().map(|v| v.max(0.0)).collect())
        .collect();

    // locate (circuit, vertex) for each splitting variable of each candidate
    let mut owners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); model.vertex_rows.len()];
    for (ci, circ) in model.circuits.iter().enumerate() {
        for (vi, v) in circ.vertices.iter().enumerate() {
            owners[v.cand].push((ci, vi));
        }
    }

    // shrink non-origin splittings to fit their vertex coefficient
    let mut coeffs = vec![0.0; model.vertex_rows.len()];
    for row in &model.vertex_rows {
        if row.cand == 0 {
            continue;
        }
        let coeff = row.coeff.eval_without_gamma(&mu, &nu);
        coeffs[row.cand] = coeff;
        if coeff < 0.0 {
            return Err(Error::RepairFailure(format!(
                "negative coefficient {coeff:e} at vertex {}",
                row.exponent
            )));
        }
        let total = |c: &Vec<Vec<f64>>| owners[row.cand].iter().map(|&(ci, vi)| c[ci][vi]).sum();
        let sum: f64 = total(&c);
        if sum > coeff {
            let mut scale = coeff / sum;
            loop {
                for &(ci, vi) in &owners[row.cand] {
                    c[ci][vi] = res.c[ci][vi].max(0.0) * scale;
                }
                if total(&c) <= coeff {
                    break;
                }
                scale *= 1.0 - 4.0 * f64::EPSILON;
            }
        }
    }

    // closed-form origin shares
    let mut required = vec![0.0; model.circuits.len()];
    for (ci, circ) in model.circuits.iter().enumerate() {
        let req = circ.required(&mu, &nu);
        let req = match mode {
            RepairMode::Standard => req,
            RepairMode::Strict => outward::up(req),
        };
        required[ci] = req;
        let lambda: Vec<f64> = circ.vertices.iter().map(|v| v.lambda).collect();
        let origin = circ.vertices.iter().position(|v| v.cand == 0);
        match origin {
            Some(o) => {
                let l0 = lambda[o];
                if req <= 0.0 {
                    c[ci][o] = 0.0;
                    continue;
                }
                let (rest_c, rest_l): (Vec<f64>, Vec<f64>) = c[ci]
                    .iter()
                    .zip(&lambda)
                    .enumerate()
                    .filter(|&(k, _)| k != o)
                    .map(|(_, (&cv, &lv))| (cv, lv))
                    .unzip();
                if rest_c.iter().any(|&v| v <= 0.0) {
                    return Err(Error::RepairFailure(format!(
                        "circuit {} has an empty vertex but |f| = {req:e}",
                        circ.beta
                    )));
                }
                // ln c0 = ln l0 + (ln req - ln P) / l0, rounded up when strict
                let c0 = match mode {
                    RepairMode::Standard => {
                        let lp = log_product(&rest_c, &rest_l, mode, false);
                        l0 * ((req.ln() - lp) / l0).exp()
                    }
                    RepairMode::Strict => {
                        let lp = log_product(&rest_c, &rest_l, mode, false);
                        let num = outward::up(outward::ln_up(req) - lp);
                        let expo = outward::up(num / l0);
                        outward::up(l0 * outward::exp_up(expo))
                    }
                };
                c[ci][o] = c0;
                let mut guard = 0;
                while !circuit_holds(&c[ci], &lambda, req, mode) {
                    c[ci][o] *= 1.0 + 4.0 * f64::EPSILON;
                    guard += 1;
                    if guard > 64 || !c[ci][o].is_finite() {
                        return Err(Error::RepairFailure(format!(
                            "origin share of circuit {} does not converge",
                            circ.beta
                        )));
                    }
                }
            }
            None => {
                if circuit_holds(&c[ci], &lambda, req, mode) {
                    continue;
                }
                // No origin vertex: grow the circuit into vertex leftovers.
                let theta = circuit_number(&c[ci], &lambda);
                if theta <= 0.0 {
                    return Err(Error::RepairFailure(format!(
                        "circuit {} has no origin vertex and a zero circuit number",
                        circ.beta
                    )));
                }
                let ratio = req / theta * (1.0 + 8.0 * f64::EPSILON);
                for (vi, v) in circ.vertices.iter().enumerate() {
                    let grown = c[ci][vi] * ratio;
                    let others: f64 = owners[v.cand]
                        .iter()
                        .filter(|&&(cj, _)| cj != ci)
                        .map(|&(cj, vj)| c[cj][vj])
                        .sum();
                    if others + grown > coeffs[v.cand] {
                        return Err(Error::RepairFailure(format!(
                            "circuit {} lacks an origin vertex and slack to absorb the repair",
                            circ.beta
                        )));
                    }
                    c[ci][vi] = grown;
                }
                if !circuit_holds(&c[ci], &lambda, req, mode) {
                    return Err(Error::RepairFailure(format!(
                        "circuit {} cannot be repaired without an origin vertex",
                        circ.beta
                    )));
                }
            }
        }
    }

    // bound from the origin coefficient
    let origin_coeff = model.vertex_rows[0].coeff.eval_without_gamma(&mu, &nu);
    let origin_draw: f64 = match mode {
        RepairMode::Standard => owners[0].iter().map(|&(ci, vi)| c[ci][vi]).sum(),
        RepairMode::Strict => owners[0]
            .iter()
            .fold(0.0, |a, &(ci, vi)| outward::up(a + c[ci][vi])),
    };
    let formula = match mode {
        RepairMode::Standard => origin_coeff - origin_draw,
        RepairMode::Strict => {
            let terms = std::iter::once(model.vertex_rows[0].coeff.constant)
                .chain(
                    model.vertex_rows[0]
                        .coeff
                        .mu_terms
                        .iter()
                        .map(|(&i, &a)| a * mu[i]),
                )
                .chain(
                    model.vertex_rows[0]
                        .coeff
                        .nu_terms
                        .iter()
                        .map(|(&i, &a)| a * nu[i]),
                )
                .map(outward::down);
            outward::down(sum_down(terms, mode) - origin_draw)
        }
    };
    if !formula.is_finite() {
        return Err(Error::RepairFailure("non-finite certified bound".into()));
    }
    let gamma = if res.gamma.is_finite() {
        formula.min(res.gamma)
    } else {
        formula
    };

    let mut leftovers = Vec::with_capacity(model.vertex_rows.len());
    for row in &model.vertex_rows {
        let drawn: f64 = owners[row.cand].iter().map(|&(ci, vi)| c[ci][vi]).sum();
        let left = if row.cand == 0 {
            formula - gamma
        } else {
            coeffs[row.cand] - drawn
        };
        leftovers.push((row.exponent.clone(), left));
    }

    let circuits = model
        .circuits
        .iter()
        .zip(c)
        .zip(required)
        .map(|((circ, cs), req)| CertifiedCircuit {
            beta: circ.beta.clone(),
            vertices: circ
                .vertices
                .iter()
                .map(|v| model.covers.candidates.point(v.cand).clone())
                .collect(),
            lambda: circ.vertices.iter().map(|v| v.lambda).collect(),
            c: cs,
            required: req,
        })
        .collect();

    Ok(Certificate {
        gamma,
        mu,
        nu,
        circuits,
        leftovers,
        mode,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport {
    pub samples: usize,
    pub feasible: usize,
    pub violations: usize,
    /// `min f(x) - gamma` over feasible samples.
    pub min_slack: Option<f64>,
    pub argmin: Option<Vec<f64>>,
}

impl SoundnessReport {
    /// No feasible sample was drawn.
    pub fn is_vacuous(&self) -> bool {
        self.feasible == 0
    }
}

/// Samples the box uniformly and checks `f(x) >= gamma - 1e-6 (1 + |gamma|)`
/// at every sample satisfying all constraints up to `1e-9`.
pub fn sample_soundness_check(
    inst: &PopInstance,
    gamma: f64,
    k: usize,
    seed: u64,
) -> SoundnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-6 * (1.0 + gamma.abs());
    let mut report = SoundnessReport {
        samples: k,
        feasible: 0,
        violations: 0,
        min_slack: None,
        argmin: None,
    };
    let mut x = vec![0.0; inst.n];
    for _ in 0..k {
        for (i, xi) in x.iter_mut().enumerate() {
            let (l, u) = (inst.lower[i], inst.upper[i]);
            *xi = l + (u - l) * rng.gen::<f64>();
        }
        if !inst.is_feasible(&x, 1e-9) {
            continue;
        }
        report.feasible += 1;
        let slack = inst.objective.evaluate(&x) - gamma;
        if slack < -tol {
            report.violations += 1;
        }
        if report.min_slack.is_none_or(|m| slack < m) {
            report.min_slack = Some(slack);
            report.argmin = Some(x.clone());
        }
    }
    report
}
