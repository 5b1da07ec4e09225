//! Log-barrier interior method for [`RelaxationModel`].
//!
//! Every linear row `a'x + b >= 0` contributes `-log(a'x + b)`; every circuit
//! contributes `-log(G(c) - t) - sum_j log c_j`, where `G` is the weighted
//! geometric mean. Both barriers are self-concordant, so damped Newton steps
//! stay interior.
//!
//! `gamma` only enters the origin row, so it is eliminated: the barrier
//! maximizes the origin budget (origin coefficient minus its circuit draws)
//! over the remaining rows and `gamma` is set to that budget at the end. The
//! start point is built from the model structure; when that fails a phase-1
//! problem (`min s` with every row relaxed by `s`) is solved instead.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::relaxation::{RelaxationModel, VarKind, GAMMA_VAR};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Allowed constraint violation of a reported solution.
    pub tol_feas: f64,
    /// Relative duality-gap target: stop once `gap <= tol_gap * (1 + |gamma|)`.
    pub tol_gap: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Newton-decrement threshold for centering (`delta^2 / 2`).
    pub tol_newton: f64,
    /// Upper cap on multipliers, keeping the barrier bounded.
    pub variable_cap: f64,
    /// Barrier parameter growth per outer iteration.
    pub growth: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_feas: 1e-7,
            tol_gap: 1e-9,
            max_outer: 200,
            max_inner: 50,
            tol_newton: 1e-10,
            variable_cap: 1e8,
            growth: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    CoverUnavailable,
    NumericalError,
}

impl Status {
    pub const ALL: [Status; 4] = [
        Status::Optimal,
        Status::Infeasible,
        Status::CoverUnavailable,
        Status::NumericalError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::CoverUnavailable => "cover-unavailable",
            Status::NumericalError => "numerical-error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Meaningful when `status` is optimal.
    pub gamma: f64,
    pub mu: Vec<f64>,
    /// Indexed by variable (zero for variables without a bound constraint).
    pub nu: Vec<f64>,
    /// Per circuit, aligned with `Circuit::vertices`.
    pub c: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    /// Raw model variables.
    pub x: Vec<f64>,
    pub iterations: usize,
    pub max_residual: f64,
    /// `gamma` after each centering of phase 2.
    pub gamma_history: Vec<f64>,
    pub message: Option<String>,
}

impl SolveResult {
    fn failed(status: Status, model: &RelaxationModel, iterations: usize, msg: String) -> Self {
        SolveResult {
            status,
            gamma: f64::NAN,
            mu: vec![0.0; model.m],
            nu: vec![0.0; model.n],
            c: model
                .circuits
                .iter()
                .map(|c| vec![0.0; c.vertices.len()])
                .collect(),
            t: vec![0.0; model.circuits.len()],
            x: Vec::new(),
            iterations,
            max_residual: f64::NAN,
            gamma_history: Vec::new(),
            message: Some(msg),
        }
    }

    /// Unpacks a model point into a result.
    pub fn from_point(model: &RelaxationModel, x: Vec<f64>, status: Status) -> Self {
        let (mu, nu) = model.multipliers(&x);
        let c = model
            .circuits
            .iter()
            .map(|c| c.vertices.iter().map(|v| x[v.var]).collect())
            .collect();
        let t = model.circuits.iter().map(|c| x[c.t_var]).collect();
        SolveResult {
            status,
            gamma: x[GAMMA_VAR],
            mu,
            nu,
            c,
            t,
            max_residual: model.max_violation(&x),
            x,
            iterations: 0,
            gamma_history: Vec::new(),
            message: None,
        }
    }
}

struct Row {
    terms: Vec<(usize, f64)>,
    constant: f64,
    relaxed: bool,
}

struct Geo {
    t: usize,
    factors: Vec<(usize, f64)>,
    log_scale: f64,
}

/// Barrier problem over the model variables with `gamma` eliminated: the
/// origin budget row is dropped and its value becomes the objective.
struct Barrier {
    rows: Vec<Row>,
    geo: Vec<Geo>,
    nvars: usize,
    /// Index of the phase-1 slack, if any.
    slack: Option<usize>,
    /// Linear objective to minimize.
    objective: Vec<(usize, f64)>,
}

impl Barrier {
    fn new(model: &RelaxationModel, cap: f64, phase1: bool) -> Self {
        let mut rows: Vec<Row> = model
            .linear
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != model.origin_row)
            .map(|(_, c)| Row {
                terms: c.terms.clone(),
                constant: c.constant,
                relaxed: phase1,
            })
            .collect();
        for (j, kind) in model.kinds.iter().enumerate() {
            let capped = match kind {
                VarKind::Mu | VarKind::Nu => true,
                VarKind::T | VarKind::C => phase1,
                VarKind::Gamma => false,
            };
            if capped {
                rows.push(Row {
                    terms: vec![(j, -1.0)],
                    constant: cap,
                    relaxed: false,
                });
            }
        }
        let geo = model
            .geo
            .iter()
            .map(|g| Geo {
                t: g.t,
                factors: g.factors.clone(),
                log_scale: -g.factors.iter().map(|&(_, l)| l * l.ln()).sum::<f64>(),
            })
            .collect();
        let n = model.num_vars();
        if phase1 {
            Barrier {
                rows,
                geo,
                nvars: n + 1,
                slack: Some(n),
                objective: vec![(n, 1.0)],
            }
        } else {
            let objective = model.linear[model.origin_row]
                .terms
                .iter()
                .filter(|&&(j, _)| j != GAMMA_VAR)
                .map(|&(j, a)| (j, -a))
                .collect();
            Barrier {
                rows,
                geo,
                nvars: n,
                slack: None,
                objective,
            }
        }
    }

    /// Total barrier parameter (number of log terms).
    fn parameter(&self) -> f64 {
        let g: usize = self.geo.iter().map(|g| 1 + g.factors.len()).sum();
        (self.rows.len() + g) as f64
    }

    fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, a)| a * x[j]).sum()
    }

    fn row_value(&self, r: &Row, x: &[f64]) -> f64 {
        let mut v = r.constant + r.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        if r.relaxed {
            v += x[self.slack.expect("relaxed row needs slack")];
        }
        v
    }

    /// `(G(c), G(c) - t [+ s])`, or `None` outside the domain.
    fn geo_value(&self, g: &Geo, x: &[f64]) -> Option<(f64, f64)> {
        let mut lg = g.log_scale;
        for &(j, l) in &g.factors {
            if x[j] <= 0.0 {
                return None;
            }
            lg += l * x[j].ln();
        }
        let gm = lg.exp();
        let mut w = gm - x[g.t];
        if let Some(s) = self.slack {
            w += x[s];
        }
        (w > 0.0).then_some((gm, w))
    }

    /// Smallest slack over all barrier terms (nonpositive means outside).
    fn min_slack(&self, x: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for r in &self.rows {
            m = m.min(self.row_value(r, x));
        }
        for g in &self.geo {
            match self.geo_value(g, x) {
                Some((_, w)) => m = m.min(w),
                None => return f64::NEG_INFINITY,
            }
        }
        m
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.min_slack(x) > 0.0
    }

    fn value(&self, x: &[f64], tau: f64) -> f64 {
        let mut f = tau * self.objective_value(x);
        for r in &self.rows {
            f -= self.row_value(r, x).ln();
        }
        for g in &self.geo {
            let (_, w) = self.geo_value(g, x).expect("inside");
            f -= w.ln();
            for &(j, _) in &g.factors {
                f -= x[j].ln();
            }
        }
        f
    }

    /// Gradient and Hessian of `tau * objective + barrier`.
    fn derivatives(&self, x: &[f64], tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.nvars;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for &(j, a) in &self.objective {
            grad[j] += tau * a;
        }
        // gamma is eliminated; keep its Newton component at zero
        hess[(GAMMA_VAR, GAMMA_VAR)] = 1.0;

        let mut idx: Vec<(usize, f64)> = Vec::new();
        for r in &self.rows {
            let v = self.row_value(r, x);
            idx.clear();
            idx.extend(r.terms.iter().copied());
            if r.relaxed {
                idx.push((self.slack.unwrap(), 1.0));
            }
            for &(j, a) in &idx {
                grad[j] -= a / v;
            }
            let inv2 = 1.0 / (v * v);
            for &(j, a) in &idx {
                for &(k, b) in &idx {
                    hess[(j, k)] += a * b * inv2;
                }
            }
        }

        for g in &self.geo {
            let (gm, w) = self.geo_value(g, x).expect("point inside domain");
            // gradient of w over (c..., t, s)
            idx.clear();
            for &(j, l) in &g.factors {
                idx.push((j, l * gm / x[j]));
            }
            idx.push((g.t, -1.0));
            if let Some(s) = self.slack {
                idx.push((s, 1.0));
            }
            for &(j, a) in &idx {
                grad[j] -= a / w;
            }
            let inv2 = 1.0 / (w * w);
            for &(j, a) in &idx {
                for &(k, b) in &idx {
                    hess[(j, k)] += a * b * inv2;
                }
            }
            // -Hess(w)/w on the c block, plus the -log c_j terms
            for (p, &(j, lj)) in g.factors.iter().enumerate() {
                let cj = x[j];
                grad[j] -= 1.0 / cj;
                hess[(j, j)] += 1.0 / (cj * cj);
                hess[(j, j)] += gm * lj / (cj * cj) / w;
                for &(k, lk) in &g.factors[p..] {
                    let ck = x[k];
                    let h = gm * lj * lk / (cj * ck) / w;
                    hess[(j, k)] -= h;
                    if j != k {
                        hess[(k, j)] -= h;
                    }
                }
            }
        }
        (grad, hess)
    }
}

fn newton_direction(grad: &DVector<f64>, hess: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = grad.len();
    let d: DVector<f64> = DVector::from_iterator(
        n,
        hess.diagonal()
            .iter()
            .map(|&h| if h > 0.0 { 1.0 / h.sqrt() } else { 1.0 }),
    );
    let mut scaled = hess.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= d[i] * d[j];
        }
    }
    let rhs = -grad.component_mul(&d);
    let mut reg = 0.0;
    for _ in 0..8 {
        let mut m = scaled.clone();
        if reg > 0.0 {
            for i in 0..n {
                m[(i, i)] += reg;
            }
        }
        if let Some(ch) = m.cholesky() {
            let y = ch.solve(&rhs);
            if y.iter().all(|v| v.is_finite()) {
                return Some(y.component_mul(&d));
            }
        }
        reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
    }
    None
}

/// Newton decrement below which a point counts as centered when the step
/// budget runs out (rounding noise can keep it above `tol_newton`).
const NEAR_CENTRAL: f64 = 0.25;

enum Centering {
    /// Steps taken and the final Newton decrement.
    Converged(usize, f64),
    /// Phase 1 reached a strictly feasible point early.
    Feasible(usize),
    Failed(String),
}

fn center(
    bar: &Barrier,
    x: &mut Vec<f64>,
    tau: f64,
    max_inner: usize,
    opts: &SolverOptions,
) -> Centering {
    for it in 0..=max_inner {
        let (grad, hess) = bar.derivatives(x, tau);
        let Some(dx) = newton_direction(&grad, &hess) else {
            return Centering::Failed("singular Newton system".into());
        };
        let dec2 = -grad.dot(&dx);
        if !dec2.is_finite() {
            return Centering::Failed("non-finite Newton decrement".into());
        }
        let delta = dec2.max(0.0).sqrt();
        if dec2 / 2.0 <= opts.tol_newton {
            return Centering::Converged(it, delta);
        }
        if it == max_inner {
            if delta < NEAR_CENTRAL {
                return Centering::Converged(it, delta);
            }
            break;
        }
        let damped = 1.0 / (1.0 + delta);
        let trial = |alpha: f64| -> Vec<f64> {
            x.iter()
                .zip(dx.iter())
                .map(|(xi, di)| xi + alpha * di)
                .collect()
        };
        let mut alpha = 1.0;
        let mut next = trial(alpha);
        if delta >= 0.25 {
            // Armijo backtracking, never below the self-concordant damped step.
            let f0 = bar.value(x, tau);
            loop {
                if bar.in_domain(&next) && bar.value(&next, tau) <= f0 - 0.01 * alpha * dec2 {
                    break;
                }
                alpha *= 0.5;
                if alpha < damped {
                    alpha = damped;
                    next = trial(alpha);
                    break;
                }
                next = trial(alpha);
            }
        }
        while !bar.in_domain(&next) {
            alpha *= 0.5;
            if alpha < 1e-14 {
                return Centering::Failed("line search left the domain".into());
            }
            next = trial(alpha);
        }
        *x = next;
        if let Some(s) = bar.slack {
            if x[s] < 0.0 {
                return Centering::Feasible(it + 1);
            }
        }
    }
    Centering::Failed(format!(
        "centering did not converge in {max_inner} Newton steps"
    ))
}

/// A strictly feasible point built directly from the model structure:
/// small multipliers, vertex coefficients split evenly with half left over,
/// and origin shares sized so each circuit number is twice its target.
fn constructive_start(model: &RelaxationModel, bar: &Barrier) -> Option<Vec<f64>> {
    let n = model.num_vars();
    let mut x = vec![0.0; n];

    let mut eps: f64 = 1e-2;
    for row in model.vertex_rows.iter().filter(|r| r.cand != 0) {
        let spread: f64 = row.coeff.mu_terms.values().map(|a| a.abs()).sum();
        if row.coeff.constant > 0.0 && spread > 0.0 {
            eps = eps.min(row.coeff.constant / (2.0 * spread));
        }
    }
    for i in 0..model.m {
        x[model.mu_var(i)] = eps;
    }
    let (mu, _) = model.multipliers(&x);
    for row in model.vertex_rows.iter().filter(|r| r.cand != 0) {
        let base = row.coeff.eval_without_gamma(&mu, &vec![0.0; model.n]);
        for (&i, &a) in &row.coeff.nu_terms {
            if let Some(j) = model.nu_vars[i] {
                let need = if a > 0.0 { (-base).max(0.0) / a + 1.0 } else { 1.0 };
                x[j] = x[j].max(need);
            }
        }
    }
    for j in model.nu_vars.iter().flatten() {
        x[*j] = x[*j].max(1.0);
    }
    let (mu, nu) = model.multipliers(&x);

    for row in model.vertex_rows.iter().filter(|r| r.cand != 0) {
        let coeff = row.coeff.eval_without_gamma(&mu, &nu);
        if coeff <= 0.0 {
            return None;
        }
        let share = coeff / (2.0 * row.c_vars.len().max(1) as f64);
        for &v in &row.c_vars {
            x[v] = share;
        }
    }
    for circ in &model.circuits {
        let req = circ.required(&mu, &nu);
        let origin = circ.vertices.iter().position(|v| v.cand == 0);
        match origin {
            Some(o) => {
                let t = req + 1.0;
                x[circ.t_var] = t;
                let l0 = circ.vertices[o].lambda;
                let lp: f64 = circ
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != o)
                    .map(|(_, v)| v.lambda * (x[v.var] / v.lambda).ln())
                    .sum();
                let c0 = l0 * (((2.0 * t).ln() - lp) / l0).exp();
                if !c0.is_finite() || c0 <= 0.0 {
                    return None;
                }
                x[circ.vertices[o].var] = c0;
            }
            None => {
                let c: Vec<f64> = circ.vertices.iter().map(|v| x[v.var]).collect();
                let l: Vec<f64> = circ.vertices.iter().map(|v| v.lambda).collect();
                let g = crate::relaxation::circuit_number(&c, &l);
                if g <= req {
                    return None;
                }
                x[circ.t_var] = 0.5 * (g + req);
            }
        }
    }
    bar.in_domain(&x).then_some(x)
}

/// Barrier phase 1: minimize a common relaxation `s` of every row.
fn phase_one(
    model: &RelaxationModel,
    opts: &SolverOptions,
    iterations: &mut usize,
) -> Result<Vec<f64>, (Status, String)> {
    let n = model.num_vars();
    let p1 = Barrier::new(model, opts.variable_cap, true);
    let mut x = vec![0.0; n + 1];
    for (j, kind) in model.kinds.iter().enumerate() {
        x[j] = match kind {
            VarKind::Gamma => 0.0,
            VarKind::Mu | VarKind::Nu => 1e-3,
            VarKind::T | VarKind::C => 1.0,
        };
    }
    x[n] = 0.0;
    let worst = p1.min_slack(&x);
    x[n] = (-worst).max(0.0) + 1.0;
    if !p1.in_domain(&x) {
        return Err((Status::NumericalError, "phase-1 start outside domain".into()));
    }
    let mut tau = p1.parameter() / x[n];
    for _ in 0..opts.max_outer {
        match center(&p1, &mut x, tau, opts.max_inner, opts) {
            Centering::Converged(k, _) => *iterations += k,
            Centering::Feasible(k) => {
                *iterations += k;
                x.truncate(n);
                return Ok(x);
            }
            Centering::Failed(msg) => {
                return Err((Status::NumericalError, format!("phase 1: {msg}")));
            }
        }
        if p1.parameter() / tau < opts.tol_feas * 1e-3 {
            return Err(if x[n] > opts.tol_feas {
                (
                    Status::Infeasible,
                    format!("phase-1 minimum violation {:e}", x[n]),
                )
            } else {
                (
                    Status::NumericalError,
                    "no strictly feasible point found".into(),
                )
            });
        }
        tau *= opts.growth;
    }
    Err((Status::NumericalError, "phase-1 iteration cap".into()))
}

/// Maximizes `gamma` over the relaxation model.
pub fn solve_relaxation(model: &RelaxationModel, opts: &SolverOptions) -> SolveResult {
    let mut iterations = 0usize;
    let p2 = Barrier::new(model, opts.variable_cap, false);

    let mut x = match constructive_start(model, &p2) {
        Some(x) => x,
        None => match phase_one(model, opts, &mut iterations) {
            Ok(x) => x,
            Err((status, msg)) => return SolveResult::failed(status, model, iterations, msg),
        },
    };
    if !p2.in_domain(&x) {
        return SolveResult::failed(
            Status::NumericalError,
            model,
            iterations,
            "start point not strictly feasible".into(),
        );
    }

    let param = p2.parameter().max(1.0);
    let mut tau = param / (1.0 + model.origin_budget(&x).abs());
    let mut history = Vec::new();
    let mut delta = 0.0;
    for _ in 0..opts.max_outer {
        match center(&p2, &mut x, tau, opts.max_inner, opts) {
            Centering::Converged(k, d) => {
                iterations += k;
                delta = d;
            }
            Centering::Feasible(k) => iterations += k,
            Centering::Failed(msg) => {
                let mut r = SolveResult::failed(
                    Status::NumericalError,
                    model,
                    iterations,
                    format!("phase 2: {msg}"),
                );
                r.gamma_history = history;
                return r;
            }
        }
        let gamma = model.origin_budget(&x);
        history.push(gamma);
        // suboptimality of a point with decrement delta is at most this
        let gap = (param + delta * param.sqrt()) / tau;
        if gap <= opts.tol_gap * (1.0 + gamma.abs()) {
            x[GAMMA_VAR] = gamma;
            let mut r = SolveResult::from_point(model, x, Status::Optimal);
            r.iterations = iterations;
            r.gamma_history = history;
            if r.max_residual > opts.tol_feas {
                r.status = Status::NumericalError;
                r.message = Some(format!("residual {:e}", r.max_residual));
            }
            return r;
        }
        tau *= opts.growth;
    }
    let mut r = SolveResult::failed(
        Status::NumericalError,
        model,
        iterations,
        "phase-2 iteration cap".into(),
    );
    r.gamma_history = history;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{build_candidates_and_covers, make_bound_constraints, CoverOutcome};
    use crate::poly::{Exponent, Polynomial, PopInstance};
    use crate::relaxation::{assemble_lagrangian, build_model, circuit_number};

    fn model(n: usize, terms: &[(&[u32], f64)], l: &[f64], u: &[f64], a: Option<&[u32]>) -> RelaxationModel {
        let f = Polynomial::from_terms(
            n,
            terms.iter().map(|(e, c)| (Exponent::new(e.to_vec()), *c)),
        )
        .unwrap();
        let inst = PopInstance::new(f, vec![], l.to_vec(), u.to_vec()).unwrap();
        let bcs = match a {
            Some(a) => make_bound_constraints(&inst, a).unwrap(),
            None => vec![],
        };
        let lag = assemble_lagrangian(&inst, &bcs);
        let CoverOutcome::Covered(covers) = build_candidates_and_covers(&lag, &bcs).unwrap() else {
            panic!("uncovered");
        };
        build_model(&lag, &covers).unwrap()
    }

    fn motzkin() -> RelaxationModel {
        model(
            2,
            &[(&[4, 2], 1.0), (&[2, 4], 1.0), (&[2, 2], -3.0), (&[0, 0], 1.0)],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            None,
        )
    }

    #[test]
    fn min_minus_x() {
        let m = model(1, &[(&[1], -1.0)], &[-1.0], &[2.0], Some(&[2]));
        let r = solve_relaxation(&m, &SolverOptions::default());
        assert_eq!(r.status, Status::Optimal);
        assert!((r.gamma + 2.0).abs() < 1e-6, "{}", r.gamma);
        assert!((r.nu[0] - 0.25).abs() < 1e-4);
    }

    #[test]
    fn plain_lp_model() {
        let m = model(1, &[(&[2], 1.0), (&[0], 1.0)], &[-1.0], &[1.0], None);
        let r = solve_relaxation(&m, &SolverOptions::default());
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.gamma, 1.0);
    }

    #[test]
    fn optimal_points_satisfy_the_model() {
        for m in [motzkin(), model(1, &[(&[1], -1.0)], &[-1.0], &[2.0], Some(&[2]))] {
            let r = solve_relaxation(&m, &SolverOptions::default());
            assert_eq!(r.status, Status::Optimal);
            assert!(r.max_residual <= 1e-7);
            for (circ, (c, t)) in m.circuits.iter().zip(r.c.iter().zip(&r.t)) {
                let l: Vec<f64> = circ.vertices.iter().map(|v| v.lambda).collect();
                assert!(*t <= circuit_number(c, &l) * (1.0 + 1e-7));
            }
            for w in r.gamma_history.windows(2) {
                assert!(w[1] >= w[0], "{:?}", r.gamma_history);
            }
        }
    }

    #[test]
    fn deterministic() {
        let m = motzkin();
        let a = solve_relaxation(&m, &SolverOptions::default());
        let b = solve_relaxation(&m, &SolverOptions::default());
        assert_eq!(a, b);
        assert_eq!(a.gamma.to_bits(), b.gamma.to_bits());
    }

    #[test]
    fn iteration_cap_is_numerical_error() {
        let opts = SolverOptions {
            max_outer: 1,
            ..Default::default()
        };
        let r = solve_relaxation(&motzkin(), &opts);
        assert_eq!(r.status, Status::NumericalError);
        assert!(r.gamma.is_nan());
    }

    #[test]
    fn status_strings() {
        let s: Vec<&str> = Status::ALL.iter().map(|s| s.as_str()).collect();
        assert_eq!(s, ["optimal", "infeasible", "cover-unavailable", "numerical-error"]);
        assert_eq!(
            serde_json::to_string(&Status::CoverUnavailable).unwrap(),
            "\"cover-unavailable\""
        );
    }
}
