//! End-to-end lower bounding of one instance.

use crate::certify::{repair_and_certify, Certificate, RepairMode};
use crate::covers::{
    build_candidates_and_covers, candidate_set, make_bound_constraints, select_bound_exponents,
    CoverOutcome, ExponentStrategy,
};
use crate::error::Error;
use crate::geometry::classify_support;
use crate::poly::{Exponent, PopInstance};
use crate::relaxation::{assemble_lagrangian, build_model, RelaxationModel};
use crate::solver::{solve_relaxation, SolveResult, SolverOptions, Status};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundOptions {
    /// Add `x_i^{a_i} <= M_i^{a_i}` for every variable.
    pub use_bound_constraints: bool,
    pub strategy: ExponentStrategy,
    pub solver: SolverOptions,
    pub repair: RepairMode,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            use_bound_constraints: true,
            strategy: ExponentStrategy::Uniform,
            solver: SolverOptions::default(),
            repair: RepairMode::Standard,
        }
    }
}

impl BoundOptions {
    pub fn without_bound_constraints() -> Self {
        BoundOptions {
            use_bound_constraints: false,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundOutcome {
    pub status: Status,
    pub gamma_solver: Option<f64>,
    pub certificate: Option<Certificate>,
    pub solve: Option<SolveResult>,
    pub model: Option<RelaxationModel>,
    /// Bound-constraint exponents in use (empty without bound constraints).
    pub exponents: Vec<u32>,
    pub uncovered: Option<Exponent>,
    pub message: Option<String>,
}

impl BoundOutcome {
    fn early(status: Status, exponents: Vec<u32>, message: String) -> Self {
        BoundOutcome {
            status,
            gamma_solver: None,
            certificate: None,
            solve: None,
            model: None,
            exponents,
            uncovered: None,
            message: Some(message),
        }
    }

    pub fn gamma_certified(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.gamma)
    }
}

/// Inner terms of the Lagrangian before any bound constraint is added.
pub fn vanilla_inner_terms(inst: &PopInstance) -> Vec<Exponent> {
    let lag = assemble_lagrangian(inst, &[]);
    let cands = candidate_set(&lag, &[]).expect("vanilla candidates are valid");
    classify_support(&lag, &cands)
        .inner
        .into_iter()
        .map(|(e, _)| e)
        .collect()
}

/// Builds the relaxation, solves it and certifies the result.
pub fn compute_bound(inst: &PopInstance, opts: &BoundOptions) -> BoundOutcome {
    let (bcs, exponents) = if opts.use_bound_constraints {
        let inner = vanilla_inner_terms(inst);
        let a = match select_bound_exponents(inst, &inner, &opts.strategy) {
            Ok(a) => a,
            Err(e) => return BoundOutcome::early(Status::NumericalError, vec![], e.to_string()),
        };
        match make_bound_constraints(inst, &a) {
            Ok(b) => (b, a),
            Err(e) => return BoundOutcome::early(Status::NumericalError, a, e.to_string()),
        }
    } else {
        (Vec::new(), Vec::new())
    };

    let lag = assemble_lagrangian(inst, &bcs);
    let covers = match build_candidates_and_covers(&lag, &bcs) {
        Ok(CoverOutcome::Covered(c)) => c,
        Ok(CoverOutcome::Unavailable(beta)) => {
            let mut out = BoundOutcome::early(
                Status::CoverUnavailable,
                exponents,
                format!("no cover for inner term {beta}"),
            );
            out.uncovered = Some(beta);
            return out;
        }
        Err(e) => return BoundOutcome::early(Status::NumericalError, exponents, e.to_string()),
    };
    let model = match build_model(&lag, &covers) {
        Ok(m) => m,
        Err(Error::CoverUnavailable(beta)) => {
            let mut out = BoundOutcome::early(
                Status::CoverUnavailable,
                exponents,
                format!("no cover for inner term {beta}"),
            );
            out.uncovered = Some(beta);
            return out;
        }
        Err(e) => return BoundOutcome::early(Status::NumericalError, exponents, e.to_string()),
    };

    let res = solve_relaxation(&model, &opts.solver);
    let mut out = BoundOutcome {
        status: res.status,
        gamma_solver: (res.status == Status::Optimal).then_some(res.gamma),
        certificate: None,
        solve: None,
        model: None,
        exponents,
        uncovered: None,
        message: res.message.clone(),
    };
    if res.status == Status::Optimal {
        match repair_and_certify(&model, &res, opts.repair) {
            Ok(cert) => out.certificate = Some(cert),
            Err(e) => {
                out.status = Status::NumericalError;
                out.message = Some(e.to_string());
            }
        }
    }
    out.solve = Some(res);
    out.model = Some(model);
    out
}
