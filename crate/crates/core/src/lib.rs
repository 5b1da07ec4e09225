//! Certified lower bounds for box-constrained polynomial optimization using
//! sums of nonnegative circuit polynomials (SONC).
//!
//! Variable bounds are turned into constraints `x_i^{a_i} <= M_i^{a_i}` whose
//! even exponents make every inner term of the Lagrangian coverable. The
//! resulting convex program is solved by an embedded barrier method and its
//! output repaired into a rigorous bound.

pub mod bnb;
pub mod bound;
pub mod certify;
pub mod covers;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lp;
pub mod poly;
pub mod relaxation;
pub mod solver;

pub use bound::{compute_bound, BoundOptions, BoundOutcome};
pub use error::{Error, Result};
pub use poly::{Exponent, Polynomial, PopInstance};
pub use solver::{SolveResult, SolverOptions, Status};

// the guide's snippets run as doctests
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/bound-constraints.md")]
    mod bound_constraints {}
    #[doc = include_str!("../../../book/src/relaxation.md")]
    mod relaxation {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/branch-and-bound.md")]
    mod branch_and_bound {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
