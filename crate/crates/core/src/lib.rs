//! Sketching approximability of Max-CSP(F) for finite constraint families.

pub mod dist;
pub mod error;
pub mod family;
pub mod feasibility;
pub mod games;
pub mod instance;
pub mod lp;
pub mod polarize;
pub mod rng;
pub mod separator;
pub mod simplex_opt;
pub mod sketch;

pub use error::{Error, Result};
pub use family::ConstraintFamily;
pub use instance::{
    constant_satisfiable, eval_constraint, exact_count_solver, opt_value, value, Assignment, Constraint, Instance,
    OptMode, OptResult,
};
