//! Solver-agnostic intermediate representation for the linear, second-order
//! cone, and semidefinite programs generated elsewhere in the workspace,
//! plus the backend adapter contract and an in-process Clarabel backend.
//!
//! Construction is single-owner; a finished [`ConicProgram`] is immutable
//! and may be solved from multiple threads on distinct instances.

pub mod backend;
pub mod clarabel_backend;
pub mod dump;
pub mod ir;
pub mod lower;
pub mod validate;

pub use backend::{ConicError, Solution, SolveStatus, SolverBackend};
pub use clarabel_backend::ClarabelBackend;
pub use ir::{
    ConicProgram, Entry, LinExpr, LinearConstraint, Objective, PsdConstraint, Relation, Sense,
    SocConstraint, VarId, VarShape, VariableHandle,
};
pub use lower::lower_quadratic;
pub use validate::{validate, Diagnostic};
