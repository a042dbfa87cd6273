//! Dense semidefinite programming: a real interior point engine and a complex
//! Hermitian modeling layer on top of it.

pub mod ipm;
pub mod margin;
pub mod model;

pub use ipm::{certified_bound, farkas_check, solve, solve_with, ConicProgram, ConicResult, Constraint, Sense, SolverOptions, Status, SymEntry};
pub use margin::{feasibility_margin, Margin};
pub use model::{require_optimal, Atom, CExpr, CMatExpr, HermVar, LinExpr, MatEq, Model, RealVar, Solution};
