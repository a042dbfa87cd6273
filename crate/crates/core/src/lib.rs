//! Numerical toolkit for finite-dimensional matrix convex sets.

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod linalg;
pub mod io;
pub mod kcert;
pub mod oracles;
pub mod sdp;
pub mod report;
pub mod sets;
pub mod suites;

pub use config::{Budget, Tolerances};
pub use error::{Error, Result};
pub use linalg::{ChoiMatrix, MatrixTuple};
