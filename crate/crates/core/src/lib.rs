//! Hybrid block-pulse/Legendre solver for a class of nonlinear Fredholm and
//! Volterra integro-differential equations on `[0, 1)`.
//!
//! The unknown `y` is expanded in the hybrid basis `b_km(t) = p_m(2qt - 2k + 1)`
//! restricted to the `k`-th of `q` equal subintervals, for Legendre orders
//! `m = 0..r`. Derivatives of `y` are recovered from its coefficients and the
//! initial conditions through `J = (Pᵀ)⁻¹`, where `P` is the operational matrix
//! of integration, and the integral equation collapses to a nonlinear algebraic
//! system of `rq` equations solved by damped Newton iteration.
//!
//! Module map:
//!
//! - [`legendre`]: Legendre polynomials and Gauss–Legendre quadrature.
//! - [`basis`]: the hybrid basis, function and kernel projection.
//! - [`opmat`]: `P`, `L`, `J`, the triple-product tensor, `C̃` and `Ŝ`.
//! - [`lift`]: coefficients of `y⁽ⁿ⁾` from those of `y`.
//! - [`solver`]: residual assembly, Newton iteration and the a-priori bound.
//! - [`expr`]: the text expression language used in problem files.
//! - [`problem`]: problem files, end-to-end runs, CSV and report output.
//! - [`reproduce`]: stored reference values for the two worked examples.

pub mod basis;
pub mod error;
pub mod expr;
pub mod legendre;
pub mod lift;
pub mod opmat;
pub mod problem;
pub mod reproduce;
pub mod solver;

pub use basis::{BasisConfig, CoeffVector, OperatorMatrix};
pub use error::{Error, Result};
pub use lift::InitialConditions;
pub use opmat::TripleTensor;
pub use solver::{AssembledSystem, EquationKind, SolveOptions, SolveReport};
