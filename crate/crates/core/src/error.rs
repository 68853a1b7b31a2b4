use thiserror::Error;

use crate::expr::EvalError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis configuration: {0}")]
    InvalidConfig(String),

    #[error("t = {0} lies outside the half-open interval [0, 1)")]
    Domain(f64),

    #[error("{what} is not finite ({value}) at {location}")]
    NonFinite {
        what: &'static str,
        value: f64,
        location: String,
    },

    #[error("basis configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("matrix is singular: pivot {pivot:e} below 1e-14")]
    Singular { pivot: f64 },

    #[error("Gauss-Legendre node iteration for n = {n} did not converge")]
    QuadratureNoConvergence { n: usize },

    #[error(
        "derivative of order {order} needs {required} initial conditions, {supplied} supplied"
    )]
    InsufficientInitialConditions {
        order: usize,
        required: usize,
        supplied: usize,
    },

    #[error("residual requested for a {requested} system, but the system is {actual}")]
    WrongKind {
        requested: &'static str,
        actual: &'static str,
    },

    #[error("Newton Jacobian is singular at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error(transparent)]
    Eval(#[from] EvalError),
}
