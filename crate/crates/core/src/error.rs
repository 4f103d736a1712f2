use thiserror::Error;

use crate::trajectories::ActionResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite evaluation at component {component}")]
    NonFinite { component: usize },

    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        best: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {time} exceeds the horizon {horizon} of `{system}`")]
    HorizonExceeded {
        system: String,
        time: f64,
        horizon: f64,
    },

    #[error("resolution cap reached (error estimate {:e} at N = {})", best.error_estimate, best.resolution)]
    ResolutionCapExceeded { best: Box<ActionResult> },

    #[error("flow blew up after t = {last_time}")]
    FlowBlowUp { last_time: f64 },

    #[error("evaluation outside the domain of `{0}`")]
    OutsideDomain(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
