use thiserror::Error;

use crate::calculus::{EvalError, ParseError};

/// Failures of the geometric pipeline at a specific point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate frame at {point:?}: e1, e2 independence {measure:e}")]
    DegenerateFrame { point: [f64; 3], measure: f64 },
    #[error("frame is not contact at {point:?}: candidate dω(e1, e2) = {value:e}")]
    NonContact { point: [f64; 3], value: f64 },
    #[error("singular {what} at {point:?} (determinant {det:e})")]
    Singular {
        what: &'static str,
        point: [f64; 3],
        det: f64,
    },
    #[error("inconsistent model at {point:?}: {what} residual {residual:e}")]
    InconsistentModel {
        what: &'static str,
        point: [f64; 3],
        residual: f64,
    },
    #[error("surface is not immersed at (u, v) = {uv:?} (relative singular value {sigma:e})")]
    Immersion { uv: [f64; 2], sigma: f64 },
    #[error("characteristic point at (u, v) = {uv:?} (margin {margin:e})")]
    CharacteristicPoint { uv: [f64; 2], margin: f64 },
    #[error("curve is not transverse at t = {t}: |y| = {y:e}")]
    TransversalityViolation { t: f64, y: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Failures while reading or validating a scene description.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read scene: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("{path}: {source}")]
    Expression {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("unknown model `{name}` (valid: {valid})")]
    UnknownModel { name: String, valid: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("validation failed: {0}")]
    Geometry(#[from] GeometryError),
}
