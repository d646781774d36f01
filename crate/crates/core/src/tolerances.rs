//! Numerical thresholds shared by every module. Scene files may override
//! any of them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Algebraic identities (contact normalization, dual pairings).
    pub algebraic: f64,
    /// Agreement between an operation and its independent oracle.
    pub oracle: f64,
    /// Relative margin below which a surface point is characteristic.
    pub characteristic: f64,
    /// Relative `|y| / |γ'|` below which a curve point is not transverse.
    pub transversality: f64,
    /// Boundary-curve-on-region-boundary check.
    pub boundary: f64,
    /// Relative smallest singular value of the surface Jacobian.
    pub immersion: f64,
    /// Relative independence of `e1`, `e2`.
    pub degenerate: f64,
    /// Residual when expanding brackets back in the frame.
    pub bracket_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-10,
            oracle: 1e-7,
            characteristic: 1e-8,
            transversality: 1e-6,
            boundary: 1e-8,
            immersion: 1e-10,
            degenerate: 1e-12,
            bracket_residual: 1e-8,
        }
    }
}
