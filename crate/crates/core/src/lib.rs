//! Riemannian approximation of surfaces in three-dimensional
//! sub-Riemannian manifolds: frames, curvatures at finite `L` and in the
//! limit, Hausdorff measures and Gauss-Bonnet residuals.

// NaN must fail tolerance checks, hence `!(x <= tol)`; index loops mirror the
// tensor formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calculus;
pub mod curvature;
pub mod error;
pub mod frame;
pub mod measures;
pub mod models;
pub mod quadrature;
pub mod scene;
pub mod surface;
pub mod tolerances;

pub use calculus::{Expression, Jet, ParseError};
pub use curvature::{CurvatureSample, CurveOnSurface, SecondFormVariant};
pub use error::{GeometryError, SceneError};
pub use frame::{ConnectionFormsL, StructureFunctions, SubRiemannianModel};
pub use measures::{FiniteLRow, GaussBonnetReport, Region};
pub use quadrature::{Estimate, QuadratureSpec};
pub use scene::{load_scene, write_scene, ModelSpec, Scene, ValidationReport};
pub use surface::{Orientation, ParamRect, SurfacePatch};
pub use tolerances::Tolerances;
