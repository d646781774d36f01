//! Expression language, jets and coordinate exterior calculus.

pub mod expr;
pub mod fields;
pub mod jet;

pub use expr::{parse, EvalError, Expr, Expression, ParseError};
pub use fields::{
    directional_derivative, exterior_derivative_oneform, lie_bracket, OneFormC, ScalarField, TwoFormC, VectorFieldC,
};
pub use jet::{ComposeBasis, Jet};
