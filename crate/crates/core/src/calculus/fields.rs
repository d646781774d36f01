//! Coordinate fields on a three-dimensional chart and the exterior calculus
//! the rest of the crate needs: directional derivatives, Lie brackets,
//! pairings and the exterior derivative of one-forms.
//!
//! Everything exists in two flavours: expression-backed fields that are
//! sampled at a point, and the underlying jet-valued kernels (`*_jet`)
//! that downstream modules chain together.

use super::expr::{EvalError, Expression, ParseError};
use super::jet::Jet;

/// Chart coordinate names.
pub const CHART_VARS: [&str; 3] = ["x", "y", "z"];

/// Jet-valued components of a vector field or covector field.
pub type Vec3J = [Jet; 3];

/// Coefficients of a two-form on `(dx∧dy, dx∧dz, dy∧dz)`.
pub type TwoFormSample = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Expression);

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldC(pub [Expression; 3]);

#[derive(Debug, Clone, PartialEq)]
pub struct OneFormC(pub [Expression; 3]);

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormC(pub [Expression; 3]);

fn parse3(texts: [&str; 3]) -> Result<[Expression; 3], ParseError> {
    Ok([
        Expression::parse(texts[0], &CHART_VARS)?,
        Expression::parse(texts[1], &CHART_VARS)?,
        Expression::parse(texts[2], &CHART_VARS)?,
    ])
}

impl ScalarField {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(ScalarField(Expression::parse(text, &CHART_VARS)?))
    }

    pub fn jet(&self, seed: &Vec3J) -> Result<Jet, EvalError> {
        self.0.eval_jet(seed)
    }
}

impl VectorFieldC {
    pub fn parse(texts: [&str; 3]) -> Result<Self, ParseError> {
        Ok(VectorFieldC(parse3(texts)?))
    }

    pub fn jet(&self, seed: &Vec3J) -> Result<Vec3J, EvalError> {
        Ok([
            self.0[0].eval_jet(seed)?,
            self.0[1].eval_jet(seed)?,
            self.0[2].eval_jet(seed)?,
        ])
    }

    pub fn at(&self, p: [f64; 3]) -> Result<[f64; 3], EvalError> {
        Ok([self.0[0].eval(&p)?, self.0[1].eval(&p)?, self.0[2].eval(&p)?])
    }
}

impl OneFormC {
    pub fn parse(texts: [&str; 3]) -> Result<Self, ParseError> {
        Ok(OneFormC(parse3(texts)?))
    }

    pub fn jet(&self, seed: &Vec3J) -> Result<Vec3J, EvalError> {
        VectorFieldC(self.0.clone()).jet(seed)
    }
}

impl TwoFormC {
    pub fn parse(texts: [&str; 3]) -> Result<Self, ParseError> {
        Ok(TwoFormC(parse3(texts)?))
    }

    pub fn at(&self, p: [f64; 3]) -> Result<TwoFormSample, EvalError> {
        Ok([self.0[0].eval(&p)?, self.0[1].eval(&p)?, self.0[2].eval(&p)?])
    }
}

/// `V(f) = Σ Vⁱ ∂ᵢ f`.
pub fn apply_jet(v: &Vec3J, f: &Jet) -> Jet {
    v[0] * f.derivative(0) + v[1] * f.derivative(1) + v[2] * f.derivative(2)
}

/// `[V, W]ⁱ = V(Wⁱ) - W(Vⁱ)`.
pub fn bracket_jet(v: &Vec3J, w: &Vec3J) -> Vec3J {
    std::array::from_fn(|i| apply_jet(v, &w[i]) - apply_jet(w, &v[i]))
}

/// Pairing of a covector with a vector.
pub fn pair_jet(theta: &Vec3J, v: &Vec3J) -> Jet {
    theta[0] * v[0] + theta[1] * v[1] + theta[2] * v[2]
}

pub fn pair(theta: &[f64; 3], v: &[f64; 3]) -> f64 {
    theta[0] * v[0] + theta[1] * v[1] + theta[2] * v[2]
}

/// Coordinate formula for `dθ` on `(dx∧dy, dx∧dz, dy∧dz)`.
pub fn exterior_derivative_jet(theta: &Vec3J) -> [Jet; 3] {
    let d = |i: usize, j: usize| theta[j].derivative(i) - theta[i].derivative(j);
    [d(0, 1), d(0, 2), d(1, 2)]
}

/// Evaluates a two-form on a pair of vectors.
pub fn two_form_eval_jet(w: &[Jet; 3], a: &Vec3J, b: &Vec3J) -> Jet {
    w[0] * (a[0] * b[1] - a[1] * b[0]) + w[1] * (a[0] * b[2] - a[2] * b[0]) + w[2] * (a[1] * b[2] - a[2] * b[1])
}

pub fn two_form_eval(w: &TwoFormSample, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    w[0] * (a[0] * b[1] - a[1] * b[0]) + w[1] * (a[0] * b[2] - a[2] * b[0]) + w[2] * (a[1] * b[2] - a[2] * b[1])
}

pub fn cross_jet(a: &Vec3J, b: &Vec3J) -> Vec3J {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn scale_vec(v: &Vec3J, k: &Jet) -> Vec3J {
    [v[0] * *k, v[1] * *k, v[2] * *k]
}

pub fn add_vec(a: &Vec3J, b: &Vec3J) -> Vec3J {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn values(v: &Vec3J) -> [f64; 3] {
    [v[0].value(), v[1].value(), v[2].value()]
}

/// Inverse of the matrix whose *columns* are `cols`, returned as rows
/// (so `rows[k]` is the covector dual to `cols[k]`), together with the
/// determinant.
pub fn dual_basis_jet(cols: &[Vec3J; 3]) -> ([Vec3J; 3], Jet) {
    // rows of the inverse are cross products of the other two columns / det
    let det = pair_jet(&cross_jet(&cols[0], &cols[1]), &cols[2]);
    let inv = det.recip();
    let r0 = scale_vec(&cross_jet(&cols[1], &cols[2]), &inv);
    let r1 = scale_vec(&cross_jet(&cols[2], &cols[0]), &inv);
    let r2 = scale_vec(&cross_jet(&cols[0], &cols[1]), &inv);
    ([r0, r1, r2], det)
}

fn seed(p: [f64; 3], order: usize) -> Vec3J {
    Jet::seed(p, order)
}

/// `Σᵢ Vⁱ(p) ∂ᵢ f(p)`.
pub fn directional_derivative(f: &ScalarField, v: &VectorFieldC, p: [f64; 3]) -> Result<f64, EvalError> {
    let s = seed(p, 1);
    let fj = f.jet(&s)?;
    let vv = v.at(p)?;
    Ok(pair(&vv, &fj.gradient()))
}

/// Lie bracket of two coordinate vector fields at a point.
pub fn lie_bracket(v: &VectorFieldC, w: &VectorFieldC, p: [f64; 3]) -> Result<[f64; 3], EvalError> {
    let s = seed(p, 1);
    Ok(values(&bracket_jet(&v.jet(&s)?, &w.jet(&s)?)))
}

/// `dθ` at a point.
pub fn exterior_derivative_oneform(theta: &OneFormC, p: [f64; 3]) -> Result<TwoFormSample, EvalError> {
    let s = seed(p, 1);
    let d = exterior_derivative_jet(&theta.jet(&s)?);
    Ok([d[0].value(), d[1].value(), d[2].value()])
}

/// Differential of a scalar field as a one-form field sample.
pub fn differential(f: &ScalarField, p: [f64; 3]) -> Result<[f64; 3], EvalError> {
    Ok(f.jet(&seed(p, 1))?.gradient())
}
