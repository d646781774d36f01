//! Parametrized surfaces, characteristic points and the adapted frames.
//!
//! Everything on the surface is carried as jets in the parameters `(u, v)`:
//! frame data computed at the chart point `Φ(u, v)` is composed with the
//! jets of `Φ`, so `d` on the surface is plain jet differentiation.
//!
//! Orientation rule: `f2` is the unit horizontal tangent direction whose
//! sign makes `(f^2 ∧ f^3)(∂uΦ, ∂vΦ) > 0`. A patch flagged
//! [`Orientation::Negative`] uses the opposite sign throughout.

use serde::Serialize;

use crate::calculus::fields::{add_vec, cross_jet, pair_jet, scale_vec, values, Vec3J};
use crate::calculus::{Expression, Jet, ParseError};
use crate::error::GeometryError;
use crate::frame::{FrameJets, SubRiemannianModel};

pub const SURFACE_VARS: [&str; 2] = ["u", "v"];

/// A parametrized surface patch `Φ(u, v)` over a parameter rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    pub phi: [Expression; 3],
    pub domain: ParamRect,
    pub orientation: Orientation,
}

/// Sign of `(f^2 ∧ f^3)(∂uΦ, ∂vΦ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamRect {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl ParamRect {
    pub fn contains(&self, uv: [f64; 2], slack: f64) -> bool {
        uv[0] >= self.u[0] - slack
            && uv[0] <= self.u[1] + slack
            && uv[1] >= self.v[0] - slack
            && uv[1] <= self.v[1] + slack
    }
}

impl SurfacePatch {
    pub fn parse(phi: [&str; 3], domain: ParamRect) -> Result<Self, ParseError> {
        Ok(SurfacePatch {
            phi: [
                Expression::parse(phi[0], &SURFACE_VARS)?,
                Expression::parse(phi[1], &SURFACE_VARS)?,
                Expression::parse(phi[2], &SURFACE_VARS)?,
            ],
            domain,
            orientation: Orientation::Positive,
        })
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// The same surface with the roles of `u` and `v` exchanged.
    pub fn swapped(&self) -> Result<Self, ParseError> {
        let sw = |e: &Expression| Expression::parse(e.source(), &["v", "u"]);
        Ok(SurfacePatch {
            phi: [sw(&self.phi[0])?, sw(&self.phi[1])?, sw(&self.phi[2])?],
            domain: ParamRect {
                u: self.domain.v,
                v: self.domain.u,
            },
            orientation: self.orientation,
        })
    }

    pub fn point(&self, uv: [f64; 2]) -> Result<[f64; 3], GeometryError> {
        Ok([self.phi[0].eval(&uv)?, self.phi[1].eval(&uv)?, self.phi[2].eval(&uv)?])
    }

    pub fn jets(&self, uv: [f64; 2], order: usize) -> Result<Vec3J, GeometryError> {
        let seed = Jet::seed(uv, order);
        Ok([
            self.phi[0].eval_jet(&seed)?,
            self.phi[1].eval_jet(&seed)?,
            self.phi[2].eval_jet(&seed)?,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regular,
    Characteristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicReport {
    pub classification: Classification,
    /// `max(|e^3(∂uΦ)|, |e^3(∂vΦ)|) / (|∂uΦ| + |∂vΦ|)`.
    pub margin: f64,
}

/// A one-form on the surface, `P du + Q dv`, with jet coefficients.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceOneForm {
    pub p: Jet,
    pub q: Jet,
}

impl SurfaceOneForm {
    pub fn zero() -> Self {
        SurfaceOneForm {
            p: Jet::constant(0.0, 2),
            q: Jet::constant(0.0, 2),
        }
    }

    /// Value on the tangent vector `a ∂u + b ∂v`.
    pub fn eval(&self, ab: [f64; 2]) -> f64 {
        self.p.value() * ab[0] + self.q.value() * ab[1]
    }

    pub fn eval_jet(&self, ab: &[Jet; 2]) -> Jet {
        self.p * ab[0] + self.q * ab[1]
    }

    /// Coefficient of `du∧dv` in the exterior derivative.
    pub fn d(&self) -> Jet {
        self.q.derivative(0) - self.p.derivative(1)
    }

    pub fn components(&self) -> [f64; 2] {
        [self.p.value(), self.q.value()]
    }

    pub fn scale(&self, k: &Jet) -> Self {
        SurfaceOneForm {
            p: self.p * *k,
            q: self.q * *k,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        SurfaceOneForm {
            p: self.p + other.p,
            q: self.q + other.q,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SurfaceOneForm {
            p: self.p - other.p,
            q: self.q - other.q,
        }
    }

    /// Differential of a function on the surface.
    pub fn differential(f: &Jet) -> Self {
        SurfaceOneForm {
            p: f.derivative(0),
            q: f.derivative(1),
        }
    }

    /// `(α ∧ β)(X, Y)` for tangent vectors in `(∂u, ∂v)` components.
    pub fn wedge_eval(&self, other: &Self, x: [f64; 2], y: [f64; 2]) -> f64 {
        self.eval(x) * other.eval(y) - self.eval(y) * other.eval(x)
    }
}

/// Every adapted-frame quantity at a surface point, as `(u, v)` jets.
///
/// With seed order `N`: `sin α`, `cos α`, `A` and the horizontal coframe
/// pullbacks are exact to order `N-2`, the structure functions `a13`,
/// `a23` to `N-3`.
#[derive(Debug, Clone)]
pub struct SurfaceJets {
    pub uv: [f64; 2],
    pub point: [f64; 3],
    /// Frame data composed with `Φ`.
    pub frame: FrameJets,
    pub phi_u: Vec3J,
    pub phi_v: Vec3J,
    /// `pullback[k] = [e^k(∂uΦ), e^k(∂vΦ)]`.
    pub pullback: [[Jet; 2]; 3],
    pub sin_alpha: Jet,
    pub cos_alpha: Jet,
    /// `A = -f^1(e3)`.
    pub a: Jet,
    /// `(f^2 ∧ f^3)(∂uΦ, ∂vΦ)`; its sign is the patch orientation.
    pub density: Jet,
    pub margin: f64,
}

/// Sampled adapted frame at a surface point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptedFrame {
    pub f1: [f64; 3],
    pub f2: [f64; 3],
    pub f3: [f64; 3],
    pub alpha: f64,
    pub a: f64,
    pub f1_form: [f64; 3],
    pub f2_form: [f64; 3],
    pub f3_form: [f64; 3],
}

/// Sampled `g_L`-orthonormal frame adapted to the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LAdaptedFrame {
    pub l: f64,
    pub beta: f64,
    pub cos_beta: f64,
    pub sin_beta: f64,
    pub x1: [f64; 3],
    pub x2: [f64; 3],
    pub x3: [f64; 3],
    pub x1_form: [f64; 3],
    pub x2_form: [f64; 3],
    pub x3_form: [f64; 3],
    /// `dβ` on `(du, dv)`.
    pub dbeta: [f64; 2],
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Smallest over largest singular value of the `3×2` Jacobian.
fn immersion_ratio(pu: &[f64; 3], pv: &[f64; 3]) -> f64 {
    let a = pu.iter().map(|x| x * x).sum::<f64>();
    let b = pu.iter().zip(pv).map(|(x, y)| x * y).sum::<f64>();
    let c = pv.iter().map(|x| x * x).sum::<f64>();
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    let hi = 0.5 * (tr + disc);
    // λ_lo = det / λ_hi avoids cancellation
    let lo = if hi > 0.0 { (a * c - b * b) / hi } else { 0.0 };
    if hi <= 0.0 {
        return 0.0;
    }
    (lo.max(0.0) / hi).sqrt()
}

impl SurfaceJets {
    /// Builds the adapted-frame jets at `uv` from a seed of order `order`
    /// (at least 3). Fails at characteristic points.
    pub fn new(
        model: &SubRiemannianModel,
        surface: &SurfacePatch,
        uv: [f64; 2],
        order: usize,
    ) -> Result<Self, GeometryError> {
        let tol = model.tolerances();
        let phi = surface.jets(uv, order)?;
        let phi_u = phi.map(|j| j.derivative(0));
        let phi_v = phi.map(|j| j.derivative(1));
        let (pu, pv) = (values(&phi_u), values(&phi_v));
        let sigma = immersion_ratio(&pu, &pv);
        if !(sigma >= tol.immersion) {
            return Err(GeometryError::Immersion { uv, sigma });
        }
        let point = values(&phi);
        let frame = model.frame_jets(point, order)?.compose(&phi);

        let pullback: [[Jet; 2]; 3] =
            std::array::from_fn(|k| [pair_jet(&frame.coframe[k], &phi_u), pair_jet(&frame.coframe[k], &phi_v)]);
        let margin = pullback[2][0].value().abs().max(pullback[2][1].value().abs()) / (norm(&pu) + norm(&pv));
        if !(margin >= tol.characteristic) {
            return Err(GeometryError::CharacteristicPoint { uv, margin });
        }

        // t = ω(∂v)∂u - ω(∂u)∂v spans D ∩ TS; its e^1, e^2 components:
        let [wu, wv] = pullback[2];
        let h1 = wv * pullback[0][0] - wu * pullback[0][1];
        let h2 = wv * pullback[1][0] - wu * pullback[1][1];
        let inv_h = (h1 * h1 + h2 * h2).sqrt().recip();
        // f2 = -sin α e1 + cos α e2 = σ (h1 e1 + h2 e2) / |h|
        let mut sin_alpha = -(h1 * inv_h);
        let mut cos_alpha = h2 * inv_h;
        let f2_pull = |s: &Jet, c: &Jet, k: usize| -(*s) * pullback[0][k] + *c * pullback[1][k];
        let mut density = f2_pull(&sin_alpha, &cos_alpha, 0) * wv - f2_pull(&sin_alpha, &cos_alpha, 1) * wu;
        if density.value() * surface.orientation.sign() < 0.0 {
            sin_alpha = -sin_alpha;
            cos_alpha = -cos_alpha;
            density = -density;
        }

        let [e1, e2, e3] = &frame.e;
        let f1 = add_vec(&scale_vec(e1, &cos_alpha), &scale_vec(e2, &sin_alpha));
        let normal = cross_jet(&phi_u, &phi_v);
        let a = -(pair_jet(&normal, e3) / pair_jet(&normal, &f1));

        Ok(SurfaceJets {
            uv,
            point,
            frame,
            phi_u,
            phi_v,
            pullback,
            sin_alpha,
            cos_alpha,
            a,
            density,
            margin,
        })
    }

    /// `f^2` pulled back to `(du, dv)`.
    pub fn f2_pullback(&self) -> SurfaceOneForm {
        let pb = &self.pullback;
        SurfaceOneForm {
            p: -self.sin_alpha * pb[0][0] + self.cos_alpha * pb[1][0],
            q: -self.sin_alpha * pb[0][1] + self.cos_alpha * pb[1][1],
        }
    }

    /// `f^3 = e^3` pulled back to `(du, dv)`.
    pub fn f3_pullback(&self) -> SurfaceOneForm {
        SurfaceOneForm {
            p: self.pullback[2][0],
            q: self.pullback[2][1],
        }
    }

    /// `e_L^k` pulled back (`e_L^3 = √L e^3`).
    pub fn coframe_l_pullback(&self, k: usize, l: f64) -> SurfaceOneForm {
        let s = if k == 2 { l.sqrt() } else { 1.0 };
        SurfaceOneForm {
            p: self.pullback[k][0] * s,
            q: self.pullback[k][1] * s,
        }
    }

    /// `f2` and `f3` in `(∂u, ∂v)` components, from the dual pairing with
    /// `(f^2, f^3)` on the tangent plane.
    pub fn f2_f3_uv(&self) -> ([Jet; 2], [Jet; 2]) {
        let f2 = self.f2_pullback();
        let f3 = self.f3_pullback();
        let inv = self.density.recip();
        ([f3.q * inv, -(f3.p * inv)], [-(f2.q * inv), f2.p * inv])
    }

    /// `dα = cos α d(sin α) - sin α d(cos α)`.
    pub fn dalpha(&self) -> SurfaceOneForm {
        let ds = SurfaceOneForm::differential(&self.sin_alpha);
        let dc = SurfaceOneForm::differential(&self.cos_alpha);
        ds.scale(&self.cos_alpha).sub(&dc.scale(&self.sin_alpha))
    }

    /// `(cos β, sin β)` as jets.
    pub fn beta(&self, l: f64) -> (Jet, Jet) {
        let inv = (self.a * self.a + l).sqrt().recip();
        (inv * l.sqrt(), self.a * inv)
    }

    pub fn f_vectors(&self) -> [[f64; 3]; 3] {
        let [e1, e2, e3] = self.frame.e.map(|v| values(&v));
        let (s, c, a) = (self.sin_alpha.value(), self.cos_alpha.value(), self.a.value());
        let f1: [f64; 3] = std::array::from_fn(|i| c * e1[i] + s * e2[i]);
        let f2: [f64; 3] = std::array::from_fn(|i| -s * e1[i] + c * e2[i]);
        let f3: [f64; 3] = std::array::from_fn(|i| e3[i] + a * f1[i]);
        [f1, f2, f3]
    }

    pub fn adapted_frame(&self) -> AdaptedFrame {
        let [f1, f2, f3] = self.f_vectors();
        let cof = self.frame.coframe.map(|r| values(&r));
        let (s, c, a) = (self.sin_alpha.value(), self.cos_alpha.value(), self.a.value());
        let normal = values(&cross_jet(&self.phi_u, &self.phi_v));
        let nf1 = normal.iter().zip(&f1).map(|(x, y)| x * y).sum::<f64>();
        AdaptedFrame {
            f1,
            f2,
            f3,
            alpha: s.atan2(c),
            a,
            f1_form: normal.map(|x| x / nf1),
            f2_form: std::array::from_fn(|i| -s * cof[0][i] + c * cof[1][i]),
            f3_form: cof[2],
        }
    }

    pub fn l_adapted_frame(&self, l: f64) -> LAdaptedFrame {
        let af = self.adapted_frame();
        let (cb, sb) = self.beta(l);
        let (cb, sb) = (cb.value(), sb.value());
        let e3 = values(&self.frame.e[2]);
        let s = l.sqrt();
        let a = af.a;
        let r = (l + a * a).sqrt();
        let dbeta_coef = s / (l + a * a);
        LAdaptedFrame {
            l,
            beta: sb.atan2(cb),
            cos_beta: cb,
            sin_beta: sb,
            x1: std::array::from_fn(|i| cb * af.f1[i] - sb * e3[i] / s),
            x2: af.f2,
            x3: std::array::from_fn(|i| sb * af.f1[i] + cb * e3[i] / s),
            x1_form: af.f1_form.map(|x| x * s / r),
            x2_form: af.f2_form,
            x3_form: std::array::from_fn(|i| r * af.f3_form[i] + a / r * af.f1_form[i]),
            dbeta: [dbeta_coef * self.a.d(0), dbeta_coef * self.a.d(1)],
        }
    }
}

/// Classifies a surface point as regular or characteristic.
pub fn characteristic_classify(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
) -> Result<CharacteristicReport, GeometryError> {
    let tol = model.tolerances();
    let phi = surface.jets(uv, 1)?;
    let pu = phi.map(|j| j.d(0));
    let pv = phi.map(|j| j.d(1));
    let sigma = immersion_ratio(&pu, &pv);
    if !(sigma >= tol.immersion) {
        return Err(GeometryError::Immersion { uv, sigma });
    }
    let omega = model.annihilator_form(values(&phi))?;
    let dot = |w: &[f64; 3], v: &[f64; 3]| w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
    let margin = dot(&omega, &pu).abs().max(dot(&omega, &pv).abs()) / (norm(&pu) + norm(&pv));
    Ok(CharacteristicReport {
        classification: if margin < tol.characteristic {
            Classification::Characteristic
        } else {
            Classification::Regular
        },
        margin,
    })
}

pub fn adapted_frame(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
) -> Result<AdaptedFrame, GeometryError> {
    Ok(SurfaceJets::new(model, surface, uv, 3)?.adapted_frame())
}

pub fn l_adapted_frame(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<LAdaptedFrame, GeometryError> {
    if !(l > 0.0) {
        return Err(GeometryError::InvalidArgument(format!("L must be positive, got {l}")));
    }
    Ok(SurfaceJets::new(model, surface, uv, 3)?.l_adapted_frame(l))
}

/// Checks that `f2` varies continuously along an ordered list of nodes:
/// consecutive nodes must satisfy `f2(p)·f2(p') > 0`. Returns the indices
/// `i` where the pair `(i, i + 1)` violates it.
pub fn frame_continuity_violations(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    nodes: &[[f64; 2]],
) -> Result<Vec<usize>, GeometryError> {
    let mut prev: Option<[f64; 3]> = None;
    let mut bad = Vec::new();
    for (i, &uv) in nodes.iter().enumerate() {
        let f2 = adapted_frame(model, surface, uv)?.f2;
        if let Some(p) = prev {
            if p[0] * f2[0] + p[1] * f2[1] + p[2] * f2[2] <= 0.0 {
                bad.push(i - 1);
            }
        }
        prev = Some(f2);
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn heis() -> SubRiemannianModel {
        SubRiemannianModel::parse("heisenberg", ["1", "0", "-y/2"], ["0", "1", "x/2"]).unwrap()
    }

    pub(crate) fn roto() -> SubRiemannianModel {
        SubRiemannianModel::parse("rototranslation", ["cos(z)", "sin(z)", "0"], ["0", "0", "1"]).unwrap()
    }

    fn rect(a: f64) -> ParamRect {
        ParamRect { u: [-a, a], v: [-a, a] }
    }

    pub(crate) fn plane_z0() -> SurfacePatch {
        SurfacePatch::parse(["u", "v", "0"], rect(3.0)).unwrap()
    }

    pub(crate) fn plane_y0() -> SurfacePatch {
        SurfacePatch::parse(
            ["u", "0", "v"],
            ParamRect {
                u: [-2.0, 2.0],
                v: [0.1, 3.0],
            },
        )
        .unwrap()
    }

    #[test]
    fn classification_examples() {
        let r = characteristic_classify(&heis(), &plane_z0(), [1.0, 0.0]).unwrap();
        assert_eq!(r.classification, Classification::Regular);
        assert_abs_diff_eq!(r.margin, 0.25, epsilon = 1e-15);
        let r = characteristic_classify(&heis(), &plane_z0(), [0.0, 0.0]).unwrap();
        assert_eq!(r.classification, Classification::Characteristic);
        let r = characteristic_classify(&roto(), &plane_y0(), [0.3, std::f64::consts::PI]).unwrap();
        assert_eq!(r.classification, Classification::Characteristic);
        assert!(matches!(
            SurfaceJets::new(&heis(), &plane_z0(), [0.0, 0.0], 3),
            Err(GeometryError::CharacteristicPoint { .. })
        ));
        let pinched = SurfacePatch::parse(["u^3", "v", "0"], rect(1.0)).unwrap();
        assert!(matches!(
            characteristic_classify(&heis(), &pinched, [0.0, 0.5]),
            Err(GeometryError::Immersion { .. })
        ));
    }

    #[test]
    fn heisenberg_plane_frame() {
        let af = adapted_frame(&heis(), &plane_z0(), [1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(af.a.abs(), 2.0, epsilon = 1e-14);
        for (x, y) in af.f3.iter().zip([0.0, -2.0, 0.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-14);
        }
        let dot = |w: &[f64; 3], v: &[f64; 3]| w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
        assert_abs_diff_eq!(dot(&af.f1_form, &af.f1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dot(&af.f1_form, &af.f2), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dot(&af.f1_form, &af.f3), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rototranslation_plane_frame() {
        let af = adapted_frame(&roto(), &plane_y0(), [0.2, 1.0]).unwrap();
        assert_abs_diff_eq!(af.a.abs(), 1.0 / 1f64.tan(), epsilon = 1e-12);
        assert_abs_diff_eq!(af.a.abs(), 0.642093, epsilon = 1e-6);
    }

    #[test]
    fn coframe_relations_round_trip() {
        let s = SurfacePatch::parse(["u", "v", "0.3*u*v + 0.1*sin(u)"], rect(2.0)).unwrap();
        for uv in [[1.0, 0.4], [-0.7, 1.2], [0.5, -1.5]] {
            let sj = SurfaceJets::new(&heis(), &s, uv, 3).unwrap();
            let af = sj.adapted_frame();
            let cof = sj.frame.coframe.map(|r| values(&r));
            let (sa, ca, a) = (af.alpha.sin(), af.alpha.cos(), af.a);
            for i in 0..3 {
                // f^1 = cos α e^1 + sin α e^2 - A e^3
                assert_abs_diff_eq!(
                    af.f1_form[i],
                    ca * cof[0][i] + sa * cof[1][i] - a * cof[2][i],
                    epsilon = 1e-10
                );
                // inverse relations
                let e1 = ca * af.f1_form[i] - sa * af.f2_form[i] + a * ca * af.f3_form[i];
                let e2 = sa * af.f1_form[i] + ca * af.f2_form[i] + a * sa * af.f3_form[i];
                assert_abs_diff_eq!(e1, cof[0][i], epsilon = 1e-10);
                assert_abs_diff_eq!(e2, cof[1][i], epsilon = 1e-10);
            }
            // f3 ∈ TS
            let n = values(&cross_jet(&sj.phi_u, &sj.phi_v));
            let n_norm = norm(&n);
            assert!((n.iter().zip(&af.f3).map(|(x, y)| x * y).sum::<f64>() / n_norm).abs() < 1e-10);
            assert!(sj.density.value() > 0.0);
        }
    }

    #[test]
    fn l_adapted_frame_is_orthonormal() {
        let s = SurfacePatch::parse(["u", "v", "0.3*u*v"], rect(2.0)).unwrap();
        let m = heis();
        for l in [1.0, 4.0, 100.0] {
            let uv = [0.8, -0.3];
            let lf = l_adapted_frame(&m, &s, uv, l).unwrap();
            let p = s.point(uv).unwrap();
            let g = m.metric_matrix(l, p).unwrap().g;
            let gl = |a: &[f64; 3], b: &[f64; 3]| {
                (0..3)
                    .map(|i| (0..3).map(|j| a[i] * g[i][j] * b[j]).sum::<f64>())
                    .sum::<f64>()
            };
            let xs = [lf.x1, lf.x2, lf.x3];
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(gl(&xs[i], &xs[j]), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
                }
            }
            // X1 is g_L-orthogonal to TS and X_L^1 vanishes on TS
            let sj = SurfaceJets::new(&m, &s, uv, 3).unwrap();
            let (pu, pv) = (values(&sj.phi_u), values(&sj.phi_v));
            assert_abs_diff_eq!(gl(&lf.x1, &pu), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(gl(&lf.x1, &pv), 0.0, epsilon = 1e-10);
            let dot = |w: &[f64; 3], v: &[f64; 3]| w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
            assert_abs_diff_eq!(dot(&lf.x1_form, &pu), 0.0, epsilon = 1e-10);
            // dual coframe
            let forms = [lf.x1_form, lf.x2_form, lf.x3_form];
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(dot(&forms[i], &xs[j]), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
                }
            }
        }
        let lf = l_adapted_frame(&m, &plane_z0(), [1.0, 0.0], 4.0).unwrap();
        assert_abs_diff_eq!(lf.sin_beta.abs(), 2.0 / 8f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(lf.beta.abs(), std::f64::consts::FRAC_PI_4, epsilon = 1e-14);
        let far = l_adapted_frame(&m, &plane_z0(), [1.0, 0.0], 1e12).unwrap();
        assert!(far.beta.abs() < 1e-5);
    }

    #[test]
    fn swapping_parameters_flips_f2_and_a() {
        let s = SurfacePatch::parse(["u", "v", "0.2*u^2 - 0.1*v"], rect(2.0)).unwrap();
        let sw = s.swapped().unwrap();
        for uv in [[1.0, 0.5], [-0.6, 1.1]] {
            let a = adapted_frame(&heis(), &s, uv).unwrap();
            let b = adapted_frame(&heis(), &sw, [uv[1], uv[0]]).unwrap();
            assert_abs_diff_eq!(a.a, -b.a, epsilon = 1e-12);
            for i in 0..3 {
                assert_abs_diff_eq!(a.f2[i], -b.f2[i], epsilon = 1e-12);
                assert_abs_diff_eq!(a.f3[i], b.f3[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn frame_is_continuous_on_annulus_ring() {
        let nodes: Vec<[f64; 2]> = (0..=64)
            .map(|k| {
                let t = k as f64 / 64.0 * std::f64::consts::TAU;
                [1.5 * t.cos(), 1.5 * t.sin()]
            })
            .collect();
        assert!(frame_continuity_violations(&heis(), &plane_z0(), &nodes)
            .unwrap()
            .is_empty());
    }
}
