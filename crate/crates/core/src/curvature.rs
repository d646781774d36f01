//! Finite-L and limit Gaussian curvature, the Gauss-equation split, and
//! normal curvature of transverse curves, each paired with an oracle that
//! takes a different computational path.

use serde::Serialize;

use crate::calculus::fields::{exterior_derivative_jet, pair, two_form_eval, values, Vec3J};
use crate::calculus::{ComposeBasis, Expression, Jet, ParseError};
use crate::error::GeometryError;
use crate::frame::{check_l, connection_coeffs_jet, ConnectionFormsL, SubRiemannianModel};
use crate::surface::{SurfaceJets, SurfaceOneForm, SurfacePatch};

/// Seed order for anything that differentiates a connection form.
pub const ORDER_FINITE_L: usize = 4;
/// Seed order sufficient for limit quantities and pointwise values.
pub const ORDER_LIMIT: usize = 3;

/// `ω_i^{Lj}` pulled back to the surface, `w[i][j]`.
pub fn pulled_connection(sj: &SurfaceJets, l: f64) -> [[SurfaceOneForm; 3]; 3] {
    let c = connection_coeffs_jet(&sj.frame.a12, &sj.frame.a13, &sj.frame.a23, l);
    let el: [SurfaceOneForm; 3] = std::array::from_fn(|k| sj.coframe_l_pullback(k, l));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            el[0]
                .scale(&c[i][j][0])
                .add(&el[1].scale(&c[i][j][1]))
                .add(&el[2].scale(&c[i][j][2]))
        })
    })
}

fn omega_23_from(sj: &SurfaceJets, w: &[[SurfaceOneForm; 3]; 3], l: f64) -> SurfaceOneForm {
    let (cb, sb) = sj.beta(l);
    let (s, c) = (sj.sin_alpha, sj.cos_alpha);
    let tangential = w[0][2].scale(&-s).add(&w[1][2].scale(&c));
    sj.dalpha().add(&w[0][1]).scale(&-sb).add(&tangential.scale(&cb))
}

/// `Ω_2^{L3}` on `(du, dv)` from an already built jet bundle.
pub fn omega_23_l_jets(sj: &SurfaceJets, l: f64) -> SurfaceOneForm {
    omega_23_from(sj, &pulled_connection(sj, l), l)
}

/// `X2^L`, `X3^L` in `(∂u, ∂v)` components.
pub fn x2_x3_uv(sj: &SurfaceJets, l: f64) -> ([f64; 2], [f64; 2]) {
    let (f2, f3) = sj.f2_f3_uv();
    let r = (sj.a.value() * sj.a.value() + l).sqrt();
    ([f2[0].value(), f2[1].value()], [f3[0].value() / r, f3[1].value() / r])
}

fn area_uv(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * y[1] - x[1] * y[0]
}

pub fn omega_23_l(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<SurfaceOneForm, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_FINITE_L)?;
    Ok(omega_23_l_jets(&sj, l))
}

/// `K^L = d(-Ω_2^{L3})(X2^L, X3^L)` from a bundle of order at least 4.
pub fn gauss_curvature_l_jets(sj: &SurfaceJets, l: f64) -> f64 {
    let om = omega_23_l_jets(sj, l);
    let (x2, x3) = x2_x3_uv(sj, l);
    -om.d().value() * area_uv(x2, x3)
}

pub fn gauss_curvature_l(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_FINITE_L)?;
    Ok(gauss_curvature_l_jets(&sj, l))
}

/// `K^L` with `dΩ` from central differences of the pulled-back components.
pub fn gauss_curvature_l_fd(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
    h: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let om = |p: [f64; 2]| -> Result<[f64; 2], GeometryError> {
        let sj = SurfaceJets::new(model, surface, p, ORDER_LIMIT)?;
        Ok(omega_23_l_jets(&sj, l).components())
    };
    let qu = (om([uv[0] + h, uv[1]])?[1] - om([uv[0] - h, uv[1]])?[1]) / (2.0 * h);
    let pv = (om([uv[0], uv[1] + h])?[0] - om([uv[0], uv[1] - h])?[0]) / (2.0 * h);
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    let (x2, x3) = x2_x3_uv(&sj, l);
    Ok(-(qu - pv) * area_uv(x2, x3))
}

/// Induced metric `g_ij = g_L(∂iΦ, ∂jΦ)` as jets: `[E, F, G]`.
pub fn induced_metric_jets(sj: &SurfaceJets, l: f64) -> [Jet; 3] {
    let pb = &sj.pullback;
    let w = [1.0, 1.0, l];
    let g = |a: usize, b: usize| {
        (0..3)
            .map(|k| pb[k][a] * pb[k][b] * w[k])
            .fold(Jet::constant(0.0, 2), |s, t| s + t)
    };
    [g(0, 0), g(0, 1), g(1, 1)]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gaussian curvature of the induced metric from its second derivatives.
pub fn induced_metric_gauss_oracle(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_FINITE_L)?;
    let [e, f, g] = induced_metric_jets(&sj, l);
    let (ev, gu) = (e.d(1), g.d(0));
    let m1 = [
        [
            -0.5 * e.partial(&[0, 2]) + f.partial(&[1, 1]) - 0.5 * g.partial(&[2, 0]),
            0.5 * e.d(0),
            f.d(0) - 0.5 * ev,
        ],
        [f.d(1) - 0.5 * gu, e.value(), f.value()],
        [0.5 * g.d(1), f.value(), g.value()],
    ];
    let m2 = [
        [0.0, 0.5 * ev, 0.5 * gu],
        [0.5 * ev, e.value(), f.value()],
        [0.5 * gu, f.value(), g.value()],
    ];
    let w = e.value() * g.value() - f.value() * f.value();
    Ok((det3(m1) - det3(m2)) / (w * w))
}

/// `K = -dA(f2) - A²`.
pub fn gauss_curvature_limit_jets(sj: &SurfaceJets) -> f64 {
    let (f2, _) = sj.f2_f3_uv();
    let a = sj.a;
    -(f2[0].value() * a.d(0) + f2[1].value() * a.d(1)) - a.value() * a.value()
}

pub fn gauss_curvature_limit(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
) -> Result<f64, GeometryError> {
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    Ok(gauss_curvature_limit_jets(&sj))
}

/// `Ω_2^3 = A f^3` pulled back.
pub fn limit_form_omega23_jets(sj: &SurfaceJets) -> SurfaceOneForm {
    sj.f3_pullback().scale(&sj.a)
}

/// `-A ω_1^2 - sin α ω_1^3 + cos α ω_2^3` with the limit connection forms.
pub fn limit_form_omega23_connection_route(sj: &SurfaceJets) -> SurfaceOneForm {
    let half = Jet::constant(0.5, 2);
    let e = [
        sj.f3_pullback(),
        sj.coframe_l_pullback(0, 1.0),
        sj.coframe_l_pullback(1, 1.0),
    ];
    e[0].scale(&(sj.a * half))
        .add(&e[2].scale(&(sj.sin_alpha * half)))
        .add(&e[1].scale(&(sj.cos_alpha * half)))
}

pub fn limit_form_omega23(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
) -> Result<SurfaceOneForm, GeometryError> {
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    Ok(limit_form_omega23_jets(&sj))
}

/// `K = dΩ_3^2(f2, f3)` through the limit form.
pub fn gauss_curvature_limit_via_form(sj: &SurfaceJets) -> f64 {
    let (f2, f3) = sj.f2_f3_uv();
    let area = area_uv([f2[0].value(), f2[1].value()], [f3[0].value(), f3[1].value()]);
    -limit_form_omega23_jets(sj).d().value() * area
}

/// Max-norm deviation of `Θ_2^{L3}` from `A f^3` on `(du, dv)`.
pub fn theta_23_deviation(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    let w = pulled_connection(&sj, l);
    let k1 = Jet::constant(-1.0 / l, 2) * sj.a;
    let k2 = Jet::constant(1.0 / l.sqrt(), 2);
    let theta = sj.dalpha().add(&w[0][1]).scale(&k1).add(
        &w[0][2]
            .scale(&-sj.sin_alpha)
            .add(&w[1][2].scale(&sj.cos_alpha))
            .scale(&k2),
    );
    let lim = limit_form_omega23_jets(&sj).components();
    let th = theta.components();
    Ok((th[0] - lim[0]).abs().max((th[1] - lim[1]).abs()))
}

/// Which expressions to use for `Ω_1^{L2}` and `Ω_1^{L3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondFormVariant {
    /// `Ω_1^{L2} = -dβ + cos β (dα + ω_1^{L2}) + (sin α ω_1^{L3} - cos α ω_2^{L3})`,
    /// `Ω_1^{L3} = cos α ω_1^{L3} + sin α ω_2^{L3}`.
    Displayed,
    /// Differentiating `X1^L = cos β f1 - sin β e3^L` directly:
    /// `Ω_1^{L2} = cos β (dα + ω_1^{L2}) - sin β (sin α ω_1^{L3} - cos α ω_2^{L3})`,
    /// `Ω_1^{L3} = -dβ + cos α ω_1^{L3} + sin α ω_2^{L3}`.
    Derived,
}

/// `(Ω_1^{L2}, Ω_1^{L3})` on the surface.
pub fn omega_1_forms(sj: &SurfaceJets, l: f64, variant: SecondFormVariant) -> (SurfaceOneForm, SurfaceOneForm) {
    let w = pulled_connection(sj, l);
    let (cb, sb) = sj.beta(l);
    let (s, c) = (sj.sin_alpha, sj.cos_alpha);
    let a = sj.a;
    let dbeta = SurfaceOneForm::differential(&a).scale(&((a * a + l).recip() * l.sqrt()));
    let rot = w[0][1].add(&sj.dalpha());
    let cross = w[0][2].scale(&s).sub(&w[1][2].scale(&c));
    let normal = w[0][2].scale(&c).add(&w[1][2].scale(&s));
    match variant {
        SecondFormVariant::Displayed => (
            dbeta.scale(&Jet::constant(-1.0, 2)).add(&rot.scale(&cb)).add(&cross),
            normal,
        ),
        SecondFormVariant::Derived => (rot.scale(&cb).sub(&cross.scale(&sb)), normal.sub(&dbeta)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub l: f64,
    pub k_l: f64,
    pub k_limit: f64,
    pub kbar_l: f64,
    pub ii_l: f64,
}

/// `(K̄^L, II^L)` with `II^L = (Ω_1^{L2} ∧ Ω_1^{L3})(X2^L, X3^L)` and
/// `K̄^L = K^L - II^L`.
pub fn gauss_equation_decomposition_with(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
    variant: SecondFormVariant,
) -> Result<CurvatureSample, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_FINITE_L)?;
    let k_l = gauss_curvature_l_jets(&sj, l);
    let (o12, o13) = omega_1_forms(&sj, l, variant);
    let (x2, x3) = x2_x3_uv(&sj, l);
    let ii_l = o12.wedge_eval(&o13, x2, x3);
    Ok(CurvatureSample {
        l,
        k_l,
        k_limit: gauss_curvature_limit_jets(&sj),
        kbar_l: k_l - ii_l,
        ii_l,
    })
}

pub fn gauss_equation_decomposition(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<CurvatureSample, GeometryError> {
    gauss_equation_decomposition_with(model, surface, uv, l, SecondFormVariant::Displayed)
}

/// Components of `X1^L, X2^L, X3^L` on `(e1, e2, e3^L)` as jets.
fn l_frame_components(sj: &SurfaceJets, l: f64) -> [[Jet; 3]; 3] {
    let (cb, sb) = sj.beta(l);
    let (s, c) = (sj.sin_alpha, sj.cos_alpha);
    let zero = Jet::constant(0.0, 2);
    [[cb * c, cb * s, -sb], [-s, c, zero], [sb * c, sb * s, cb]]
}

/// `⟨∇̄_V Y, Z⟩_L` for surface frame fields given by `e_L` components, using
/// connection coefficients assembled from brackets (Koszul).
fn koszul_pairing(sj: &SurfaceJets, kosz: &ConnectionFormsL, y: &[Jet; 3], v_uv: [f64; 2], z: &[Jet; 3]) -> f64 {
    let (pu, pv) = (values(&sj.phi_u), values(&sj.phi_v));
    let v: [f64; 3] = std::array::from_fn(|i| v_uv[0] * pu[i] + v_uv[1] * pv[i]);
    let s = kosz.l.sqrt();
    let el: [f64; 3] = std::array::from_fn(|k| {
        let row = values(&sj.frame.coframe[k]);
        pair(&row, &v) * if k == 2 { s } else { 1.0 }
    });
    (0..3)
        .map(|b| {
            let dy = v_uv[0] * y[b].d(0) + v_uv[1] * y[b].d(1);
            let conn: f64 = (0..3)
                .map(|a| y[a].value() * (0..3).map(|i| kosz.c[a][b][i] * el[i]).sum::<f64>())
                .sum();
            (dy + conn) * z[b].value()
        })
        .sum()
}

/// `Ω_2^{L3}(V) = ⟨∇̄_V X2^L, X3^L⟩` assembled from the Koszul oracle.
pub fn omega_23_l_koszul_oracle(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
    v_uv: [f64; 2],
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    let kosz = model.koszul_connection_oracle(l, sj.point)?;
    let x = l_frame_components(&sj, l);
    Ok(koszul_pairing(&sj, &kosz, &x[1], v_uv, &x[2]))
}

/// `h_ab = ⟨∇̄_{X_a} X_b, X1^L⟩` for `a, b ∈ {2, 3}`, from the Koszul oracle.
/// `II^L = h_22 h_33 - h_23 h_32`.
pub fn second_fundamental_form_oracle(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<[[f64; 2]; 2], GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    let kosz = model.koszul_connection_oracle(l, sj.point)?;
    let x = l_frame_components(&sj, l);
    let (x2, x3) = x2_x3_uv(&sj, l);
    let dirs = [x2, x3];
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| koszul_pairing(&sj, &kosz, &x[b + 1], dirs[a], &x[0]))
    }))
}

fn wedge(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[0] * b[1] - a[1] * b[0],
        a[0] * b[2] - a[2] * b[0],
        a[1] * b[2] - a[2] * b[1],
    ]
}

/// Sectional curvature `⟨R̄^L(X2, X3)X3, X2⟩` of the tangent plane, from the
/// ambient curvature forms `dω_a^c - Σ_b ω_a^b ∧ ω_b^c`.
pub fn ambient_sectional_curvature_oracle(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    let fj = model.frame_jets(sj.point, 4)?;
    let c = connection_coeffs_jet(&fj.a12, &fj.a13, &fj.a23, l);
    let s = Jet::constant(l.sqrt(), 3);
    let el = [fj.coframe[0], fj.coframe[1], fj.coframe[2].map(|j| j * s)];
    let forms: [[Vec3J; 3]; 3] = std::array::from_fn(|a| {
        std::array::from_fn(|b| std::array::from_fn(|i| (0..3).map(|k| c[a][b][k] * el[k][i]).sum::<Jet>()))
    });
    let vals = forms.map(|r| r.map(|w| values(&w)));
    let lf = sj.l_adapted_frame(l);
    let comp = |x: &[f64; 3]| -> [f64; 3] {
        let cof = fj.coframe.map(|r| values(&r));
        [pair(&cof[0], x), pair(&cof[1], x), pair(&cof[2], x) * l.sqrt()]
    };
    let (x2c, x3c) = (comp(&lf.x2), comp(&lf.x3));
    let mut k = 0.0;
    for a in 0..3 {
        for cc in 0..3 {
            let dw = exterior_derivative_jet(&forms[a][cc]).map(|j| j.value());
            let mut r = dw;
            for b in 0..3 {
                let w = wedge(&vals[a][b], &vals[b][cc]);
                for i in 0..3 {
                    r[i] -= w[i];
                }
            }
            k += x3c[a] * x2c[cc] * two_form_eval(&r, &lf.x2, &lf.x3);
        }
    }
    Ok(k)
}

/// A curve `t ↦ (u(t), v(t))` in the parameter domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveOnSurface {
    pub u: Expression,
    pub v: Expression,
    pub interval: [f64; 2],
    /// Traverse the interval backwards (`t ↦ a + b - t`).
    pub reversed: bool,
}

impl CurveOnSurface {
    pub fn parse(u: &str, v: &str, interval: [f64; 2]) -> Result<Self, ParseError> {
        Ok(CurveOnSurface {
            u: Expression::parse(u, &["t"])?,
            v: Expression::parse(v, &["t"])?,
            interval,
            reversed: false,
        })
    }

    pub fn reversed(&self) -> Self {
        CurveOnSurface {
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    /// `(u, v)` as jets in `t`.
    pub fn jets(&self, t: f64, order: usize) -> Result<[Jet; 2], GeometryError> {
        let tj = Jet::variable(t, 0, 1, order);
        let s = if self.reversed {
            -tj + (self.interval[0] + self.interval[1])
        } else {
            tj
        };
        Ok([self.u.eval_jet(&[s])?, self.v.eval_jet(&[s])?])
    }

    pub fn at(&self, t: f64) -> Result<[f64; 2], GeometryError> {
        let c = self.jets(t, 0)?;
        Ok([c[0].value(), c[1].value()])
    }
}

/// Curve data at one parameter: `γ' = x f2 + y f3` with `x, y, A` as jets in `t`.
#[derive(Debug, Clone)]
pub struct CurveJets {
    pub t: f64,
    pub sj: SurfaceJets,
    pub c: [Jet; 2],
    pub x: Jet,
    pub y: Jet,
    pub a: Jet,
    /// Euclidean chart norm of `γ'`.
    pub speed: f64,
}

impl CurveJets {
    pub fn new(
        model: &SubRiemannianModel,
        surface: &SurfacePatch,
        curve: &CurveOnSurface,
        t: f64,
    ) -> Result<Self, GeometryError> {
        let c = curve.jets(t, 2)?;
        let uv = [c[0].value(), c[1].value()];
        let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
        let dc = [c[0].derivative(0), c[1].derivative(0)];
        let basis = ComposeBasis::new(&c, 2);
        let along = |j: &Jet| j.compose_with(&basis);
        let f2 = sj.f2_pullback();
        let f3 = sj.f3_pullback();
        let x = along(&f2.p) * dc[0] + along(&f2.q) * dc[1];
        let y = along(&f3.p) * dc[0] + along(&f3.q) * dc[1];
        let (pu, pv) = (values(&sj.phi_u), values(&sj.phi_v));
        let (du, dv) = (dc[0].value(), dc[1].value());
        let g: [f64; 3] = std::array::from_fn(|i| du * pu[i] + dv * pv[i]);
        let speed = pair(&g, &g).sqrt();
        Ok(CurveJets {
            t,
            a: along(&sj.a),
            sj,
            c,
            x,
            y,
            speed,
        })
    }

    pub fn velocity_uv(&self) -> [f64; 2] {
        [self.c[0].d(0), self.c[1].d(0)]
    }

    fn check_transverse(&self, model: &SubRiemannianModel) -> Result<(), GeometryError> {
        let y = self.y.value();
        if !(y.abs() >= model.tolerances().transversality * self.speed) {
            return Err(GeometryError::TransversalityViolation { t: self.t, y });
        }
        Ok(())
    }

    /// `|γ'|_L = sqrt(x² + y²(L + A²))`.
    pub fn speed_l(&self, l: f64) -> f64 {
        let (x, y, a) = (self.x.value(), self.y.value(), self.a.value());
        (x * x + y * y * (l + a * a)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveDecomposition {
    pub x: f64,
    pub y: f64,
    pub transverse: bool,
}

/// Solves `γ' = x f2 + y f3` in the tangent plane and cross-checks
/// `y = e^3(γ')`.
pub fn curve_decomposition(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
) -> Result<CurveDecomposition, GeometryError> {
    let cj = CurveJets::new(model, surface, curve, t)?;
    let [_, f2, f3] = cj.sj.f_vectors();
    let (pu, pv) = (values(&cj.sj.phi_u), values(&cj.sj.phi_v));
    let [du, dv] = cj.velocity_uv();
    let g: [f64; 3] = std::array::from_fn(|i| du * pu[i] + dv * pv[i]);
    let (a, b, c) = (pair(&f2, &f2), pair(&f2, &f3), pair(&f3, &f3));
    let (r2, r3) = (pair(&f2, &g), pair(&f3, &g));
    let det = a * c - b * b;
    let x = (c * r2 - b * r3) / det;
    let y = (a * r3 - b * r2) / det;
    let scale = 1.0 + cj.speed;
    let residual = (y - cj.y.value()).abs().max((x - cj.x.value()).abs());
    if residual > model.tolerances().algebraic * scale * 10.0 {
        return Err(GeometryError::InconsistentModel {
            what: "curve decomposition",
            point: cj.sj.point,
            residual,
        });
    }
    Ok(CurveDecomposition {
        x,
        y,
        transverse: y.abs() >= model.tolerances().transversality * cj.speed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalCurvatureParts {
    pub value: f64,
    /// `(-y^L dx^L/ds + x^L dy^L/ds)`.
    pub derivative_terms: f64,
    /// `Ω_2^{L3}(T^L)`.
    pub connection_term: f64,
}

/// `k_n^L` along the curve, with `d/ds = |γ'|_L^{-1} d/dt`.
pub fn normal_curvature_l_parts(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
    l: f64,
) -> Result<NormalCurvatureParts, GeometryError> {
    check_l(l)?;
    let cj = CurveJets::new(model, surface, curve, t)?;
    cj.check_transverse(model)?;
    let (x, y, a) = (cj.x, cj.y, cj.a);
    let r = (a * a + l).sqrt();
    let inv = (x * x + y * y * (a * a + l)).sqrt().recip();
    let xl = x * inv;
    let yl = y * r * inv;
    let speed = cj.speed_l(l);
    let derivative_terms = (-yl.value() * xl.d(0) + xl.value() * yl.d(0)) / speed;
    let om = omega_23_l_jets(&cj.sj, l);
    let connection_term = om.eval(cj.velocity_uv()) / speed;
    Ok(NormalCurvatureParts {
        value: derivative_terms + connection_term,
        derivative_terms,
        connection_term,
    })
}

pub fn normal_curvature_l(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
    l: f64,
) -> Result<f64, GeometryError> {
    Ok(normal_curvature_l_parts(model, surface, curve, t, l)?.value)
}

/// Signed geodesic curvature of the curve for the induced metric `g_ij(L)`,
/// normal on the left of the `(∂u, ∂v)` orientation.
pub fn geodesic_curvature_oracle(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let cj = CurveJets::new(model, surface, curve, t)?;
    cj.check_transverse(model)?;
    let [e, f, g] = induced_metric_jets(&cj.sj, l);
    let gm = [[e, f], [f, g]];
    let gv = gm.map(|r| r.map(|j| j.value()));
    let det = gv[0][0] * gv[1][1] - gv[0][1] * gv[1][0];
    let ginv = [[gv[1][1] / det, -gv[0][1] / det], [-gv[1][0] / det, gv[0][0] / det]];
    // Γ^k_ij = ½ g^{km}(∂_i g_jm + ∂_j g_im - ∂_m g_ij)
    let gamma = |k: usize, i: usize, j: usize| -> f64 {
        (0..2)
            .map(|m| 0.5 * ginv[k][m] * (gm[j][m].d(i) + gm[i][m].d(j) - gm[i][j].d(m)))
            .sum()
    };
    let d1 = cj.velocity_uv();
    let d2 = [cj.c[0].partial(&[2]), cj.c[1].partial(&[2])];
    let acc: [f64; 2] = std::array::from_fn(|k| {
        d2[k]
            + (0..2)
                .map(|i| (0..2).map(|j| gamma(k, i, j) * d1[i] * d1[j]).sum::<f64>())
                .sum::<f64>()
    });
    let speed2: f64 = (0..2)
        .map(|i| (0..2).map(|j| gv[i][j] * d1[i] * d1[j]).sum::<f64>())
        .sum();
    Ok(det.sqrt() * (d1[0] * acc[1] - d1[1] * acc[0]) / speed2.powf(1.5))
}

/// `k_n = sign(y) A`.
pub fn normal_curvature_limit(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
) -> Result<f64, GeometryError> {
    let cj = CurveJets::new(model, surface, curve, t)?;
    cj.check_transverse(model)?;
    Ok(cj.y.value().signum() * cj.a.value())
}
