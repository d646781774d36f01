//! Contact geometry of a horizontal orthonormal frame `(e1, e2)`: the
//! normalized annihilator `ω`, the Reeb field `e3`, structure functions,
//! the coframe, the metric family `g_L` and its Levi-Civita connection
//! forms (closed form and Koszul oracle).

use serde::Serialize;

use crate::calculus::fields::{
    bracket_jet, cross_jet, dual_basis_jet, exterior_derivative_jet, pair_jet, scale_vec, two_form_eval_jet, values,
    Vec3J,
};
use crate::calculus::{ComposeBasis, Expression, Jet, ParseError, VectorFieldC};
use crate::error::GeometryError;
use crate::tolerances::Tolerances;

/// A rank-two contact distribution with a declared orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SubRiemannianModel {
    name: String,
    e1: VectorFieldC,
    e2: VectorFieldC,
    tol: Tolerances,
}

/// Jets of every frame-derived field at one chart point.
///
/// With seed order `N`: `e1`, `e2` are exact to order `N`, `ω` to `N-1`,
/// `e3`, the coframe and `a12` to `N-2`, and `a13`, `a23` to `N-3`.
#[derive(Debug, Clone)]
pub struct FrameJets {
    pub point: [f64; 3],
    /// `e1, e2, e3` in coordinate components.
    pub e: [Vec3J; 3],
    /// Dual coframe `e^1, e^2, e^3`; `e^3 = ω`.
    pub coframe: [Vec3J; 3],
    /// `a12^1, a12^2`.
    pub a12: [Jet; 2],
    pub a13: [Jet; 2],
    pub a23: [Jet; 2],
    /// `ω([e1, e2])` before normalization; the contact scale.
    pub contact_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureFunctions {
    pub a12_1: f64,
    pub a12_2: f64,
    pub a13_1: f64,
    pub a13_2: f64,
    pub a23_1: f64,
    pub a23_2: f64,
}

impl StructureFunctions {
    pub fn trace_residual(&self) -> f64 {
        self.a13_1 + self.a23_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoframeSample {
    /// `rows[k]` = components of `e^{k+1}` on `(dx, dy, dz)`.
    pub rows: [[f64; 3]; 3],
}

impl CoframeSample {
    /// Coframe dual to `e1, e2, e3/√L`: `e^1, e^2, √L e^3`.
    pub fn scaled(&self, l: f64) -> [[f64; 3]; 3] {
        let s = l.sqrt();
        [self.rows[0], self.rows[1], self.rows[2].map(|c| c * s)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSample {
    pub l: f64,
    pub g: [[f64; 3]; 3],
}

/// Connection forms `ω_i^{Lj} = Σ_k c[i][j][k] e_L^k` (indices from 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionFormsL {
    pub l: f64,
    pub c: [[[f64; 3]; 3]; 3],
}

impl ConnectionFormsL {
    pub fn max_abs_diff(&self, other: &ConnectionFormsL) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m = m.max((self.c[i][j][k] - other.c[i][j][k]).abs());
                }
            }
        }
        m
    }
}

/// The limits of the rescaled connection forms, on `(e^1, e^2, e^3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitConnectionForms {
    pub omega_12: [f64; 3],
    pub omega_13: [f64; 3],
    pub omega_23: [f64; 3],
}

/// Maximum residuals of the contact identities at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ContactResiduals {
    /// `|ω(e1)| + |ω(e2)|`.
    pub annihilation: f64,
    /// `|dω(e1, e2) + 1|`.
    pub normalization: f64,
    /// `|ω(e3) - 1|`.
    pub reeb_unit: f64,
    /// `max |dω(e3, ·)|`.
    pub reeb_kernel: f64,
    /// `|a13^1 + a23^2|`.
    pub trace: f64,
    /// `max |e^i(e_j) - δ|`.
    pub duality: f64,
    /// `max |de^3 + e^1∧e^2|` over coordinate planes.
    pub structure_equation: f64,
}

impl ContactResiduals {
    pub fn max(&self) -> f64 {
        [
            self.annihilation,
            self.normalization,
            self.reeb_unit,
            self.reeb_kernel,
            self.trace,
            self.duality,
            self.structure_equation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl SubRiemannianModel {
    pub fn new(name: impl Into<String>, e1: VectorFieldC, e2: VectorFieldC) -> Self {
        SubRiemannianModel {
            name: name.into(),
            e1,
            e2,
            tol: Tolerances::default(),
        }
    }

    pub fn parse(name: &str, e1: [&str; 3], e2: [&str; 3]) -> Result<Self, ParseError> {
        Ok(Self::new(name, VectorFieldC::parse(e1)?, VectorFieldC::parse(e2)?))
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn frame_exprs(&self) -> (&[Expression; 3], &[Expression; 3]) {
        (&self.e1.0, &self.e2.0)
    }

    /// Builds every frame-derived jet at `p` from a seed of the given order.
    ///
    /// The order must be at least 3 so the structure functions exist.
    pub fn frame_jets(&self, p: [f64; 3], order: usize) -> Result<FrameJets, GeometryError> {
        assert!(order >= 3, "frame jets need seed order >= 3");
        let seed = Jet::seed(p, order);
        self.frame_jets_seeded(p, &seed)
    }

    fn frame_jets_seeded(&self, p: [f64; 3], seed: &Vec3J) -> Result<FrameJets, GeometryError> {
        let e1 = self.e1.jet(seed)?;
        let e2 = self.e2.jet(seed)?;

        let theta = cross_jet(&e1, &e2);
        let scale = norm(&values(&e1)) * norm(&values(&e2));
        let independence = norm(&values(&theta)) / scale.max(f64::MIN_POSITIVE);
        if !(independence >= self.tol.degenerate) {
            return Err(GeometryError::DegenerateFrame {
                point: p,
                measure: independence,
            });
        }

        // dθ(e1, e2) = -θ([e1, e2]), so ω = θ / θ([e1, e2]) gives dω(e1, e2) = -1.
        let b12 = bracket_jet(&e1, &e2);
        let s = pair_jet(&theta, &b12);
        let s_rel = s.value().abs() / (norm(&values(&theta)) * norm(&values(&b12))).max(f64::MIN_POSITIVE);
        if !(s_rel >= self.tol.degenerate) || s.value() == 0.0 {
            return Err(GeometryError::NonContact {
                point: p,
                value: -s.value(),
            });
        }
        let omega = scale_vec(&theta, &s.recip());

        // Reeb field: ω(e3) = 1, dω(e3, e1) = dω(e3, e2) = 0.
        let domega = exterior_derivative_jet(&omega);
        let interior = |x: &Vec3J| -> Vec3J {
            let basis =
                |k: usize| -> Vec3J { std::array::from_fn(|i| Jet::constant(if i == k { 1.0 } else { 0.0 }, 3)) };
            [
                two_form_eval_jet(&domega, x, &basis(0)),
                two_form_eval_jet(&domega, x, &basis(1)),
                two_form_eval_jet(&domega, x, &basis(2)),
            ]
        };
        let rows = [omega, interior(&e1), interior(&e2)];
        let det = pair_jet(&rows[0], &cross_jet(&rows[1], &rows[2]));
        let det_scale: f64 = rows.iter().map(|r| norm(&values(r))).product();
        if !(det.value().abs() >= self.tol.degenerate * det_scale) {
            return Err(GeometryError::Singular {
                what: "Reeb system",
                point: p,
                det: det.value(),
            });
        }
        let e3 = scale_vec(&cross_jet(&rows[1], &rows[2]), &det.recip());

        let (mut coframe, fdet) = dual_basis_jet(&[e1, e2, e3]);
        if !(fdet.value().abs() >= self.tol.degenerate * scale * norm(&values(&e3))) {
            return Err(GeometryError::Singular {
                what: "frame matrix",
                point: p,
                det: fdet.value(),
            });
        }
        coframe[2] = omega;

        let b13 = bracket_jet(&e1, &e3);
        let b23 = bracket_jet(&e2, &e3);
        let comp = |k: usize, b: &Vec3J| pair_jet(&coframe[k], b);
        let a12 = [comp(0, &b12), comp(1, &b12)];
        let a13 = [comp(0, &b13), comp(1, &b13)];
        let a23 = [comp(0, &b23), comp(1, &b23)];

        let res12 = (comp(2, &b12).value() - 1.0).abs();
        let res13 = comp(2, &b13).value().abs();
        let res23 = comp(2, &b23).value().abs();
        let residual = res12.max(res13).max(res23);
        if !(residual <= self.tol.bracket_residual) {
            return Err(GeometryError::InconsistentModel {
                what: "bracket expansion",
                point: p,
                residual,
            });
        }

        Ok(FrameJets {
            point: p,
            e: [e1, e2, e3],
            coframe,
            a12,
            a13,
            a23,
            contact_scale: s.value(),
        })
    }

    /// `ω` at `p` on `(dx, dy, dz)`.
    pub fn annihilator_form(&self, p: [f64; 3]) -> Result<[f64; 3], GeometryError> {
        Ok(values(&self.frame_jets(p, 3)?.coframe[2]))
    }

    /// Reeb field `e3` at `p`.
    pub fn reeb_field(&self, p: [f64; 3]) -> Result<[f64; 3], GeometryError> {
        Ok(values(&self.frame_jets(p, 3)?.e[2]))
    }

    pub fn structure_functions(&self, p: [f64; 3]) -> Result<StructureFunctions, GeometryError> {
        let f = self.frame_jets(p, 3)?;
        let sf = f.structure_functions();
        if !(sf.trace_residual().abs() <= self.tol.algebraic.max(1e-8)) {
            return Err(GeometryError::InconsistentModel {
                what: "a13^1 + a23^2",
                point: p,
                residual: sf.trace_residual(),
            });
        }
        Ok(sf)
    }

    pub fn coframe(&self, p: [f64; 3]) -> Result<CoframeSample, GeometryError> {
        let f = self.frame_jets(p, 3)?;
        Ok(CoframeSample {
            rows: f.coframe.map(|r| values(&r)),
        })
    }

    /// `g_L = e^1⊗e^1 + e^2⊗e^2 + L e^3⊗e^3` in chart coordinates.
    pub fn metric_matrix(&self, l: f64, p: [f64; 3]) -> Result<MetricSample, GeometryError> {
        check_l(l)?;
        let c = self.coframe(p)?;
        Ok(MetricSample {
            l,
            g: metric_from_coframe(&c.rows, l),
        })
    }

    /// Levi-Civita connection forms of `g_L` from the Koszul formula with
    /// numerically evaluated brackets of the scaled frame.
    pub fn koszul_connection_oracle(&self, l: f64, p: [f64; 3]) -> Result<ConnectionFormsL, GeometryError> {
        check_l(l)?;
        let f = self.frame_jets(p, 3)?;
        Ok(koszul_from_frame(&f, l))
    }

    /// Residuals of every contact identity at `p`.
    pub fn contact_residuals(&self, p: [f64; 3]) -> Result<ContactResiduals, GeometryError> {
        let f = self.frame_jets(p, 3)?;
        let omega = &f.coframe[2];
        let domega = exterior_derivative_jet(omega);
        let ev = |a: &Vec3J, b: &Vec3J| two_form_eval_jet(&domega, a, b).value();
        let [e1, e2, e3] = &f.e;
        let mut r = ContactResiduals {
            annihilation: pair_jet(omega, e1).value().abs() + pair_jet(omega, e2).value().abs(),
            normalization: (ev(e1, e2) + 1.0).abs(),
            reeb_unit: (pair_jet(omega, e3).value() - 1.0).abs(),
            reeb_kernel: ev(e3, e1).abs().max(ev(e3, e2).abs()),
            trace: f.structure_functions().trace_residual().abs(),
            ..Default::default()
        };
        for i in 0..3 {
            for j in 0..3 {
                let d = pair_jet(&f.coframe[i], &f.e[j]).value() - if i == j { 1.0 } else { 0.0 };
                r.duality = r.duality.max(d.abs());
            }
        }
        // de^3 + e^1∧e^2 on the coordinate planes (dx∧dy, dx∧dz, dy∧dz)
        let de3 = exterior_derivative_jet(omega);
        let c1 = values(&f.coframe[0]);
        let c2 = values(&f.coframe[1]);
        let wedge = [
            c1[0] * c2[1] - c1[1] * c2[0],
            c1[0] * c2[2] - c1[2] * c2[0],
            c1[1] * c2[2] - c1[2] * c2[1],
        ];
        for k in 0..3 {
            r.structure_equation = r.structure_equation.max((de3[k].value() + wedge[k]).abs());
        }
        Ok(r)
    }
}

impl FrameJets {
    pub fn structure_functions(&self) -> StructureFunctions {
        StructureFunctions {
            a12_1: self.a12[0].value(),
            a12_2: self.a12[1].value(),
            a13_1: self.a13[0].value(),
            a13_2: self.a13[1].value(),
            a23_1: self.a23[0].value(),
            a23_2: self.a23[1].value(),
        }
    }

    /// Composes every field with a change of variables (see [`Jet::compose`]).
    pub fn compose(&self, inner: &[Jet; 3]) -> FrameJets {
        let basis = ComposeBasis::new(inner, 3);
        let c = |j: &Jet| j.compose_with(&basis);
        let cv = |v: &Vec3J| v.map(|j| c(&j));
        FrameJets {
            point: self.point,
            e: self.e.each_ref().map(cv),
            coframe: self.coframe.each_ref().map(cv),
            a12: self.a12.map(|j| c(&j)),
            a13: self.a13.map(|j| c(&j)),
            a23: self.a23.map(|j| c(&j)),
            contact_scale: self.contact_scale,
        }
    }
}

pub(crate) fn check_l(l: f64) -> Result<(), GeometryError> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(GeometryError::InvalidArgument(format!(
            "L must be positive and finite, got {l}"
        )));
    }
    Ok(())
}

pub(crate) fn metric_from_coframe(rows: &[[f64; 3]; 3], l: f64) -> [[f64; 3]; 3] {
    let w = [1.0, 1.0, l];
    std::array::from_fn(|a| std::array::from_fn(|b| (0..3).map(|k| w[k] * rows[k][a] * rows[k][b]).sum()))
}

fn koszul_from_frame(f: &FrameJets, l: f64) -> ConnectionFormsL {
    let s = l.sqrt();
    let inv = Jet::constant(1.0 / s, 3);
    let frame = [f.e[0], f.e[1], scale_vec(&f.e[2], &inv)];
    let cof = [
        values(&f.coframe[0]),
        values(&f.coframe[1]),
        values(&f.coframe[2]).map(|c| c * s),
    ];
    let br: [[[f64; 3]; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| values(&bracket_jet(&frame[i], &frame[j]))));
    let g = |k: usize, v: &[f64; 3]| cof[k][0] * v[0] + cof[k][1] * v[1] + cof[k][2] * v[2];
    // 2⟨∇_{e_i} e_j, e_k⟩ = ⟨[e_i,e_j],e_k⟩ - ⟨[e_j,e_k],e_i⟩ + ⟨[e_k,e_i],e_j⟩
    let koszul = |i: usize, j: usize, k: usize| 0.5 * (g(k, &br[i][j]) - g(i, &br[j][k]) + g(j, &br[k][i]));
    // ω_j^{Lk}(e_i^L) = ⟨∇_{e_i} e_j, e_k⟩
    let c = std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|i| koszul(i, j, k))));
    ConnectionFormsL { l, c }
}

/// Closed-form connection coefficients with jet-valued structure functions.
pub(crate) fn connection_coeffs_jet(a12: &[Jet; 2], a13: &[Jet; 2], a23: &[Jet; 2], l: f64) -> [[[Jet; 3]; 3]; 3] {
    let nv = a13[0].nvars();
    let zero = Jet::constant(0.0, nv);
    let s = l.sqrt();
    let h = 1.0 / (2.0 * s);
    let w12 = [-a12[0], -a12[1], (a23[0] - a13[1] - l) * h];
    let w13 = [a13[0] * (-1.0 / s), (a13[1] + a23[0] + l) * (-h), zero];
    let w23 = [(-a13[1] - a23[0] + l) * h, a23[1] * (-1.0 / s), zero];
    let neg = |w: &[Jet; 3]| w.map(|j| -j);
    [
        [[zero; 3], w12, w13],
        [neg(&w12), [zero; 3], w23],
        [neg(&w13), neg(&w23), [zero; 3]],
    ]
}

/// Connection forms of `g_L` from the structure functions (closed form).
pub fn connection_forms_l(sf: &StructureFunctions, l: f64) -> ConnectionFormsL {
    let j = |v: f64| Jet::constant(v, 0);
    let c = connection_coeffs_jet(
        &[j(sf.a12_1), j(sf.a12_2)],
        &[j(sf.a13_1), j(sf.a13_2)],
        &[j(sf.a23_1), j(sf.a23_2)],
        l,
    );
    ConnectionFormsL {
        l,
        c: c.map(|r| r.map(|w| w.map(|x| x.value()))),
    }
}

/// `ω_1^2 = -e^3/2`, `ω_1^3 = -e^2/2`, `ω_2^3 = e^1/2`.
pub fn limit_forms() -> LimitConnectionForms {
    LimitConnectionForms {
        omega_12: [0.0, 0.0, -0.5],
        omega_13: [0.0, -0.5, 0.0],
        omega_23: [0.5, 0.0, 0.0],
    }
}

/// Max-norm distance of `(1/L)ω_1^{L2}`, `(1/√L)ω_1^{L3}`, `(1/√L)ω_2^{L3}`
/// from their limits, all expressed on `(e^1, e^2, e^3)`.
pub fn scaled_form_deviation(sf: &StructureFunctions, l: f64) -> [f64; 3] {
    let c = connection_forms_l(sf, l);
    let s = l.sqrt();
    // e_L^k = e^k for k = 1, 2 and √L e^3
    let on_e = |w: [f64; 3]| [w[0], w[1], w[2] * s];
    let lim = limit_forms();
    let dev = |w: [f64; 3], k: f64, target: [f64; 3]| {
        let w = on_e(w);
        (0..3).map(|i| (w[i] * k - target[i]).abs()).fold(0.0, f64::max)
    };
    [
        dev(c.c[0][1], 1.0 / l, lim.omega_12),
        dev(c.c[0][2], 1.0 / s, lim.omega_13),
        dev(c.c[1][2], 1.0 / s, lim.omega_23),
    ]
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn heis() -> SubRiemannianModel {
        SubRiemannianModel::parse("heisenberg", ["1", "0", "-y/2"], ["0", "1", "x/2"]).unwrap()
    }

    fn roto() -> SubRiemannianModel {
        SubRiemannianModel::parse("rototranslation", ["cos(z)", "sin(z)", "0"], ["0", "0", "1"]).unwrap()
    }

    fn minkowski() -> SubRiemannianModel {
        SubRiemannianModel::parse("minkowski", ["cosh(z)", "sinh(z)", "0"], ["0", "0", "1"]).unwrap()
    }

    fn close3(a: [f64; 3], b: [f64; 3], eps: f64) {
        for i in 0..3 {
            assert_abs_diff_eq!(a[i], b[i], epsilon = eps);
        }
    }

    #[test]
    fn annihilator_examples() {
        close3(
            heis().annihilator_form([1.0, 0.0, 0.0]).unwrap(),
            [0.0, -0.5, 1.0],
            1e-15,
        );
        close3(
            roto().annihilator_form([0.0, 0.0, 0.0]).unwrap(),
            [0.0, -1.0, 0.0],
            1e-15,
        );
        let flipped = SubRiemannianModel::parse("flip", ["-1", "0", "y/2"], ["0", "-1", "-x/2"]).unwrap();
        let p = [0.3, -0.8, 1.1];
        close3(
            flipped.annihilator_form(p).unwrap(),
            heis().annihilator_form(p).unwrap(),
            1e-15,
        );
    }

    #[test]
    fn reeb_examples() {
        close3(heis().reeb_field([0.4, -1.0, 2.0]).unwrap(), [0.0, 0.0, 1.0], 1e-14);
        close3(
            roto().reeb_field([0.0, 0.0, std::f64::consts::FRAC_PI_2]).unwrap(),
            [1.0, 0.0, 0.0],
            1e-14,
        );
        close3(
            minkowski().reeb_field([0.0, 0.0, 0.0]).unwrap(),
            [0.0, -1.0, 0.0],
            1e-14,
        );
    }

    #[test]
    fn structure_function_examples() {
        let h = heis().structure_functions([0.3, 0.2, -0.1]).unwrap();
        for v in [h.a12_1, h.a12_2, h.a13_1, h.a13_2, h.a23_1, h.a23_2] {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
        }
        let r = roto().structure_functions([0.5, -0.3, 1.2]).unwrap();
        assert_abs_diff_eq!(r.a23_1, 1.0, epsilon = 1e-14);
        for v in [r.a12_1, r.a12_2, r.a13_1, r.a13_2, r.a23_2] {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
        }
        let m = minkowski().structure_functions([0.5, -0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(m.a23_1, -1.0, epsilon = 1e-13);
    }

    #[test]
    fn coframe_examples() {
        let c = heis().coframe([0.0; 3]).unwrap();
        assert_eq!(c.rows, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let c = roto().coframe([0.0; 3]).unwrap();
        close3(c.rows[0], [1.0, 0.0, 0.0], 1e-15);
        close3(c.rows[1], [0.0, 0.0, 1.0], 1e-15);
        close3(c.rows[2], [0.0, -1.0, 0.0], 1e-15);
    }

    #[test]
    fn metric_examples() {
        let g = heis().metric_matrix(9.0, [0.0; 3]).unwrap().g;
        assert_eq!(g, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 9.0]]);
        let g = heis().metric_matrix(1.0, [0.0; 3]).unwrap().g;
        assert_eq!(g, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(heis().metric_matrix(0.0, [0.0; 3]).is_err());
    }

    #[test]
    fn closed_form_connection_examples() {
        let zero = StructureFunctions {
            a12_1: 0.0,
            a12_2: 0.0,
            a13_1: 0.0,
            a13_2: 0.0,
            a23_1: 0.0,
            a23_2: 0.0,
        };
        let c = connection_forms_l(&zero, 4.0);
        assert_eq!(c.c[0][1][2], -1.0);
        let rt = StructureFunctions { a23_1: 1.0, ..zero };
        let c = connection_forms_l(&rt, 1.0);
        assert_eq!(c.c[0][1][2], 0.0);
        for k in 0..3 {
            assert_eq!(c.c[0][1][k], -c.c[1][0][k]);
        }
    }

    #[test]
    fn koszul_matches_closed_form() {
        let c = heis().koszul_connection_oracle(4.0, [0.2, 0.9, -1.0]).unwrap();
        let sf = heis().structure_functions([0.2, 0.9, -1.0]).unwrap();
        assert!(c.max_abs_diff(&connection_forms_l(&sf, 4.0)) <= 1e-9);
        let p = [0.3, -1.2, 0.7];
        let c = roto().koszul_connection_oracle(100.0, p).unwrap();
        let sf = roto().structure_functions(p).unwrap();
        assert!(c.max_abs_diff(&connection_forms_l(&sf, 100.0)) <= 1e-8);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_abs_diff_eq!(c.c[i][j][k], -c.c[j][i][k], epsilon = 1e-12);
                }
            }
        }
    }

    /// Heisenberg frame rotated by a non-constant angle and rescaled, so
    /// every structure function is generically non-zero.
    pub(crate) fn twisted() -> SubRiemannianModel {
        let l = "(1 + 0.2*sin(x))";
        let c = "cos(0.3*x*z + y)";
        let s = "sin(0.3*x*z + y)";
        let e1 = [
            format!("{l}*{c}"),
            format!("{l}*{s}"),
            format!("{l}*(-{c}*y/2 + {s}*x/2)"),
        ];
        let e2 = [
            format!("-{l}*{s}"),
            format!("{l}*{c}"),
            format!("{l}*({s}*y/2 + {c}*x/2)"),
        ];
        SubRiemannianModel::parse("twisted", [&e1[0], &e1[1], &e1[2]], [&e2[0], &e2[1], &e2[2]]).unwrap()
    }

    #[test]
    fn koszul_matches_closed_form_for_generic_structure() {
        let m = twisted();
        for p in [[0.3, -0.4, 0.8], [-1.1, 0.5, 0.2], [0.9, 1.3, -0.6]] {
            let sf = m.structure_functions(p).unwrap();
            for v in [sf.a12_1, sf.a12_2, sf.a13_1, sf.a13_2, sf.a23_1] {
                assert!(v.abs() > 1e-3, "{sf:?}");
            }
            assert!(m.contact_residuals(p).unwrap().max() < 1e-10);
            for l in [1.0, 10.0, 100.0] {
                let k = m.koszul_connection_oracle(l, p).unwrap();
                let d = k.max_abs_diff(&connection_forms_l(&sf, l));
                assert!(d < 1e-9, "L = {l}: {d:e}");
            }
        }
    }

    #[test]
    fn deviation_examples() {
        let sf = heis().structure_functions([0.0; 3]).unwrap();
        for l in [1.0, 10.0, 1e4] {
            assert_abs_diff_eq!(scaled_form_deviation(&sf, l)[0], 0.0, epsilon = 1e-15);
        }
        let sf = roto().structure_functions([0.1, 0.2, 0.3]).unwrap();
        assert_abs_diff_eq!(scaled_form_deviation(&sf, 100.0)[0], 0.005, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_and_non_contact_frames() {
        let deg = SubRiemannianModel::parse("deg", ["1", "0", "0"], ["2", "0", "0"]).unwrap();
        assert!(matches!(
            deg.frame_jets([0.0; 3], 3),
            Err(GeometryError::DegenerateFrame { .. })
        ));
        let flat = SubRiemannianModel::parse("flat", ["1", "0", "0"], ["0", "1", "0"]).unwrap();
        assert!(matches!(
            flat.frame_jets([0.0; 3], 3),
            Err(GeometryError::NonContact { .. })
        ));
    }
}
