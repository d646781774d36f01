//! Riemannian and Hausdorff densities, region and boundary quadrature, and
//! the Gauss–Bonnet checks in the limit and at finite L.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::curvature::{
    gauss_curvature_l_jets, gauss_curvature_limit_jets, omega_23_l_jets, CurveJets, CurveOnSurface, ORDER_FINITE_L,
    ORDER_LIMIT,
};
use crate::error::GeometryError;
use crate::frame::{check_l, SubRiemannianModel};
use crate::quadrature::{integrate_box, integrate_interval, refine, Estimate, GaussLegendre, QuadratureSpec};
use crate::scene::Scene;
use crate::surface::{SurfaceJets, SurfacePatch};

/// Integration region in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Rectangle {
        u: [f64; 2],
        v: [f64; 2],
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        inner_radius: f64,
        outer_radius: f64,
    },
}

impl Region {
    pub fn kind(&self) -> &'static str {
        match self {
            Region::Rectangle { .. } => "rectangle",
            Region::Disk { .. } => "disk",
            Region::Annulus { .. } => "annulus",
        }
    }

    pub fn euler_characteristic(&self) -> i32 {
        match self {
            Region::Rectangle { .. } | Region::Disk { .. } => 1,
            Region::Annulus { .. } => 0,
        }
    }

    /// Integration box in `(s, t)`: `(u, v)` for rectangles, `(r, θ)` otherwise.
    pub fn param_box(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Region::Rectangle { u, v } => (u, v),
            Region::Disk { radius, .. } => ([0.0, radius], [0.0, TAU]),
            Region::Annulus {
                inner_radius,
                outer_radius,
                ..
            } => ([inner_radius, outer_radius], [0.0, TAU]),
        }
    }

    /// `(u, v)` and the Jacobian `|∂(u,v)/∂(s,t)|`.
    pub fn map(&self, s: f64, t: f64) -> ([f64; 2], f64) {
        match *self {
            Region::Rectangle { .. } => ([s, t], 1.0),
            Region::Disk { center, .. } | Region::Annulus { center, .. } => {
                ([center[0] + s * t.cos(), center[1] + s * t.sin()], s)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rectangle { u, v } => (u[1] - u[0]) * (v[1] - v[0]),
            Region::Disk { radius, .. } => PI * radius * radius,
            Region::Annulus {
                inner_radius,
                outer_radius,
                ..
            } => PI * (outer_radius.powi(2) - inner_radius.powi(2)),
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Region::Rectangle { u, v } => (u, v),
            Region::Disk { center, radius }
            | Region::Annulus {
                center,
                outer_radius: radius,
                ..
            } => (
                [center[0] - radius, center[0] + radius],
                [center[1] - radius, center[1] + radius],
            ),
        }
    }

    /// Distance from `uv` to the region boundary.
    pub fn boundary_distance(&self, uv: [f64; 2]) -> f64 {
        match *self {
            Region::Rectangle { u, v } => {
                let inside_u = uv[0] >= u[0] && uv[0] <= u[1];
                let inside_v = uv[1] >= v[0] && uv[1] <= v[1];
                let du = (uv[0] - u[0]).abs().min((uv[0] - u[1]).abs());
                let dv = (uv[1] - v[0]).abs().min((uv[1] - v[1]).abs());
                match (inside_u, inside_v) {
                    (true, true) => du.min(dv),
                    (true, false) => dv,
                    (false, true) => du,
                    (false, false) => du.hypot(dv),
                }
            }
            Region::Disk { center, radius } => ((uv[0] - center[0]).hypot(uv[1] - center[1]) - radius).abs(),
            Region::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => {
                let r = (uv[0] - center[0]).hypot(uv[1] - center[1]);
                (r - inner_radius).abs().min((r - outer_radius).abs())
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            Region::Rectangle { u, v } => {
                if !finite(&[u[0], u[1], v[0], v[1]]) || u[0] > u[1] || v[0] > v[1] {
                    return Err("rectangle bounds must be finite and ordered".into());
                }
            }
            Region::Disk { center, radius } => {
                if !finite(&[center[0], center[1], radius]) || radius < 0.0 {
                    return Err("disk radius must be finite and non-negative".into());
                }
            }
            Region::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => {
                if !finite(&[center[0], center[1], inner_radius, outer_radius])
                    || inner_radius < 0.0
                    || outer_radius < inner_radius
                {
                    return Err("annulus radii must satisfy 0 <= inner <= outer".into());
                }
            }
        }
        Ok(())
    }

    /// Cells per axis, scaled from the base `cells` by `k / cells[0]`.
    fn cells_for(spec: &QuadratureSpec, n: usize) -> [usize; 2] {
        [n, (spec.cells[1] * n / spec.cells[0]).max(1)]
    }

    /// Adaptive integral of `f(uv)` over the region in the `du dv` measure.
    pub fn integrate<F>(&self, spec: &QuadratureSpec, f: &F) -> Result<Estimate, GeometryError>
    where
        F: Fn([f64; 2]) -> Result<f64, GeometryError> + Sync,
    {
        let rule = GaussLegendre::new(spec.order);
        let (a, b) = self.param_box();
        let g = |s: f64, t: f64| {
            let (uv, jac) = self.map(s, t);
            Ok(f(uv)? * jac)
        };
        refine(spec.cells[0], spec, |n| {
            integrate_box(&rule, a, b, Self::cells_for(spec, n), &g)
        })
    }

    /// Every node of the base quadrature grid, in reduction order.
    pub fn grid_nodes(&self, spec: &QuadratureSpec) -> Vec<[f64; 2]> {
        let rule = GaussLegendre::new(spec.order);
        let (a, b) = self.param_box();
        let n = spec.cells;
        let (ha, hb) = ((a[1] - a[0]) / n[0] as f64, (b[1] - b[0]) / n[1] as f64);
        let mut out = Vec::new();
        if ha == 0.0 || hb == 0.0 {
            return out;
        }
        for i in 0..n[0] {
            for j in 0..n[1] {
                let (a0, b0) = (a[0] + i as f64 * ha, b[0] + j as f64 * hb);
                for (s, _) in rule.mapped(a0, a0 + ha) {
                    for (t, _) in rule.mapped(b0, b0 + hb) {
                        out.push(self.map(s, t).0);
                    }
                }
            }
        }
        // Cell corners too: isolated characteristic points such as a disk
        // centre sit there and never on a Gauss node.
        for i in 0..=n[0] {
            for j in 0..=n[1] {
                out.push(self.map(a[0] + i as f64 * ha, b[0] + j as f64 * hb).0);
            }
        }
        out
    }
}

/// Adaptive integral of `f(t)` over the curve's parameter interval.
pub fn integrate_curve<F>(curve: &CurveOnSurface, spec: &QuadratureSpec, f: &F) -> Result<Estimate, GeometryError>
where
    F: Fn(f64) -> Result<f64, GeometryError> + Sync,
{
    let rule = GaussLegendre::new(spec.order);
    let [a, b] = curve.interval;
    refine(spec.segments, spec, |n| integrate_interval(&rule, a, b, n, f))
}

/// `√(L + A²) |f^2 ∧ f^3|(∂uΦ, ∂vΦ)`.
pub fn area_density_l(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let sj = SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?;
    let a = sj.a.value();
    Ok((l + a * a).sqrt() * sj.density.value().abs())
}

/// `|f^2 ∧ f^3|(∂uΦ, ∂vΦ)`.
pub fn hausdorff_area_density(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    uv: [f64; 2],
) -> Result<f64, GeometryError> {
    Ok(SurfaceJets::new(model, surface, uv, ORDER_LIMIT)?.density.value().abs())
}

/// `A` at `γ(t)` and the pairings `x = f^2(γ')`, `y = e^3(γ')`.
pub fn boundary_sample(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
) -> Result<[f64; 3], GeometryError> {
    let c = curve.jets(t, 1)?;
    let sj = SurfaceJets::new(model, surface, [c[0].value(), c[1].value()], ORDER_LIMIT)?;
    let d = [c[0].d(0), c[1].d(0)];
    Ok([sj.a.value(), sj.f2_pullback().eval(d), sj.f3_pullback().eval(d)])
}

/// `|e^3(γ'(t))|`, the Hausdorff length density against `dt`.
pub fn hausdorff_length_density(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
) -> Result<f64, GeometryError> {
    Ok(boundary_sample(model, surface, curve, t)?[2].abs())
}

/// `|γ'(t)|_L = √(x² + y²(L + A²))`.
pub fn length_density_l(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
    l: f64,
) -> Result<f64, GeometryError> {
    check_l(l)?;
    let [a, x, y] = boundary_sample(model, surface, curve, t)?;
    Ok((x * x + y * y * (l + a * a)).sqrt())
}

/// `∫_R K dσ` with `dσ = f^2 ∧ f^3` oriented by the patch.
pub fn integrate_k_dsigma(scene: &Scene) -> Result<Estimate, GeometryError> {
    let f = |uv: [f64; 2]| {
        let sj = SurfaceJets::new(&scene.model, &scene.surface, uv, ORDER_LIMIT)?;
        Ok(gauss_curvature_limit_jets(&sj) * sj.density.value())
    };
    scene.region.integrate(&scene.quadrature, &f)
}

/// `∫ k_n ds = ∫ A e^3(γ') dt` for each boundary curve.
pub fn integrate_kn_ds(scene: &Scene) -> Result<Vec<Estimate>, GeometryError> {
    scene
        .boundary
        .iter()
        .map(|c| {
            let f = |t: f64| {
                let [a, _, y] = boundary_sample(&scene.model, &scene.surface, c, t)?;
                Ok(a * y)
            };
            integrate_curve(c, &scene.quadrature, &f)
        })
        .collect()
}

/// `∫_R d(A f^3)` over the region, for comparison with the boundary sum.
pub fn integrate_d_limit_form(scene: &Scene) -> Result<Estimate, GeometryError> {
    let f = |uv: [f64; 2]| {
        let sj = SurfaceJets::new(&scene.model, &scene.surface, uv, ORDER_LIMIT)?;
        Ok(sj.f3_pullback().scale(&sj.a).d().value())
    };
    scene.region.integrate(&scene.quadrature, &f)
}

/// `(1/√L) ∫_R K^L dσ_L`.
pub fn integrate_k_l_dsigma_l(scene: &Scene, l: f64) -> Result<Estimate, GeometryError> {
    check_l(l)?;
    let f = |uv: [f64; 2]| {
        let sj = SurfaceJets::new(&scene.model, &scene.surface, uv, ORDER_FINITE_L)?;
        let a = sj.a.value();
        Ok(gauss_curvature_l_jets(&sj, l) * (l + a * a).sqrt() * sj.density.value() / l.sqrt())
    };
    scene.region.integrate(&scene.quadrature, &f)
}

/// `k_n^L |γ'|_L` against `dt`. Defined wherever `γ'` is non-zero, so it
/// does not require transversality.
pub fn kn_l_line_density(
    model: &SubRiemannianModel,
    surface: &SurfacePatch,
    curve: &CurveOnSurface,
    t: f64,
    l: f64,
) -> Result<f64, GeometryError> {
    let cj = CurveJets::new(model, surface, curve, t)?;
    let (x, y, a) = (cj.x, cj.y, cj.a);
    let r = (a * a + l).sqrt();
    let inv = (x * x + y * y * (a * a + l)).sqrt().recip();
    let (xl, yl) = (x * inv, y * r * inv);
    let turn = -yl.value() * xl.d(0) + xl.value() * yl.d(0);
    Ok(turn + omega_23_l_jets(&cj.sj, l).eval(cj.velocity_uv()))
}

/// `(1/√L) ∫ k_n^L ds_L` for each boundary curve.
pub fn integrate_kn_l_ds_l(scene: &Scene, l: f64) -> Result<Vec<Estimate>, GeometryError> {
    check_l(l)?;
    scene
        .boundary
        .iter()
        .map(|c| {
            let f = |t: f64| Ok(kn_l_line_density(&scene.model, &scene.surface, c, t, l)? / l.sqrt());
            integrate_curve(c, &scene.quadrature, &f)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteLRow {
    pub l: f64,
    /// `(1/√L) ∫ K^L dσ_L`.
    pub area_term: f64,
    /// `(1/√L) Σ ∫ k_n^L ds_L`.
    pub boundary_term: f64,
    pub scaled_sum: f64,
    /// `(1/√L) 2πχ`, signed by the patch orientation.
    pub expected: f64,
    pub deviation: f64,
    pub error_estimate: f64,
}

pub fn finite_l_gauss_bonnet(scene: &Scene, l: f64) -> Result<FiniteLRow, GeometryError> {
    let area = integrate_k_l_dsigma_l(scene, l)?;
    let bnd = integrate_kn_l_ds_l(scene, l)?;
    let boundary_term = bnd.iter().fold(0.0, |s, e| s + e.value);
    let scaled_sum = area.value + boundary_term;
    let expected = scene.surface.orientation.sign() * TAU * scene.euler_characteristic as f64 / l.sqrt();
    Ok(FiniteLRow {
        l,
        area_term: area.value,
        boundary_term,
        scaled_sum,
        expected,
        deviation: scaled_sum - expected,
        error_estimate: area.error + bnd.iter().fold(0.0, |s, e| s + e.error),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTerm {
    pub index: usize,
    pub u: String,
    pub v: String,
    pub t: [f64; 2],
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesCheck {
    /// `∫_R d(A f^3)`.
    pub region: f64,
    /// `Σ ∫_γ A f^3`.
    pub boundary: f64,
    pub relative_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussBonnetReport {
    pub scene: String,
    pub model: String,
    pub region: Region,
    pub euler_characteristic: i32,
    pub integral_k_dsigma: Estimate,
    pub boundary: Vec<BoundaryTerm>,
    pub boundary_total: f64,
    /// `∫ K dσ + Σ ∫ k_n ds`, summed in the listed order.
    pub residual: f64,
    pub residual_error: f64,
    pub stokes: StokesCheck,
    pub finite_l: Vec<FiniteLRow>,
}

/// Limit residual, Stokes cross-check, and a finite-L row per entry of `ls`.
pub fn gauss_bonnet_report(scene: &Scene, ls: &[f64]) -> Result<GaussBonnetReport, GeometryError> {
    let k = integrate_k_dsigma(scene)?;
    let kn = integrate_kn_ds(scene)?;
    let boundary: Vec<BoundaryTerm> = kn
        .iter()
        .zip(&scene.boundary)
        .enumerate()
        .map(|(i, (e, c))| BoundaryTerm {
            index: i,
            u: c.u.source().to_string(),
            v: c.v.source().to_string(),
            t: c.interval,
            value: e.value,
            error: e.error,
            converged: e.converged,
        })
        .collect();
    let boundary_total = boundary.iter().fold(0.0, |s, b| s + b.value);
    let residual = k.value + boundary_total;
    let residual_error = k.error + boundary.iter().fold(0.0, |s, b| s + b.error);
    let d = integrate_d_limit_form(scene)?;
    let stokes = StokesCheck {
        region: d.value,
        boundary: boundary_total,
        relative_difference: (d.value - boundary_total).abs() / d.value.abs().max(boundary_total.abs()).max(1e-300),
    };
    let finite_l = ls
        .iter()
        .map(|&l| finite_l_gauss_bonnet(scene, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GaussBonnetReport {
        scene: scene.name.clone(),
        model: scene.model.name().to_string(),
        region: scene.region,
        euler_characteristic: scene.euler_characteristic,
        integral_k_dsigma: k,
        boundary,
        boundary_total,
        residual,
        residual_error,
        stokes,
        finite_l,
    })
}

/// Limit residual only (no finite-L rows).
pub fn gauss_bonnet_residual(scene: &Scene) -> Result<GaussBonnetReport, GeometryError> {
    gauss_bonnet_report(scene, &[])
}
