//! Scene files: JSON parsing with path-aware errors, validation, and
//! serialization back to JSON.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::calculus::{Expression, ParseError, VectorFieldC};
use crate::curvature::CurveOnSurface;
use crate::error::{GeometryError, SceneError};
use crate::frame::SubRiemannianModel;
use crate::measures::Region;
use crate::models::{builtin_scene_source, load_builtin};
use crate::quadrature::{integrate_interval, GaussLegendre, QuadratureSpec};
use crate::surface::{characteristic_classify, Classification, Orientation, ParamRect, SurfacePatch, SURFACE_VARS};
use crate::tolerances::Tolerances;

/// How the scene names its model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Builtin(String),
    Frame { e1: [String; 3], e2: [String; 3] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub model_spec: ModelSpec,
    pub model: SubRiemannianModel,
    pub surface: SurfacePatch,
    pub region: Region,
    pub euler_characteristic: i32,
    pub boundary: Vec<CurveOnSurface>,
    pub boundary_notes: Vec<Option<String>>,
    pub quadrature: QuadratureSpec,
    pub tolerances: Tolerances,
    pub l_grid: Vec<f64>,
}

/// Summary of a successful validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub nodes_scanned: usize,
    pub min_characteristic_margin: f64,
    pub max_contact_residual: f64,
    pub max_boundary_distance: f64,
    /// `Σ ∮ u dv` over the boundary curves divided by the region area.
    pub boundary_orientation_ratio: f64,
    pub warnings: Vec<String>,
}

fn schema(path: &str, msg: impl Into<String>) -> SceneError {
    SceneError::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>, SceneError> {
    let m = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    if let Some(k) = m.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(
            &format!("{path}.{k}"),
            format!("unknown key (allowed: {})", allowed.join(", ")),
        ));
    }
    Ok(m)
}

fn required<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, SceneError> {
    m.get(key)
        .ok_or_else(|| schema(&format!("{path}.{key}"), "missing required key"))
}

/// A number, or a string holding a constant expression such as `"2*pi"`.
fn number(v: &Value, path: &str) -> Result<f64, SceneError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(path, "number out of range")),
        Value::String(s) => {
            let e = Expression::parse(s, &[]).map_err(|source| SceneError::Expression {
                path: path.to_string(),
                source,
            })?;
            e.eval(&[]).map_err(|err| schema(path, err.to_string()))
        }
        _ => Err(schema(path, "expected a number")),
    }
}

fn pair(v: &Value, path: &str) -> Result<[f64; 2], SceneError> {
    let a = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema(path, "expected an array of 2 numbers"))?;
    Ok([
        number(&a[0], &format!("{path}[0]"))?,
        number(&a[1], &format!("{path}[1]"))?,
    ])
}

fn strings<const N: usize>(v: &Value, path: &str) -> Result<[String; N], SceneError> {
    let a = v
        .as_array()
        .filter(|a| a.len() == N)
        .ok_or_else(|| schema(path, format!("expected an array of {N} expression strings")))?;
    let mut out: [String; N] = std::array::from_fn(|_| String::new());
    for (i, x) in a.iter().enumerate() {
        out[i] = x
            .as_str()
            .ok_or_else(|| schema(&format!("{path}[{i}]"), "expected an expression string"))?
            .to_string();
    }
    Ok(out)
}

fn expr(text: &str, vars: &[&str], path: String) -> Result<Expression, SceneError> {
    Expression::parse(text, vars).map_err(|source: ParseError| SceneError::Expression { path, source })
}

fn exprs3(texts: &[String; 3], vars: &[&str], path: &str) -> Result<[Expression; 3], SceneError> {
    Ok([
        expr(&texts[0], vars, format!("{path}[0]"))?,
        expr(&texts[1], vars, format!("{path}[1]"))?,
        expr(&texts[2], vars, format!("{path}[2]"))?,
    ])
}

fn parse_model(v: &Value) -> Result<(ModelSpec, SubRiemannianModel), SceneError> {
    let path = "$.model";
    let m = object(v, path, &["builtin", "frame"])?;
    match (m.get("builtin"), m.get("frame")) {
        (Some(b), None) => {
            let name = b
                .as_str()
                .ok_or_else(|| schema("$.model.builtin", "expected a model name"))?;
            Ok((ModelSpec::Builtin(name.to_string()), load_builtin(name)?))
        }
        (None, Some(f)) => {
            let fp = "$.model.frame";
            let fm = object(f, fp, &["e1", "e2"])?;
            let e1: [String; 3] = strings(required(fm, "e1", fp)?, "$.model.frame.e1")?;
            let e2: [String; 3] = strings(required(fm, "e2", fp)?, "$.model.frame.e2")?;
            let chart = ["x", "y", "z"];
            let x1 = exprs3(&e1, &chart, "$.model.frame.e1")?;
            let x2 = exprs3(&e2, &chart, "$.model.frame.e2")?;
            let model = SubRiemannianModel::new("inline", VectorFieldC(x1), VectorFieldC(x2));
            Ok((ModelSpec::Frame { e1, e2 }, model))
        }
        _ => Err(schema(path, "expected exactly one of `builtin` or `frame`")),
    }
}

fn parse_region(v: &Value) -> Result<(Region, i32), SceneError> {
    let path = "$.region";
    let m = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    let kind = required(m, "type", path)?
        .as_str()
        .ok_or_else(|| schema("$.region.type", "expected a string"))?;
    let p = |k: &str| format!("$.region.{k}");
    let region = match kind {
        "rectangle" => {
            object(v, path, &["type", "u", "v", "euler_characteristic"])?;
            Region::Rectangle {
                u: pair(required(m, "u", path)?, &p("u"))?,
                v: pair(required(m, "v", path)?, &p("v"))?,
            }
        }
        "disk" => {
            object(v, path, &["type", "center", "radius", "euler_characteristic"])?;
            Region::Disk {
                center: pair(required(m, "center", path)?, &p("center"))?,
                radius: number(required(m, "radius", path)?, &p("radius"))?,
            }
        }
        "annulus" => {
            object(
                v,
                path,
                &["type", "center", "inner_radius", "outer_radius", "euler_characteristic"],
            )?;
            Region::Annulus {
                center: pair(required(m, "center", path)?, &p("center"))?,
                inner_radius: number(required(m, "inner_radius", path)?, &p("inner_radius"))?,
                outer_radius: number(required(m, "outer_radius", path)?, &p("outer_radius"))?,
            }
        }
        other => {
            return Err(schema(
                "$.region.type",
                format!("unknown region type `{other}` (valid: rectangle, disk, annulus)"),
            ))
        }
    };
    region.validate().map_err(|msg| schema(path, msg))?;
    let chi = required(m, "euler_characteristic", path)?
        .as_i64()
        .ok_or_else(|| schema(&p("euler_characteristic"), "expected an integer"))?;
    Ok((region, chi as i32))
}

impl Scene {
    /// Parses a scene without the geometric validation pass.
    pub fn from_json_str(text: &str) -> Result<Scene, SceneError> {
        let root: Value = serde_json::from_str(text)?;
        let m = object(
            &root,
            "$",
            &[
                "name",
                "model",
                "surface",
                "region",
                "boundary",
                "quadrature",
                "tolerances",
                "l_grid",
            ],
        )?;
        let name = match m.get("name") {
            Some(v) => v
                .as_str()
                .ok_or_else(|| schema("$.name", "expected a string"))?
                .to_string(),
            None => "scene".to_string(),
        };
        let tolerances: Tolerances = match m.get("tolerances") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| schema("$.tolerances", e.to_string()))?,
            None => Tolerances::default(),
        };
        let quadrature: QuadratureSpec = match m.get("quadrature") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| schema("$.quadrature", e.to_string()))?,
            None => QuadratureSpec::default(),
        };
        quadrature.validate().map_err(|msg| schema("$.quadrature", msg))?;

        let (model_spec, model) = parse_model(required(m, "model", "$")?)?;
        let model = model.with_tolerances(tolerances);

        let sv = required(m, "surface", "$")?;
        let sm = object(sv, "$.surface", &["phi", "domain", "orientation"])?;
        let phi: [String; 3] = strings(required(sm, "phi", "$.surface")?, "$.surface.phi")?;
        let phi = exprs3(&phi, &SURFACE_VARS, "$.surface.phi")?;
        let dv = required(sm, "domain", "$.surface")?;
        let dm = object(dv, "$.surface.domain", &["u", "v"])?;
        let domain = ParamRect {
            u: pair(required(dm, "u", "$.surface.domain")?, "$.surface.domain.u")?,
            v: pair(required(dm, "v", "$.surface.domain")?, "$.surface.domain.v")?,
        };
        if !(domain.u[0] < domain.u[1] && domain.v[0] < domain.v[1]) {
            return Err(schema("$.surface.domain", "bounds must be increasing"));
        }
        let orientation = match sm.get("orientation") {
            None => Orientation::Positive,
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|_| schema("$.surface.orientation", "expected \"positive\" or \"negative\""))?,
        };
        let surface = SurfacePatch {
            phi,
            domain,
            orientation,
        };

        let (region, euler_characteristic) = parse_region(required(m, "region", "$")?)?;

        let mut boundary = Vec::new();
        let mut boundary_notes = Vec::new();
        if let Some(bv) = m.get("boundary") {
            let arr = bv.as_array().ok_or_else(|| schema("$.boundary", "expected an array"))?;
            for (i, c) in arr.iter().enumerate() {
                let p = format!("$.boundary[{i}]");
                let cm = object(c, &p, &["curve", "t", "note"])?;
                let uv: [String; 2] = strings(required(cm, "curve", &p)?, &format!("{p}.curve"))?;
                let interval = pair(required(cm, "t", &p)?, &format!("{p}.t"))?;
                if !(interval[0] < interval[1]) {
                    return Err(schema(&format!("{p}.t"), "interval must be increasing"));
                }
                boundary.push(CurveOnSurface {
                    u: expr(&uv[0], &["t"], format!("{p}.curve[0]"))?,
                    v: expr(&uv[1], &["t"], format!("{p}.curve[1]"))?,
                    interval,
                    reversed: false,
                });
                boundary_notes.push(match cm.get("note") {
                    None => None,
                    Some(n) => Some(
                        n.as_str()
                            .ok_or_else(|| schema(&format!("{p}.note"), "expected a string"))?
                            .to_string(),
                    ),
                });
            }
        }

        let l_grid = match m.get("l_grid") {
            None => Vec::new(),
            Some(v) => {
                let a = v
                    .as_array()
                    .ok_or_else(|| schema("$.l_grid", "expected an array of numbers"))?;
                a.iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let p = format!("$.l_grid[{i}]");
                        let l = number(x, &p)?;
                        if !(l > 0.0 && l.is_finite()) {
                            return Err(schema(&p, "L must be positive and finite"));
                        }
                        Ok(l)
                    })
                    .collect::<Result<Vec<f64>, SceneError>>()?
            }
        };

        Ok(Scene {
            name,
            model_spec,
            model,
            surface,
            region,
            euler_characteristic,
            boundary,
            boundary_notes,
            quadrature,
            tolerances,
            l_grid,
        })
    }

    /// Geometric validation: region placement, χ, immersion and
    /// characteristic scan of the quadrature grid, boundary placement and
    /// orientation.
    pub fn validate(&self) -> Result<ValidationReport, SceneError> {
        let tol = &self.tolerances;
        let expected_chi = self.region.euler_characteristic();
        if self.euler_characteristic != expected_chi {
            return Err(SceneError::Validation(format!(
                "$.region.euler_characteristic: {} does not match a {} (expected {expected_chi})",
                self.euler_characteristic,
                self.region.kind()
            )));
        }
        let (bu, bv) = self.region.bounding_box();
        let d = &self.surface.domain;
        let slack = 1e-12 * (1.0 + d.u[1].abs().max(d.v[1].abs()));
        if !(d.contains([bu[0], bv[0]], slack) && d.contains([bu[1], bv[1]], slack)) {
            return Err(SceneError::Validation(format!(
                "$.region: bounding box u {bu:?} v {bv:?} leaves the surface domain u {:?} v {:?}",
                d.u, d.v
            )));
        }

        let nodes = self.region.grid_nodes(&self.quadrature);
        let mut min_margin = f64::INFINITY;
        let mut max_contact: f64 = 0.0;
        for (k, &uv) in nodes.iter().enumerate() {
            let r = characteristic_classify(&self.model, &self.surface, uv)?;
            if r.classification == Classification::Characteristic {
                return Err(GeometryError::CharacteristicPoint { uv, margin: r.margin }.into());
            }
            min_margin = min_margin.min(r.margin);
            if k % 97 == 0 {
                let p = self.surface.point(uv)?;
                max_contact = max_contact.max(self.model.contact_residuals(p)?.max());
            }
        }
        if max_contact > tol.algebraic * 1e2 {
            return Err(SceneError::Validation(format!(
                "$.model: contact residual {max_contact:e} exceeds tolerance"
            )));
        }

        let mut warnings = Vec::new();
        let mut max_dist: f64 = 0.0;
        for (i, c) in self.boundary.iter().enumerate() {
            for k in 0..32 {
                let t = c.interval[0] + (c.interval[1] - c.interval[0]) * k as f64 / 31.0;
                let uv = c.at(t)?;
                if !d.contains(uv, slack) {
                    return Err(SceneError::Validation(format!(
                        "$.boundary[{i}]: point {uv:?} at t = {t} leaves the surface domain"
                    )));
                }
                let dist = self.region.boundary_distance(uv);
                let scale = 1.0 + uv[0].abs().max(uv[1].abs());
                if dist > tol.boundary * scale {
                    return Err(SceneError::Validation(format!(
                        "$.boundary[{i}]: point {uv:?} at t = {t} is {dist:e} away from the region boundary"
                    )));
                }
                max_dist = max_dist.max(dist);
            }
        }

        let area = self.region.area();
        let ratio = if self.boundary.is_empty() {
            if area > 0.0 {
                warnings.push("no boundary curves: the boundary term of the residual is empty".to_string());
            }
            f64::NAN
        } else {
            let rule = GaussLegendre::new(self.quadrature.order);
            let mut enclosed = 0.0;
            for c in &self.boundary {
                let f = |t: f64| {
                    let j = c.jets(t, 1)?;
                    Ok(j[0].value() * j[1].d(0))
                };
                enclosed += integrate_interval(&rule, c.interval[0], c.interval[1], self.quadrature.segments, &f)?;
            }
            let ratio = if area > 0.0 { enclosed / area } else { 1.0 };
            if area > 0.0 && (ratio - 1.0).abs() > 1e-6 {
                return Err(SceneError::Validation(format!(
                    "$.boundary: curves enclose signed area {enclosed} but the region has area {area}; \
                     outer boundaries must run counterclockwise and holes clockwise, each exactly once"
                )));
            }
            ratio
        };

        Ok(ValidationReport {
            nodes_scanned: nodes.len(),
            min_characteristic_margin: min_margin,
            max_contact_residual: max_contact,
            max_boundary_distance: max_dist,
            boundary_orientation_ratio: ratio,
            warnings,
        })
    }

    pub fn to_json(&self) -> Value {
        let model = match &self.model_spec {
            ModelSpec::Builtin(n) => json!({ "builtin": n }),
            ModelSpec::Frame { e1, e2 } => json!({ "frame": { "e1": e1, "e2": e2 } }),
        };
        let mut region = serde_json::to_value(self.region).expect("region serializes");
        region["euler_characteristic"] = json!(self.euler_characteristic);
        let boundary: Vec<Value> = self
            .boundary
            .iter()
            .zip(&self.boundary_notes)
            .map(|(c, note)| {
                let mut v = json!({ "curve": [c.u.source(), c.v.source()], "t": c.interval });
                if let Some(n) = note {
                    v["note"] = json!(n);
                }
                v
            })
            .collect();
        json!({
            "name": self.name,
            "model": model,
            "surface": {
                "phi": self.surface.phi.iter().map(|e| e.source()).collect::<Vec<_>>(),
                "domain": { "u": self.surface.domain.u, "v": self.surface.domain.v },
                "orientation": self.surface.orientation,
            },
            "region": region,
            "boundary": boundary,
            "quadrature": self.quadrature,
            "tolerances": self.tolerances,
            "l_grid": self.l_grid,
        })
    }
}

/// Pretty JSON for a scene; [`Scene::from_json_str`] reads it back.
pub fn write_scene(scene: &Scene) -> String {
    serde_json::to_string_pretty(&scene.to_json()).expect("scene serializes") + "\n"
}

/// Loads a built-in scene by name or a scene file by path, then validates it.
pub fn load_scene(name_or_path: &str) -> Result<(Scene, ValidationReport), SceneError> {
    let scene = match builtin_scene_source(name_or_path) {
        Some(src) => Scene::from_json_str(src)?,
        None => Scene::from_json_str(&std::fs::read_to_string(Path::new(name_or_path))?)?,
    };
    let report = scene.validate()?;
    Ok((scene, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenes_load_without_warnings() {
        for name in ["heisenberg_annulus", "rt_disk"] {
            let (scene, report) = load_scene(name).unwrap();
            assert!(report.warnings.is_empty(), "{name}: {:?}", report.warnings);
            assert!((report.boundary_orientation_ratio - 1.0).abs() < 1e-10);
            assert_eq!(scene.name, name);
        }
    }

    #[test]
    fn round_trip() {
        for name in ["heisenberg_annulus", "rt_disk"] {
            let (scene, _) = load_scene(name).unwrap();
            let again = Scene::from_json_str(&write_scene(&scene)).unwrap();
            assert_eq!(scene, again);
        }
    }

    fn edit(f: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(builtin_scene_source("heisenberg_annulus").unwrap()).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn schema_errors_name_paths() {
        let e = Scene::from_json_str(&edit(|v| {
            v.as_object_mut().unwrap().remove("surface");
        }))
        .unwrap_err();
        assert!(
            matches!(&e, SceneError::Schema { path, .. } if path == "$.surface"),
            "{e}"
        );
        let e = Scene::from_json_str(&edit(|v| v["surface"]["phi"][2] = json!("0 +"))).unwrap_err();
        assert!(
            matches!(&e, SceneError::Expression { path, .. } if path == "$.surface.phi[2]"),
            "{e}"
        );
        let e = Scene::from_json_str(&edit(|v| v["region"]["radius"] = json!(1))).unwrap_err();
        assert!(e.to_string().contains("$.region.radius"), "{e}");
        let e = Scene::from_json_str(&edit(|v| v["model"] = json!({"builtin": "nope"}))).unwrap_err();
        assert!(matches!(e, SceneError::UnknownModel { .. }));
        let e = Scene::from_json_str(&edit(|v| v["quadrature"] = json!({"order": 1}))).unwrap_err();
        assert!(e.to_string().contains("$.quadrature"), "{e}");
    }

    #[test]
    fn validation_errors() {
        let s = Scene::from_json_str(&edit(|v| v["region"]["inner_radius"] = json!(0))).unwrap();
        let e = s.validate().unwrap_err();
        assert!(
            matches!(e, SceneError::Geometry(GeometryError::CharacteristicPoint { .. }))
                || e.to_string().contains("boundary"),
            "{e}"
        );
        let s = Scene::from_json_str(&edit(|v| {
            v["region"] = json!({"type": "disk", "center": [0, 0], "radius": 1, "euler_characteristic": 1});
            v["boundary"] = json!([{ "curve": ["cos(t)", "sin(t)"], "t": [0, "2*pi"] }]);
        }))
        .unwrap();
        assert!(matches!(
            s.validate().unwrap_err(),
            SceneError::Geometry(GeometryError::CharacteristicPoint { .. })
        ));
        let s = Scene::from_json_str(&edit(|v| v["region"]["euler_characteristic"] = json!(1))).unwrap();
        assert!(s.validate().unwrap_err().to_string().contains("euler_characteristic"));
        let s = Scene::from_json_str(&edit(|v| v["boundary"][1]["curve"] = json!(["cos(t)", "sin(t)"]))).unwrap();
        assert!(s.validate().unwrap_err().to_string().contains("counterclockwise"));
        let s = Scene::from_json_str(&edit(|v| {
            v["boundary"][0]["curve"] = json!(["2.1*cos(t)", "2.1*sin(t)"])
        }))
        .unwrap();
        assert!(s
            .validate()
            .unwrap_err()
            .to_string()
            .contains("away from the region boundary"));
    }
}
