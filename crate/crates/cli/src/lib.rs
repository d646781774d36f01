//! The `subriemann` command line. [`run`] is the whole program; `main` only
//! wires it to the process streams.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use subriemann_core::curvature::{
    ambient_sectional_curvature_oracle, gauss_curvature_l, gauss_equation_decomposition_with,
    geodesic_curvature_oracle, induced_metric_gauss_oracle, limit_form_omega23, normal_curvature_l,
    normal_curvature_limit, theta_23_deviation, SecondFormVariant,
};
use subriemann_core::frame::{connection_forms_l, scaled_form_deviation};
use subriemann_core::measures::gauss_bonnet_report;
use subriemann_core::surface::{adapted_frame, characteristic_classify, l_adapted_frame, SurfaceJets};
use subriemann_core::{load_scene, GeometryError, Scene, SceneError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "subriemann",
    version,
    about = "Surfaces in 3D sub-Riemannian manifolds via Riemannian approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate a scene; print structure functions and contact residuals.
    Validate(SceneArg),
    /// Structure functions, connection forms and adapted frames at a point (JSON).
    FrameReport {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        point: PointArg,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
    },
    /// K^L, K and the Gauss-equation decomposition at a point (JSON).
    Curvature {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        point: PointArg,
        /// Comma-separated L values; defaults to the scene's l_grid.
        #[arg(long = "L", value_delimiter = ',')]
        l: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Variant::Displayed)]
        variant: Variant,
    },
    /// CSV of a quantity over an L grid.
    Sweep {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long = "L", value_delimiter = ',')]
        l: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Quantity::K)]
        quantity: Quantity,
        /// Surface point for `K`, as `u,v`.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        uv: Option<Vec<f64>>,
        /// Boundary curve index for `kn`.
        #[arg(long)]
        curve: Option<usize>,
        /// Curve parameters for `kn`, comma-separated.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Gauss-Bonnet report with the finite-L table (JSON).
    GaussBonnet {
        #[command(flatten)]
        scene: SceneArg,
        /// Comma-separated L values; defaults to the scene's l_grid.
        #[arg(long = "L", value_delimiter = ',')]
        l: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Maximum discrepancies against the independent oracles (JSON).
    OracleCheck {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long = "L", value_delimiter = ',', default_value = "1,10,100")]
        l: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, clap::Args)]
struct SceneArg {
    /// Built-in scene name or path to a scene file.
    #[arg(long)]
    scene: String,
}

#[derive(Debug, clap::Args)]
struct PointArg {
    /// Surface parameters `u,v`.
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    uv: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Displayed,
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Quantity {
    K,
    Kn,
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            msg: msg.into(),
        }
    }
    fn validation(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            msg: msg.into(),
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            msg: e.to_string(),
        }
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            msg: format!("cannot write output: {e}"),
        }
    }
}

/// Runs the program on `args` (including `argv[0]`) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate(s) => validate(&s.scene, out),
        Command::FrameReport { scene, point, l } => frame_report(&scene.scene, &point.uv, l, out),
        Command::Curvature {
            scene,
            point,
            l,
            variant,
        } => curvature(&scene.scene, &point.uv, &l, variant, out),
        Command::Sweep {
            scene,
            l,
            quantity,
            uv,
            curve,
            t,
            output,
        } => {
            let text = sweep(&scene.scene, &l, quantity, uv.as_deref(), curve, &t)?;
            emit(&text, output, out)?;
            Ok(EXIT_OK)
        }
        Command::GaussBonnet { scene, l, output } => gauss_bonnet(&scene.scene, &l, output, out, err),
        Command::OracleCheck {
            scene,
            l,
            samples,
            seed,
        } => oracle_check(&scene.scene, &l, samples, seed, out),
    }
}

fn emit(text: &str, path: Option<PathBuf>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(&p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

/// Shortest representation that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn scene_of(name: &str) -> Result<Scene, Failure> {
    Ok(load_scene(name)?.0)
}

fn l_values(requested: &[f64], scene: &Scene) -> Result<Vec<f64>, Failure> {
    let ls = if requested.is_empty() {
        scene.l_grid.clone()
    } else {
        requested.to_vec()
    };
    if ls.is_empty() {
        return Err(Failure::usage("no L values: pass --L or add l_grid to the scene"));
    }
    if let Some(bad) = ls.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Failure::usage(format!("L must be positive and finite, got {bad}")));
    }
    Ok(ls)
}

fn point(uv: &[f64], scene: &Scene) -> Result<[f64; 2], Failure> {
    let [u, v] = uv else {
        return Err(Failure::usage("--uv takes exactly two numbers `u,v`"));
    };
    if !scene.surface.domain.contains([*u, *v], 0.0) {
        return Err(Failure::validation(format!(
            "(u, v) = ({u}, {v}) is outside the surface domain u {:?} v {:?}",
            scene.surface.domain.u, scene.surface.domain.v
        )));
    }
    Ok([*u, *v])
}

/// Fixed sample of region points: the mapped 3×3 grid of parameter-box
/// fractions 1/4, 1/2, 3/4.
fn sample_points(scene: &Scene) -> Vec<[f64; 2]> {
    let (a, b) = scene.region.param_box();
    let mut pts = Vec::new();
    for fs in [0.25, 0.5, 0.75] {
        for ft in [0.25, 0.5, 0.75] {
            pts.push(scene.region.map(a[0] + fs * (a[1] - a[0]), b[0] + ft * (b[1] - b[0])).0);
        }
    }
    pts
}

fn validate(name: &str, out: &mut dyn Write) -> Result<i32, Failure> {
    let (scene, report) = load_scene(name)?;
    let mut s = String::new();
    let line = |s: &mut String, k: &str, v: String| s.push_str(&format!("{k}: {v}\n"));
    line(&mut s, "scene", scene.name.clone());
    line(&mut s, "model", scene.model.name().to_string());
    line(
        &mut s,
        "region",
        format!(
            "{} (euler_characteristic {})",
            scene.region.kind(),
            scene.euler_characteristic
        ),
    );
    line(&mut s, "boundary_curves", scene.boundary.len().to_string());
    line(&mut s, "nodes_scanned", report.nodes_scanned.to_string());
    line(
        &mut s,
        "min_characteristic_margin",
        num(report.min_characteristic_margin),
    );
    line(&mut s, "max_contact_residual", num(report.max_contact_residual));
    line(&mut s, "max_boundary_distance", num(report.max_boundary_distance));
    line(
        &mut s,
        "boundary_orientation_ratio",
        num(report.boundary_orientation_ratio),
    );
    line(&mut s, "warnings", report.warnings.len().to_string());
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s.push_str("\nstructure functions\nu,v,x,y,z,a12_1,a12_2,a13_1,a13_2,a23_1,a23_2\n");
    let pts = sample_points(&scene);
    for uv in &pts {
        let p = scene.surface.point(*uv)?;
        let f = scene.model.structure_functions(p)?;
        let row = [
            uv[0], uv[1], p[0], p[1], p[2], f.a12_1, f.a12_2, f.a13_1, f.a13_2, f.a23_1, f.a23_2,
        ];
        s.push_str(&row.map(num).join(","));
        s.push('\n');
    }
    s.push_str(
        "\ncontact residuals\nu,v,annihilation,normalization,reeb_unit,reeb_kernel,trace,duality,structure_equation\n",
    );
    for uv in &pts {
        let r = scene.model.contact_residuals(scene.surface.point(*uv)?)?;
        let row = [
            uv[0],
            uv[1],
            r.annihilation,
            r.normalization,
            r.reeb_unit,
            r.reeb_kernel,
            r.trace,
            r.duality,
            r.structure_equation,
        ];
        s.push_str(&row.map(num).join(","));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(EXIT_OK)
}

fn frame_report(name: &str, uv: &[f64], l: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    let scene = scene_of(name)?;
    let uv = point(uv, &scene)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Failure::usage(format!("L must be positive and finite, got {l}")));
    }
    let (model, surface) = (&scene.model, &scene.surface);
    let p = surface.point(uv)?;
    let sf = model.structure_functions(p)?;
    let closed = connection_forms_l(&sf, l);
    let koszul = model.koszul_connection_oracle(l, p)?;
    let v = json!({
        "scene": scene.name,
        "uv": uv,
        "point": p,
        "L": l,
        "structure_functions": sf,
        "contact_residuals": model.contact_residuals(p)?,
        "coframe": model.coframe(p)?.rows,
        "metric": model.metric_matrix(l, p)?.g,
        "connection_forms": closed.c,
        "koszul_max_abs_diff": closed.max_abs_diff(&koszul),
        "scaled_form_deviation": scaled_form_deviation(&sf, l),
        "characteristic": characteristic_classify(model, surface, uv)?,
        "adapted_frame": adapted_frame(model, surface, uv)?,
        "l_adapted_frame": l_adapted_frame(model, surface, uv, l)?,
    });
    out.write_all(json_text(&v).as_bytes())?;
    Ok(EXIT_OK)
}

fn curvature(name: &str, uv: &[f64], ls: &[f64], variant: Variant, out: &mut dyn Write) -> Result<i32, Failure> {
    let scene = scene_of(name)?;
    let uv = point(uv, &scene)?;
    let ls = l_values(ls, &scene)?;
    let (model, surface) = (&scene.model, &scene.surface);
    let variant = match variant {
        Variant::Displayed => SecondFormVariant::Displayed,
        Variant::Derived => SecondFormVariant::Derived,
    };
    let sj = SurfaceJets::new(model, surface, uv, 3)?;
    let k = subriemann_core::curvature::gauss_curvature_limit_jets(&sj);
    let mut rows = Vec::new();
    for &l in &ls {
        let d = gauss_equation_decomposition_with(model, surface, uv, l, variant)?;
        rows.push(json!({
            "L": l,
            "K_L": d.k_l,
            "Kbar_L": d.kbar_l,
            "Kbar_L_ambient": ambient_sectional_curvature_oracle(model, surface, uv, l)?,
            "II_L": d.ii_l,
            "abs_K_L_minus_K": (d.k_l - k).abs(),
            "theta_deviation": theta_23_deviation(model, surface, uv, l)?,
        }));
    }
    let v = json!({
        "scene": scene.name,
        "uv": uv,
        "point": sj.point,
        "A": sj.a.value(),
        "K": k,
        "limit_form_omega23": limit_form_omega23(model, surface, uv)?.components(),
        "second_form_variant": variant,
        "rows": rows,
    });
    out.write_all(json_text(&v).as_bytes())?;
    Ok(EXIT_OK)
}

fn sweep(
    name: &str,
    ls: &[f64],
    quantity: Quantity,
    uv: Option<&[f64]>,
    curve: Option<usize>,
    ts: &[f64],
) -> Result<String, Failure> {
    let scene = scene_of(name)?;
    let ls = l_values(ls, &scene)?;
    let (model, surface) = (&scene.model, &scene.surface);
    let mut s = String::new();
    match quantity {
        Quantity::K => {
            let uv = point(uv.ok_or_else(|| Failure::usage("--quantity K needs --uv u,v"))?, &scene)?;
            let k = subriemann_core::curvature::gauss_curvature_limit(model, surface, uv)?;
            s.push_str("L,K_L,K,abs_K_L_minus_K\n");
            for &l in &ls {
                let kl = gauss_curvature_l(model, surface, uv, l)?;
                s.push_str(&[l, kl, k, (kl - k).abs()].map(num).join(","));
                s.push('\n');
            }
        }
        Quantity::Kn => {
            let i = curve.ok_or_else(|| Failure::usage("--quantity kn needs --curve INDEX"))?;
            let c = scene.boundary.get(i).ok_or_else(|| {
                Failure::usage(format!(
                    "curve index {i} out of range (scene has {})",
                    scene.boundary.len()
                ))
            })?;
            if ts.is_empty() {
                return Err(Failure::usage("--quantity kn needs --t values"));
            }
            s.push_str("t,L,kn_L,kn,abs_kn_L_minus_kn\n");
            for &t in ts {
                let kn = normal_curvature_limit(model, surface, c, t)?;
                for &l in &ls {
                    let knl = normal_curvature_l(model, surface, c, t, l)?;
                    s.push_str(&[t, l, knl, kn, (knl - kn).abs()].map(num).join(","));
                    s.push('\n');
                }
            }
        }
    }
    Ok(s)
}

fn gauss_bonnet(
    name: &str,
    ls: &[f64],
    output: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let scene = scene_of(name)?;
    let ls = if ls.is_empty() {
        scene.l_grid.clone()
    } else {
        l_values(ls, &scene)?
    };
    let report = gauss_bonnet_report(&scene, &ls)?;
    let v = serde_json::to_value(&report).expect("report serializes");
    emit(&json_text(&v), output, out)?;
    let converged = report.integral_k_dsigma.converged && report.boundary.iter().all(|b| b.converged);
    if !converged {
        writeln!(
            err,
            "error: quadrature did not reach the target tolerance; raise quadrature.max_refinements"
        )?;
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

/// Relative discrepancy against an oracle value, floored at scale 1.
pub fn relative(value: f64, oracle: f64) -> f64 {
    (value - oracle).abs() / oracle.abs().max(1.0)
}

fn oracle_check(name: &str, ls: &[f64], samples: usize, seed: u64, out: &mut dyn Write) -> Result<i32, Failure> {
    let scene = scene_of(name)?;
    let ls = l_values(ls, &scene)?;
    let (model, surface) = (&scene.model, &scene.surface);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = scene.region.param_box();
    let pts: Vec<[f64; 2]> = (0..samples)
        .map(|_| {
            scene
                .region
                .map(rng.gen_range(a[0]..=a[1]), rng.gen_range(b[0]..=b[1]))
                .0
        })
        .collect();
    let mut conn: f64 = 0.0;
    let mut curv: f64 = 0.0;
    for &uv in &pts {
        let p = surface.point(uv)?;
        let sf = model.structure_functions(p)?;
        for &l in &ls {
            conn = conn.max(connection_forms_l(&sf, l).max_abs_diff(&model.koszul_connection_oracle(l, p)?));
            let k = gauss_curvature_l(model, surface, uv, l)?;
            curv = curv.max(relative(k, induced_metric_gauss_oracle(model, surface, uv, l)?));
        }
    }
    let mut normal: f64 = 0.0;
    let mut normal_samples = 0usize;
    let mut skipped = 0usize;
    for c in &scene.boundary {
        for _ in 0..samples {
            let t = rng.gen_range(c.interval[0]..=c.interval[1]);
            for &l in &ls {
                match (
                    normal_curvature_l(model, surface, c, t, l),
                    geodesic_curvature_oracle(model, surface, c, t, l),
                ) {
                    (Ok(k), Ok(g)) => {
                        normal = normal.max(relative(k, g));
                        normal_samples += 1;
                    }
                    (Err(GeometryError::TransversalityViolation { .. }), _) => skipped += 1,
                    (Err(e), _) | (_, Err(e)) => return Err(e.into()),
                }
            }
        }
    }
    let v = json!({
        "scene": scene.name,
        "L": ls,
        "seed": seed,
        "surface_samples": pts.len(),
        "connection_max_abs_diff": conn,
        "gauss_curvature_max_rel_diff": curv,
        "normal_curvature_samples": normal_samples,
        "normal_curvature_skipped_non_transverse": skipped,
        "normal_curvature_max_rel_diff": if normal_samples > 0 { json!(normal) } else { Value::Null },
    });
    out.write_all(json_text(&v).as_bytes())?;
    Ok(EXIT_OK)
}
