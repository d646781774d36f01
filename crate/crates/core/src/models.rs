//! Built-in frames and scenes.

use crate::error::SceneError;
use crate::frame::SubRiemannianModel;

/// `(name, e1, e2)` for every built-in model.
pub const BUILTIN_MODELS: [(&str, [&str; 3], [&str; 3]); 4] = [
    ("heisenberg", ["1", "0", "-y/2"], ["0", "1", "x/2"]),
    ("polarized_heisenberg", ["1", "0", "0"], ["0", "1", "x"]),
    ("rototranslation", ["cos(z)", "sin(z)", "0"], ["0", "0", "1"]),
    (
        "minkowski_rototranslation",
        ["cosh(z)", "sinh(z)", "0"],
        ["0", "0", "1"],
    ),
];

pub const BUILTIN_SCENES: [(&str, &str); 2] = [
    ("heisenberg_annulus", include_str!("../scenes/heisenberg_annulus.json")),
    ("rt_disk", include_str!("../scenes/rt_disk.json")),
];

pub fn builtin_model_names() -> Vec<&'static str> {
    BUILTIN_MODELS.iter().map(|m| m.0).collect()
}

pub fn load_builtin(name: &str) -> Result<SubRiemannianModel, SceneError> {
    let (n, e1, e2) = BUILTIN_MODELS
        .iter()
        .find(|m| m.0 == name)
        .ok_or_else(|| SceneError::UnknownModel {
            name: name.to_string(),
            valid: builtin_model_names().join(", "),
        })?;
    Ok(SubRiemannianModel::parse(n, *e1, *e2).expect("built-in frames parse"))
}

pub fn builtin_scene_source(name: &str) -> Option<&'static str> {
    BUILTIN_SCENES.iter().find(|s| s.0 == name).map(|s| s.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn builtins_validate_at_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for name in builtin_model_names() {
            let m = load_builtin(name).unwrap();
            for _ in 0..100 {
                let p = [
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ];
                let r = m.contact_residuals(p).unwrap();
                assert!(r.max() < 1e-10, "{name} at {p:?}: {r:?}");
            }
        }
    }

    #[test]
    fn builtin_structure_functions() {
        let h = load_builtin("heisenberg")
            .unwrap()
            .structure_functions([0.3, -1.0, 2.0])
            .unwrap();
        for v in [h.a12_1, h.a12_2, h.a13_1, h.a13_2, h.a23_1, h.a23_2] {
            assert_eq!(v, 0.0);
        }
        let r = load_builtin("rototranslation").unwrap();
        for p in [[0.0, 0.0, 0.0], [1.0, 2.0, -0.7]] {
            assert!((r.structure_functions(p).unwrap().a23_1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_model_lists_valid_names() {
        let e = load_builtin("nope").unwrap_err().to_string();
        for name in builtin_model_names() {
            assert!(e.contains(name), "{e}");
        }
    }
}
