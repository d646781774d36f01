//! Gauss–Legendre rules, composite integration over parameter boxes and
//! intervals, and a deterministic parallel reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Quadrature settings. `target` is relative to `max(|I|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per axis and per segment.
    pub order: usize,
    /// Cells per axis for region integrals.
    pub cells: [usize; 2],
    /// Segments per boundary curve.
    pub segments: usize,
    pub target: f64,
    /// Maximum number of cell doublings after the first estimate.
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            cells: [8, 8],
            segments: 64,
            target: 1e-8,
            max_refinements: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.order < 2 || self.order > 64 {
            return Err(format!("quadrature order must be in 2..=64, got {}", self.order));
        }
        if self.cells.iter().any(|&c| c < 2) || self.segments < 2 {
            return Err("cells and segments must be at least 2".into());
        }
        if !(self.target > 0.0) {
            return Err(format!("target tolerance must be positive, got {}", self.target));
        }
        Ok(())
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (m + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        pairwise_sum(&self.mapped(a, b).map(|(x, w)| w * f(x)).collect::<Vec<_>>())
    }
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// A quadrature value with its estimated error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    /// Cells (or segments) per axis of the final evaluation.
    pub cells: usize,
}

/// Tensor composite rule over `[a0,a1]×[b0,b1]` with `n` cells per axis.
/// Cells are reduced in parallel, then summed in lexicographic order.
pub fn integrate_box<F>(
    rule: &GaussLegendre,
    a: [f64; 2],
    b: [f64; 2],
    n: [usize; 2],
    f: &F,
) -> Result<f64, GeometryError>
where
    F: Fn(f64, f64) -> Result<f64, GeometryError> + Sync,
{
    if a[1] == a[0] || b[1] == b[0] {
        return Ok(0.0);
    }
    let (ha, hb) = ((a[1] - a[0]) / n[0] as f64, (b[1] - b[0]) / n[1] as f64);
    let cells: Vec<(usize, usize)> = (0..n[0]).flat_map(|i| (0..n[1]).map(move |j| (i, j))).collect();
    let sums = cells
        .par_iter()
        .map(|&(i, j)| {
            let (a0, b0) = (a[0] + i as f64 * ha, b[0] + j as f64 * hb);
            let mut terms = Vec::with_capacity(rule.nodes.len().pow(2));
            for (s, ws) in rule.mapped(a0, a0 + ha) {
                for (t, wt) in rule.mapped(b0, b0 + hb) {
                    terms.push(ws * wt * f(s, t)?);
                }
            }
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<Vec<f64>, GeometryError>>()?;
    Ok(pairwise_sum(&sums))
}

/// Composite rule over `[a, b]` with `n` segments.
pub fn integrate_interval<F>(rule: &GaussLegendre, a: f64, b: f64, n: usize, f: &F) -> Result<f64, GeometryError>
where
    F: Fn(f64) -> Result<f64, GeometryError> + Sync,
{
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / n as f64;
    let sums = (0..n)
        .into_par_iter()
        .map(|k| {
            let s0 = a + k as f64 * h;
            let terms = rule
                .mapped(s0, s0 + h)
                .map(|(t, w)| Ok(w * f(t)?))
                .collect::<Result<Vec<f64>, GeometryError>>()?;
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<Vec<f64>, GeometryError>>()?;
    Ok(pairwise_sum(&sums))
}

/// Runs `eval(n)` at the base resolution and at half of it; while the
/// difference exceeds the target, doubles the resolution. The reported
/// value is the finest evaluation and the error the last difference.
pub fn refine<F>(base: usize, spec: &QuadratureSpec, eval: F) -> Result<Estimate, GeometryError>
where
    F: Fn(usize) -> Result<f64, GeometryError>,
{
    let mut coarse = eval((base / 2).max(1))?;
    let mut n = base;
    let mut fine = eval(n)?;
    let mut refinements = 0;
    loop {
        let error = (fine - coarse).abs();
        let converged = error <= spec.target * fine.abs().max(1.0);
        if converged || refinements >= spec.max_refinements {
            return Ok(Estimate {
                value: fine,
                error,
                converged,
                cells: n,
            });
        }
        refinements += 1;
        n *= 2;
        coarse = fine;
        fine = eval(n)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_is_exact_for_polynomials() {
        for n in [2, 5, 16, 31] {
            let r = GaussLegendre::new(n);
            assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                let got = r.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert_abs_diff_eq!(got, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn composite_rules() {
        let r = GaussLegendre::new(8);
        let v = integrate_box(&r, [0.0, 1.0], [0.0, std::f64::consts::PI], [3, 3], &|s, t| {
            Ok(s * t.sin())
        })
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
        let v = integrate_interval(&r, 0.0, 2.0, 4, &|t| Ok(t.exp())).unwrap();
        assert_abs_diff_eq!(v, 2f64.exp() - 1.0, epsilon = 1e-12);
        assert_eq!(
            integrate_box(&r, [1.0, 1.0], [0.0, 1.0], [2, 2], &|_, _| Ok(1.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn refinement_reports_error() {
        let spec = QuadratureSpec {
            order: 2,
            ..Default::default()
        };
        let r = GaussLegendre::new(spec.order);
        let est = refine(2, &spec, |n| integrate_interval(&r, 0.0, 10.0, n, &|t| Ok(t.exp()))).unwrap();
        assert!(est.cells > 2);
        assert!(!est.converged);
        assert!((est.value - (10f64.exp() - 1.0)).abs() <= est.error);
    }

    #[test]
    fn parallel_reduction_is_deterministic() {
        let r = GaussLegendre::new(16);
        let f = |s: f64, t: f64| Ok((s * 3.1).sin() * (t * 1.7).cos() + 1e-3 * s * t);
        let a = integrate_box(&r, [0.0, 2.0], [0.0, 3.0], [8, 8], &f).unwrap();
        for _ in 0..5 {
            assert_eq!(
                a.to_bits(),
                integrate_box(&r, [0.0, 2.0], [0.0, 3.0], [8, 8], &f).unwrap().to_bits()
            );
        }
    }
}
