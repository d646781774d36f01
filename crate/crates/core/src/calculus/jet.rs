//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a smooth
//! function at a base point, for every monomial of total degree up to the
//! jet's `order`, in at most [`MAX_VARS`] variables. Arithmetic keeps the
//! truncation honest: combining two jets yields the smaller of the two
//! orders, and differentiating drops one order. Quantities built from
//! nested derivatives (brackets of brackets, exterior derivatives of
//! connection forms) therefore stay exact to rounding as long as the seed
//! order covers the nesting depth.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Highest supported total degree.
pub const MAX_ORDER: usize = 4;
/// Highest supported number of independent variables.
pub const MAX_VARS: usize = 3;
/// Number of monomials of degree `<= MAX_ORDER` in `MAX_VARS` variables.
const CAP: usize = 35;

const FACT: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

struct Tables {
    /// Exponent tuples, graded by total degree.
    monomials: Vec<[u8; MAX_VARS]>,
    /// `len[k]` = number of monomials with degree `<= k`.
    len: [usize; MAX_ORDER + 1],
    /// Product table `(i, j, k)` sorted by `deg(k)`.
    mul: Vec<(u8, u8, u8)>,
    /// `mul_end[d]` = number of product entries with `deg(k) <= d`.
    mul_end: [usize; MAX_ORDER + 1],
    /// Per variable: `(src, dst, factor)` sorted by `deg(src)`.
    deriv: Vec<Vec<(u8, u8, f64)>>,
    /// `deriv_end[v][d]` = entries of `deriv[v]` with `deg(src) <= d`.
    deriv_end: Vec<[usize; MAX_ORDER + 1]>,
    /// For every non-constant monomial: `(index of α - e_v, v)`.
    parent: Vec<(u8, u8)>,
}

fn degree(m: &[u8; MAX_VARS]) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

impl Tables {
    fn build(nvars: usize) -> Self {
        let mut monomials = Vec::new();
        for d in 0..=MAX_ORDER {
            let mut level = Vec::new();
            enumerate(nvars, d, &mut [0; MAX_VARS], 0, &mut level);
            // Lexicographically descending so x comes before y before z.
            level.sort_by(|a, b| b.cmp(a));
            monomials.extend(level);
        }
        let mut len = [0; MAX_ORDER + 1];
        for (d, slot) in len.iter_mut().enumerate() {
            *slot = monomials.iter().filter(|m| degree(m) <= d).count();
        }
        let index_of = |m: &[u8; MAX_VARS]| monomials.iter().position(|x| x == m);

        let mut mul = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degree(a) + degree(b) > MAX_ORDER {
                    continue;
                }
                let mut s = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    s[v] = a[v] + b[v];
                }
                let k = index_of(&s).expect("product monomial present");
                mul.push((i as u8, j as u8, k as u8));
            }
        }
        mul.sort_by_key(|&(_, _, k)| degree(&monomials[k as usize]));
        let mut mul_end = [0; MAX_ORDER + 1];
        for (d, slot) in mul_end.iter_mut().enumerate() {
            *slot = mul
                .iter()
                .filter(|&&(_, _, k)| degree(&monomials[k as usize]) <= d)
                .count();
        }

        let mut deriv = Vec::new();
        let mut deriv_end = Vec::new();
        for v in 0..nvars {
            let mut table = Vec::new();
            for (src, m) in monomials.iter().enumerate() {
                if m[v] == 0 {
                    continue;
                }
                let mut t = *m;
                t[v] -= 1;
                let dst = index_of(&t).expect("derivative monomial present");
                table.push((src as u8, dst as u8, m[v] as f64));
            }
            let mut end = [0; MAX_ORDER + 1];
            for (d, slot) in end.iter_mut().enumerate() {
                *slot = table
                    .iter()
                    .filter(|&&(s, _, _)| degree(&monomials[s as usize]) <= d)
                    .count();
            }
            deriv.push(table);
            deriv_end.push(end);
        }

        let mut parent = vec![(0u8, 0u8)];
        for m in monomials.iter().skip(1) {
            let v = m.iter().position(|&e| e > 0).expect("non-constant");
            let mut t = *m;
            t[v] -= 1;
            parent.push((index_of(&t).expect("parent present") as u8, v as u8));
        }

        Tables {
            monomials,
            len,
            mul,
            mul_end,
            deriv,
            deriv_end,
            parent,
        }
    }
}

fn enumerate(nvars: usize, remaining: usize, cur: &mut [u8; MAX_VARS], v: usize, out: &mut Vec<[u8; MAX_VARS]>) {
    if v + 1 >= nvars {
        if nvars > 0 {
            cur[v] = remaining as u8;
            out.push(*cur);
            cur[v] = 0;
        } else if remaining == 0 {
            out.push(*cur);
        }
        return;
    }
    for e in (0..=remaining).rev() {
        cur[v] = e as u8;
        enumerate(nvars, remaining - e, cur, v + 1, out);
    }
    cur[v] = 0;
}

fn tables(nvars: usize) -> &'static Tables {
    static TABLES: OnceLock<Vec<Tables>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_VARS).map(Tables::build).collect())[nvars]
}

/// Monomials `Π δ_v^{α_v}` of the inner deviations, shared by every jet
/// composed with the same inner jets.
#[derive(Clone)]
pub struct ComposeBasis {
    source: usize,
    target: usize,
    order: usize,
    powers: Vec<Jet>,
}

impl ComposeBasis {
    pub fn new(inner: &[Jet], source: usize) -> Self {
        assert!(inner.len() >= source, "not enough inner jets for composition");
        let target = inner.first().map_or(0, |j| j.nvars());
        let mut order = MAX_ORDER;
        let mut deltas = [Jet::constant(0.0, target); MAX_VARS];
        for v in 0..source {
            order = order.min(inner[v].order());
            let mut d = inner[v];
            d.c[0] = 0.0;
            deltas[v] = d;
        }
        let t = tables(source);
        let count = t.len[order];
        let mut powers: Vec<Jet> = Vec::with_capacity(count);
        powers.push(Jet::constant(1.0, target));
        for i in 1..count {
            let (p, v) = t.parent[i];
            powers.push((powers[p as usize] * deltas[v as usize]).truncate(order));
        }
        ComposeBasis {
            source,
            target,
            order,
            powers,
        }
    }
}

/// Truncated Taylor expansion of a scalar function at a base point.
#[derive(Clone, Copy)]
pub struct Jet {
    nvars: u8,
    order: u8,
    c: [f64; CAP],
}

impl Jet {
    /// An exact constant. Constants carry the maximal order so they never
    /// limit the precision of jets they are combined with.
    pub fn constant(value: f64, nvars: usize) -> Self {
        debug_assert!(nvars <= MAX_VARS);
        let mut c = [0.0; CAP];
        c[0] = value;
        Jet {
            nvars: nvars as u8,
            order: MAX_ORDER as u8,
            c,
        }
    }

    /// The independent variable `var` seeded at `value`.
    pub fn variable(value: f64, var: usize, nvars: usize, order: usize) -> Self {
        assert!(var < nvars && nvars <= MAX_VARS && order <= MAX_ORDER);
        let mut c = [0.0; CAP];
        c[0] = value;
        if order >= 1 {
            c[1 + var] = 1.0;
        }
        Jet {
            nvars: nvars as u8,
            order: order as u8,
            c,
        }
    }

    /// Seeds all `nvars` coordinates of a base point.
    pub fn seed<const N: usize>(point: [f64; N], order: usize) -> [Jet; N] {
        std::array::from_fn(|i| Jet::variable(point[i], i, N, order))
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    /// Highest degree whose coefficients are exact.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn len(&self) -> usize {
        tables(self.nvars()).len[self.order()]
    }

    /// Partial derivative `∂^α f` at the base point, `α` given as exponents.
    pub fn partial(&self, alpha: &[usize]) -> f64 {
        let t = tables(self.nvars());
        let mut m = [0u8; MAX_VARS];
        let mut scale = 1.0;
        for (v, &e) in alpha.iter().enumerate() {
            m[v] = e as u8;
            scale *= FACT[e];
        }
        assert!(degree(&m) <= self.order(), "requested derivative beyond jet order");
        match t.monomials[..self.len()].iter().position(|x| *x == m) {
            Some(i) => self.c[i] * scale,
            None => 0.0,
        }
    }

    /// First partial derivative with respect to variable `var`.
    pub fn d(&self, var: usize) -> f64 {
        if var >= self.nvars() {
            return 0.0;
        }
        debug_assert!(self.order >= 1);
        self.c[1 + var]
    }

    /// First derivatives as a vector.
    pub fn gradient(&self) -> [f64; MAX_VARS] {
        std::array::from_fn(|v| self.d(v))
    }

    /// The derivative `∂f/∂x_var` as a jet one order lower.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order() - 1;
        let mut c = [0.0; CAP];
        if var < self.nvars() {
            let t = tables(self.nvars());
            let end = t.deriv_end[var][self.order()];
            for &(src, dst, f) in &t.deriv[var][..end] {
                c[dst as usize] += f * self.c[src as usize];
            }
        }
        Jet {
            nvars: self.nvars,
            order: order as u8,
            c,
        }
    }

    /// Lowers the truncation order, discarding higher coefficients.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        let mut out = *self;
        out.order = order as u8;
        let n = out.len();
        out.c[n..].iter_mut().for_each(|x| *x = 0.0);
        out
    }

    fn check_compatible(&self, other: &Jet) -> usize {
        debug_assert!(
            self.nvars == other.nvars || self.is_constant_like() || other.is_constant_like(),
            "jets over different variable sets"
        );
        self.nvars.max(other.nvars) as usize
    }

    fn is_constant_like(&self) -> bool {
        self.order() == MAX_ORDER && self.c[1..].iter().all(|&x| x == 0.0)
    }

    pub fn scale(&self, k: f64) -> Jet {
        let mut out = *self;
        let n = out.len();
        out.c[..n].iter_mut().for_each(|x| *x *= k);
        out
    }

    /// `f(self)` for a univariate `f` given by its derivatives at the base
    /// value: `Σ f^(k)(a0) / k! · (self - a0)^k`.
    pub fn compose_univariate(&self, derivs: &[f64; MAX_ORDER + 1]) -> Jet {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0], self.nvars());
        out.order = self.order;
        let mut power = delta;
        for (k, &dk) in derivs.iter().enumerate().skip(1) {
            if k > self.order() {
                break;
            }
            out += power.scale(dk / FACT[k]);
            if k < self.order() {
                power = power * delta;
            }
        }
        out
    }

    /// Substitutes jets for this jet's variables (chain rule to all orders).
    ///
    /// `inner[v]` is a jet in the target variables whose value must equal
    /// the base coordinate of variable `v`; only its deviation enters.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        self.compose_with(&ComposeBasis::new(inner, self.nvars()))
    }

    /// [`Jet::compose`] against precomputed monomial powers.
    pub fn compose_with(&self, basis: &ComposeBasis) -> Jet {
        assert_eq!(
            self.nvars(),
            basis.source,
            "composition basis built for a different arity"
        );
        let order = self.order().min(basis.order);
        let count = tables(basis.source).len[order];
        let mut out = Jet::constant(self.c[0], basis.target).truncate(order);
        for i in 1..count {
            if self.c[i] != 0.0 {
                out += basis.powers[i].scale(self.c[i]);
            }
        }
        out.truncate(order)
    }

    pub fn is_finite(&self) -> bool {
        self.c[..self.len()].iter().all(|x| x.is_finite())
    }

    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let r = 1.0 / a;
        self.compose_univariate(&[r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4), 24.0 * r.powi(5)])
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    /// `self^p` for a real constant exponent (base must be positive unless
    /// `p` is a non-negative integer; callers check the domain).
    pub fn powf(&self, p: f64) -> Jet {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let a = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        let mut coef = 1.0;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = coef * a.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.compose_univariate(&d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut out = Jet::constant(1.0, self.nvars());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        if n == 0 {
            out.order = self.order;
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose_univariate(&[e; MAX_ORDER + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.c[0];
        let r = 1.0 / a;
        self.compose_univariate(&[a.ln(), r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose_univariate(&[s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose_univariate(&[c, -s, -c, s, c])
    }

    pub fn tan(&self) -> Jet {
        let t = self.c[0].tan();
        let t2 = t * t;
        self.compose_univariate(&[
            t,
            1.0 + t2,
            2.0 * t * (1.0 + t2),
            2.0 + 8.0 * t2 + 6.0 * t2 * t2,
            t * (16.0 + 40.0 * t2 + 24.0 * t2 * t2),
        ])
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose_univariate(&[s, c, s, c, s])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose_univariate(&[c, s, c, s, c])
    }

    pub fn tanh(&self) -> Jet {
        let t = self.c[0].tanh();
        let t2 = t * t;
        self.compose_univariate(&[
            t,
            1.0 - t2,
            -2.0 * t * (1.0 - t2),
            -2.0 + 8.0 * t2 - 6.0 * t2 * t2,
            t * (16.0 - 40.0 * t2 + 24.0 * t2 * t2),
        ])
    }

    pub fn atan(&self) -> Jet {
        let a = self.c[0];
        let q = 1.0 / (1.0 + a * a);
        self.compose_univariate(&[
            a.atan(),
            q,
            -2.0 * a * q * q,
            (6.0 * a * a - 2.0) * q.powi(3),
            24.0 * a * (1.0 - a * a) * q.powi(4),
        ])
    }

    /// Two-argument arctangent `atan2(y, x)`, undefined at the origin.
    ///
    /// Expanded as `θ0 + atan((x0·y - y0·x) / (x0·x + y0·y))`, whose inner
    /// argument vanishes at the base point.
    pub fn atan2(y: &Jet, x: &Jet) -> Jet {
        let (y0, x0) = (y.value(), x.value());
        let theta0 = y0.atan2(x0);
        let num = x.scale(y0).neg() + y.scale(x0);
        let den = x.scale(x0) + y.scale(y0);
        let mut ratio = num * den.recip();
        ratio.c[0] = 0.0;
        let mut out = ratio.atan();
        out.c[0] = theta0;
        out
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("coeffs", &&self.c[..self.len()])
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.order == other.order && self.c[..self.len()] == other.c[..other.len()]
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v, 0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let nvars = self.check_compatible(&rhs);
        let order = self.order.min(rhs.order);
        let n = tables(nvars).len[order as usize];
        let mut c = [0.0; CAP];
        for i in 0..n {
            c[i] = self.c[i] + rhs.c[i];
        }
        Jet {
            nvars: nvars as u8,
            order,
            c,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let nvars = self.check_compatible(&rhs);
        let order = self.order.min(rhs.order);
        let t = tables(nvars);
        let mut c = [0.0; CAP];
        for &(i, j, k) in &t.mul[..t.mul_end[order as usize]] {
            c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        Jet {
            nvars: nvars as u8,
            order,
            c,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::constant(0.0, 0), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn monomial_counts() {
        assert_eq!(tables(1).len, [1, 2, 3, 4, 5]);
        assert_eq!(tables(2).len, [1, 3, 6, 10, 15]);
        assert_eq!(tables(3).len, [1, 4, 10, 20, 35]);
        assert_eq!(tables(3).monomials[1], [1, 0, 0]);
        assert_eq!(tables(3).monomials[3], [0, 0, 1]);
    }

    #[test]
    fn product_of_variables() {
        let [x, y] = Jet::seed([2.0, 3.0], 3);
        let p = x * y;
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.partial(&[1, 0]), 3.0);
        assert_eq!(p.partial(&[0, 1]), 2.0);
        assert_eq!(p.partial(&[1, 1]), 1.0);
        assert_eq!(p.partial(&[2, 0]), 0.0);
    }

    #[test]
    fn sine_series_at_zero() {
        let [t] = Jet::seed([0.0], 3);
        let s = t.sin();
        assert_eq!(s.value(), 0.0);
        assert_eq!(s.partial(&[1]), 1.0);
        assert_eq!(s.partial(&[2]), 0.0);
        assert_relative_eq!(s.partial(&[3]), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_propagates_through_derivatives() {
        let [x, y, z] = Jet::seed([0.3, -0.2, 1.1], 4);
        let f = (x * y).sin() + z * z * z;
        assert_eq!(f.order(), 4);
        let fz = f.derivative(2);
        assert_eq!(fz.order(), 3);
        assert_relative_eq!(fz.value(), 3.0 * 1.1 * 1.1, epsilon = 1e-14);
        assert_relative_eq!(fz.partial(&[0, 0, 1]), 6.0 * 1.1, epsilon = 1e-14);
        assert_eq!((fz * f).order(), 3);
        assert_eq!((fz + Jet::constant(2.0, 3)).order(), 3);
    }

    #[test]
    fn mixed_partials_are_symmetric() {
        let [x, y] = Jet::seed([0.7, 0.4], 4);
        let f = (x * y.exp()).cos();
        let fxy = f.derivative(0).derivative(1);
        let fyx = f.derivative(1).derivative(0);
        assert_relative_eq!(fxy.value(), fyx.value(), epsilon = 1e-14);
        assert_relative_eq!(fxy.value(), f.partial(&[1, 1]), epsilon = 1e-14);
    }

    #[test]
    fn reciprocal_and_powers() {
        let [x] = Jet::seed([2.0], 4);
        let r = x.recip();
        // d^k/dx^k 1/x = (-1)^k k! / x^(k+1)
        assert_relative_eq!(r.partial(&[3]), -6.0 / 16.0, epsilon = 1e-14);
        let q = x.powf(2.5);
        assert_relative_eq!(q.partial(&[2]), 2.5 * 1.5 * 2f64.powf(0.5), epsilon = 1e-13);
        let c = x.powi(3);
        assert_relative_eq!(c.partial(&[3]), 6.0, epsilon = 1e-14);
        assert_eq!(c.partial(&[4]), 0.0);
    }

    #[test]
    fn atan2_matches_angle_derivatives() {
        let [x, y] = Jet::seed([-0.6, 0.8], 4);
        let th = Jet::atan2(&y, &x);
        assert_relative_eq!(th.value(), 0.8f64.atan2(-0.6), epsilon = 1e-15);
        // dθ = (x dy - y dx) / r²
        assert_relative_eq!(th.d(0), -0.8, epsilon = 1e-14);
        assert_relative_eq!(th.d(1), -0.6, epsilon = 1e-14);
        // ∂²θ/∂x² = 2xy / r⁴
        assert_relative_eq!(th.partial(&[2, 0]), 2.0 * -0.6 * 0.8, epsilon = 1e-13);
    }

    #[test]
    fn composition_is_chain_rule() {
        let [x, y] = Jet::seed([0.5, 0.2], 4);
        let f = x * x * y + y.sin();
        let [t] = Jet::seed([1.0], 4);
        // x = t/2, y = 0.2 t²
        let g = f.compose(&[t * 0.5, t * t * 0.2]);
        let [s] = Jet::seed([1.0], 4);
        let direct = (s * 0.5) * (s * 0.5) * (s * s * 0.2) + (s * s * 0.2).sin();
        for k in 0..=4 {
            assert_relative_eq!(g.partial(&[k]), direct.partial(&[k]), epsilon = 1e-13);
        }
    }
}
