//! Composite Gauss–Legendre quadrature with adaptive panel bisection.
//!
//! Each panel is integrated with a fixed 32-point rule and compared with the
//! sum over its two halves; panels are bisected until the two levels agree.
//! Caller-supplied breaks (discontinuities, oscillation scale) seed the
//! initial panels.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

pub const RULE_POINTS: usize = 32;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for k in 0..n.div_ceil(2) {
            let mut x = (PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(RULE_POINTS))
    }

    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut re = NeumaierSum::default();
        let mut im = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x) * *w;
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value()) * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive composite rule.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Absolute tolerance on the whole integral.
    pub tol: f64,
    pub max_depth: u32,
}

impl Quadrature {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_depth: 30 }
    }

    /// `∫_a^b f(x) dx`, splitting at every `break` strictly inside `(a, b)`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("quadrature tolerance must be > 0"));
        }
        let mut points = Vec::with_capacity(breaks.len() + 2);
        points.push(a);
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        points.extend(inner);
        points.push(b);

        let rule = GaussLegendre::standard();
        let width = b - a;
        let mut re = NeumaierSum::default();
        let mut im = NeumaierSum::default();
        for w in points.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let whole = rule.apply(&f, lo, hi);
            let tol = self.tol * (hi - lo) / width;
            let v = self.refine(rule, &f, lo, hi, whole, tol, 0, (a, b))?;
            re.add(v.re);
            im.add(v.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// Real-valued convenience wrapper.
    pub fn integrate_real<F>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        Ok(self.integrate(|x| Complex64::new(f(x), 0.0), a, b, breaks)?.re)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F>(
        &self,
        rule: &GaussLegendre,
        f: &F,
        lo: f64,
        hi: f64,
        whole: Complex64,
        tol: f64,
        depth: u32,
        bounds: (f64, f64),
    ) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let mid = 0.5 * (lo + hi);
        let left = rule.apply(f, lo, mid);
        let right = rule.apply(f, mid, hi);
        let split = left + right;
        let diff = (split - whole).norm();
        let roundoff = 64.0 * f64::EPSILON * (left.norm() + right.norm());
        if diff <= tol || diff <= roundoff {
            return Ok(split);
        }
        if depth >= self.max_depth || mid <= lo || mid >= hi {
            return Err(Error::QuadratureFailure {
                a: bounds.0,
                b: bounds.1,
                tol: self.tol,
                estimate: split.re,
                error: diff,
            });
        }
        let l = self.refine(rule, f, lo, mid, left, 0.5 * tol, depth + 1, bounds)?;
        let r = self.refine(rule, f, mid, hi, right, 0.5 * tol, depth + 1, bounds)?;
        Ok(l + r)
    }
}

/// Uniform breaks on `[a, b]` so that each panel spans at most `kmax·h ≤ 8`
/// radians of the fastest oscillation `e^{i·kmax·x}`.
pub fn oscillation_breaks(a: f64, b: f64, kmax: f64) -> Vec<f64> {
    let panels = ((kmax.abs() * (b - a) / 8.0).ceil() as usize).max(1);
    (1..panels)
        .map(|k| a + (b - a) * k as f64 / panels as f64)
        .collect()
}
