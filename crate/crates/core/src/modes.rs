//! Free spinors, stationary cavity modes and the localized mode basis.
//!
//! Gamma matrices are `γ⁰ = diag(1, −1)` and `γ¹ = [[0, 1], [−1, 0]]`. A bag
//! mode on `[a, a + L]` with wavenumber `p` is
//!
//! ```text
//! Ψ⁽⁺⁾ = N e^{−iωt} (e^{iθ} u(p) − e^{−iθ} u(−p)),   θ = p(x − a) + δ
//! Ψ⁽⁻⁾ = N e^{+iωt} (e^{−iθ} v(p) − e^{iθ} v(−p))
//! ```
//!
//! with `N = √(ω² / (2L(ω² + m/L)))` and `δ = arctan(p/(ω + m))`. The global
//! modes use `a = 0, L = 1`; the left local modes `a = 0, L = r`; the right
//! local modes `a = r, L = 1 − r`.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Sub};

use crate::config::FieldConfig;
use crate::error::{Error, Result};
use crate::quadrature::{oscillation_breaks, Quadrature};
use crate::spectrum::{dispersion, phase_delta, solve_spectrum, WavenumberTable};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Two-component spinor `(φ, χ)ᵀ` at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinorValue {
    pub upper: Complex64,
    pub lower: Complex64,
}

impl SpinorValue {
    pub const ZERO: SpinorValue = SpinorValue {
        upper: Complex64::new(0.0, 0.0),
        lower: Complex64::new(0.0, 0.0),
    };

    pub fn new(upper: Complex64, lower: Complex64) -> Self {
        Self { upper, lower }
    }

    /// `self† · other`.
    pub fn dot(&self, other: &SpinorValue) -> Complex64 {
        self.upper.conj() * other.upper + self.lower.conj() * other.lower
    }

    /// Density `Ψ†Ψ`.
    pub fn norm_sqr(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite() && self.lower.is_finite()
    }

    /// Probability current `j¹ = Ψ†γ⁰γ¹Ψ = 2·Re(φ*χ)`.
    pub fn current(&self) -> f64 {
        2.0 * (self.upper.conj() * self.lower).re
    }

    /// `iγ¹Ψ = (iχ, −iφ)`.
    fn i_gamma1(&self) -> SpinorValue {
        SpinorValue::new(I * self.lower, -I * self.upper)
    }
}

impl Add for SpinorValue {
    type Output = SpinorValue;
    fn add(self, rhs: SpinorValue) -> SpinorValue {
        SpinorValue::new(self.upper + rhs.upper, self.lower + rhs.lower)
    }
}

impl Sub for SpinorValue {
    type Output = SpinorValue;
    fn sub(self, rhs: SpinorValue) -> SpinorValue {
        SpinorValue::new(self.upper - rhs.upper, self.lower - rhs.lower)
    }
}

impl AddAssign for SpinorValue {
    fn add_assign(&mut self, rhs: SpinorValue) {
        self.upper += rhs.upper;
        self.lower += rhs.lower;
    }
}

impl Mul<Complex64> for SpinorValue {
    type Output = SpinorValue;
    fn mul(self, c: Complex64) -> SpinorValue {
        SpinorValue::new(self.upper * c, self.lower * c)
    }
}

impl Mul<f64> for SpinorValue {
    type Output = SpinorValue;
    fn mul(self, c: f64) -> SpinorValue {
        SpinorValue::new(self.upper * c, self.lower * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinorKind {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Global,
    LocalLeft,
    LocalRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrequencySign {
    Plus,
    Minus,
}

impl FrequencySign {
    pub fn label(self) -> &'static str {
        match self {
            FrequencySign::Plus => "plus",
            FrequencySign::Minus => "minus",
        }
    }
}

/// Label of one mode; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSpec {
    pub family: Family,
    pub index: usize,
    pub sign: FrequencySign,
}

impl ModeSpec {
    pub fn new(family: Family, index: usize, sign: FrequencySign) -> Self {
        Self { family, index, sign }
    }

    pub fn global(index: usize, sign: FrequencySign) -> Self {
        Self::new(Family::Global, index, sign)
    }

    pub fn left(index: usize, sign: FrequencySign) -> Self {
        Self::new(Family::LocalLeft, index, sign)
    }

    pub fn right(index: usize, sign: FrequencySign) -> Self {
        Self::new(Family::LocalRight, index, sign)
    }
}

/// `u(p)` or `v(p)`, normalized to unit norm.
pub fn free_spinor(kind: SpinorKind, p: f64, mass: f64) -> Result<SpinorValue> {
    let w = dispersion(p, mass);
    if !(w > 0.0) {
        return Err(Error::domain("free spinor needs p² + m² > 0"));
    }
    let s = ((w + mass) / (2.0 * w)).sqrt();
    let t = p / (w + mass);
    let (a, b) = match kind {
        SpinorKind::U => (s, s * t),
        SpinorKind::V => (s * t, s),
    };
    Ok(SpinorValue::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0)))
}

/// Wall of a bag interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    /// Left endpoint, outward normal pointing to −x.
    Left,
    /// Right endpoint, outward normal pointing to +x.
    Right,
}

/// `‖(1 + i n̸)Ψ‖` at a wall: `Ψ − iγ¹Ψ` on the left, `Ψ + iγ¹Ψ` on the right.
pub fn mit_residual(psi: &SpinorValue, wall: Wall) -> f64 {
    let g = psi.i_gamma1();
    let d = match wall {
        Wall::Left => *psi - g,
        Wall::Right => *psi + g,
    };
    d.norm_sqr().sqrt()
}

/// One bag eigenmode with all per-mode constants precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BagMode {
    pub p: f64,
    pub omega: f64,
    pub delta: f64,
    pub mass: f64,
    /// Left endpoint of the support.
    pub offset: f64,
    pub length: f64,
    /// `2·N·√((ω+m)/2ω)`
    amp: f64,
    /// `p/(ω+m)`
    ratio: f64,
}

impl BagMode {
    pub fn new(p: f64, mass: f64, offset: f64, length: f64) -> Result<Self> {
        let omega = dispersion(p, mass);
        let delta = phase_delta(p, mass)?;
        let n = (omega * omega / (2.0 * length * (omega * omega + mass / length))).sqrt();
        let s = ((omega + mass) / (2.0 * omega)).sqrt();
        Ok(Self {
            p,
            omega,
            delta,
            mass,
            offset,
            length,
            amp: 2.0 * n * s,
            ratio: p / (omega + mass),
        })
    }

    /// Normalization constant `N`.
    pub fn normalization(&self) -> f64 {
        (self.omega * self.omega / (2.0 * self.length * (self.omega * self.omega + self.mass / self.length))).sqrt()
    }

    /// Closed support `[offset, offset + length]`.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.offset && x <= self.offset + self.length
    }

    /// Value of the stationary mode, ignoring the support.
    pub fn eval(&self, sign: FrequencySign, x: f64, t: f64) -> SpinorValue {
        let theta = self.p * (x - self.offset) + self.delta;
        let (s, c) = theta.sin_cos();
        let a = self.amp;
        match sign {
            FrequencySign::Plus => {
                let ph = Complex64::from_polar(a, -self.omega * t);
                SpinorValue::new(I * s * ph, ph * (self.ratio * c))
            }
            FrequencySign::Minus => {
                let ph = Complex64::from_polar(a, self.omega * t);
                SpinorValue::new(ph * (self.ratio * c), -I * s * ph)
            }
        }
    }

    /// Value at `t = 0` restricted to the support (zero outside).
    pub fn eval_supported(&self, sign: FrequencySign, x: f64) -> SpinorValue {
        if self.contains(x) {
            self.eval(sign, x, 0.0)
        } else {
            SpinorValue::ZERO
        }
    }

    /// Direct transcription of the plane-wave superposition, for cross-checks.
    pub fn eval_from_free_spinors(&self, sign: FrequencySign, x: f64, t: f64) -> Result<SpinorValue> {
        let theta = self.p * (x - self.offset) + self.delta;
        let n = self.normalization();
        let e = Complex64::from_polar(1.0, theta);
        Ok(match sign {
            FrequencySign::Plus => {
                let up = free_spinor(SpinorKind::U, self.p, self.mass)?;
                let um = free_spinor(SpinorKind::U, -self.p, self.mass)?;
                (up * e - um * e.conj()) * Complex64::from_polar(n, -self.omega * t)
            }
            FrequencySign::Minus => {
                let vp = free_spinor(SpinorKind::V, self.p, self.mass)?;
                let vm = free_spinor(SpinorKind::V, -self.p, self.mass)?;
                (vp * e.conj() - vm * e) * Complex64::from_polar(n, self.omega * t)
            }
        })
    }
}

/// Global and local wavenumber tables for one configuration.
#[derive(Debug, Clone)]
pub struct ModeTables {
    pub config: FieldConfig,
    pub global: WavenumberTable,
    pub left: WavenumberTable,
    pub right: WavenumberTable,
}

impl ModeTables {
    pub fn new(config: &FieldConfig) -> Result<Self> {
        config.validate()?;
        let m = config.mass_times_r;
        let r = config.split_fraction;
        Ok(Self {
            config: *config,
            global: solve_spectrum(m, 1.0, config.n_global, config.root_tol)?,
            left: solve_spectrum(m, r, config.n_local, config.root_tol)?,
            right: solve_spectrum(m, config.right_length(), config.n_local, config.root_tol)?,
        })
    }

    pub fn table(&self, family: Family) -> &WavenumberTable {
        match family {
            Family::Global => &self.global,
            Family::LocalLeft => &self.left,
            Family::LocalRight => &self.right,
        }
    }

    pub fn mode(&self, family: Family, index: usize) -> Result<BagMode> {
        let table = self.table(family);
        if index == 0 || index > table.len() {
            return Err(Error::domain(format!(
                "mode index {index} outside 1..={} for {family:?}",
                table.len()
            )));
        }
        let offset = match family {
            Family::LocalRight => self.config.split_fraction,
            _ => 0.0,
        };
        BagMode::new(table.root(index), table.mass(), offset, table.length())
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside the cavity [0, 1]")));
    }
    Ok(())
}

/// `Ψ⁽±⁾_I(x, t)` from a length-1 wavenumber table.
pub fn stationary_mode(spec: ModeSpec, x: f64, t: f64, table: &WavenumberTable) -> Result<SpinorValue> {
    if spec.family != Family::Global {
        return Err(Error::domain("stationary_mode expects a global mode spec"));
    }
    check_unit_interval(x)?;
    if spec.index == 0 || spec.index > table.len() {
        return Err(Error::domain(format!(
            "mode index {} outside 1..={}",
            spec.index,
            table.len()
        )));
    }
    let mode = BagMode::new(table.root(spec.index), table.mass(), 0.0, table.length())?;
    Ok(mode.eval(spec.sign, x, t))
}

/// Initial data `ψ⁽±⁾_i(x, 0)` or `ψ′⁽±⁾_i(x, 0)`; zero outside its region.
pub fn local_mode_initial(spec: ModeSpec, x: f64, tables: &ModeTables) -> Result<SpinorValue> {
    if spec.family == Family::Global {
        return Err(Error::domain("local_mode_initial expects a local mode spec"));
    }
    check_unit_interval(x)?;
    Ok(tables.mode(spec.family, spec.index)?.eval_supported(spec.sign, x))
}

/// `∫_a^b f†(x) g(x) dx` by adaptive composite Gauss–Legendre.
pub fn inner_product_quadrature<F, G>(
    f: F,
    g: G,
    a: f64,
    b: f64,
    panel_breaks: &[f64],
    tol: f64,
) -> Result<Complex64>
where
    F: Fn(f64) -> SpinorValue,
    G: Fn(f64) -> SpinorValue,
{
    Quadrature::new(tol).integrate(|x| f(x).dot(&g(x)), a, b, panel_breaks)
}

/// `(f | g)` for two bag modes at `t = 0`, integrating over the intersection
/// of their supports with breaks fine enough for both oscillations.
pub fn mode_overlap(
    f: &BagMode,
    fs: FrequencySign,
    g: &BagMode,
    gs: FrequencySign,
    tol: f64,
) -> Result<Complex64> {
    let a = f.offset.max(g.offset);
    let b = (f.offset + f.length).min(g.offset + g.length);
    if !(a < b) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let breaks = oscillation_breaks(a, b, f.p + g.p);
    inner_product_quadrature(|x| f.eval(fs, x, 0.0), |x| g.eval(gs, x, 0.0), a, b, &breaks, tol)
}
