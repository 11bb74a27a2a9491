//! Spectral time evolution of local modes and reconstruction of global modes
//! from the local basis.
//!
//! A left local mode expands in the global basis as
//! `ψ⁽⁺⁾_i = Σ_I (α_{i,I} Ψ⁽⁺⁾_I − β_{i,I} Ψ⁽⁻⁾_I)` and
//! `ψ⁽⁻⁾_i = Σ_I (β_{i,I} Ψ⁽⁺⁾_I + α_{i,I} Ψ⁽⁻⁾_I)`; the coefficients are
//! time independent, so evolution only attaches the phases `e^{∓iΩ_I t}`.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bogoliubov::{BogoliubovSet, Region};
use crate::error::{Error, Result};
use crate::modes::{BagMode, Family, FrequencySign, ModeSpec, SpinorValue};
use crate::quadrature::{oscillation_breaks, Quadrature};

/// Default number of points in plotting grids.
pub const DEFAULT_GRID_POINTS: usize = 801;

/// `n` uniformly spaced points covering `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// A local mode written in the (truncated) global basis.
#[derive(Debug, Clone)]
pub struct GlobalExpansion {
    modes: Vec<BagMode>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl GlobalExpansion {
    /// Expansion of `spec` keeping the first `n_terms` global modes.
    pub fn new(spec: ModeSpec, set: &BogoliubovSet, n_terms: usize) -> Result<Self> {
        let region = match spec.family {
            Family::LocalLeft => Region::Left,
            Family::LocalRight => Region::Right,
            Family::Global => return Err(Error::domain("only local modes have a global expansion")),
        };
        if spec.index == 0 || spec.index > set.n_local() {
            return Err(Error::domain(format!("local index {} outside 1..={}", spec.index, set.n_local())));
        }
        if n_terms == 0 || n_terms > set.n_global() {
            return Err(Error::domain(format!("n_terms must lie in 1..={}", set.n_global())));
        }
        let (a, b) = (set.alpha(region), set.beta(region));
        let row = spec.index - 1;
        let (plus, minus): (Vec<_>, Vec<_>) = (0..n_terms)
            .map(|k| match spec.sign {
                FrequencySign::Plus => (a[[row, k]], -b[[row, k]]),
                FrequencySign::Minus => (b[[row, k]], a[[row, k]]),
            })
            .unzip();
        let modes = (1..=n_terms)
            .map(|k| set.tables.mode(Family::Global, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { modes, plus, minus })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest global wavenumber kept.
    pub fn max_wavenumber(&self) -> f64 {
        self.modes.last().map(|m| m.p).unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64, t: f64) -> SpinorValue {
        let mut acc = SpinorValue::ZERO;
        for ((m, cp), cm) in self.modes.iter().zip(&self.plus).zip(&self.minus) {
            acc += m.eval(FrequencySign::Plus, x, t) * *cp;
            acc += m.eval(FrequencySign::Minus, x, t) * *cm;
        }
        acc
    }

    /// `1 − Σ_I (|c⁺_I|² + |c⁻_I|²)`: the norm missing from the truncation.
    pub fn parseval_residual(&self) -> f64 {
        let mut terms: Vec<f64> = self
            .plus
            .iter()
            .chain(&self.minus)
            .map(|c| c.norm_sqr())
            .collect();
        1.0 - crate::sum::sum_by_magnitude(&mut terms)
    }
}

/// `ψ(x, t)` at every grid point, using all `n_global` global modes.
pub fn evolve_local_mode(spec: ModeSpec, t: f64, grid: &[f64], set: &BogoliubovSet) -> Result<Vec<SpinorValue>> {
    evolve_local_mode_truncated(spec, t, grid, set, set.n_global())
}

pub fn evolve_local_mode_truncated(
    spec: ModeSpec,
    t: f64,
    grid: &[f64],
    set: &BogoliubovSet,
    n_terms: usize,
) -> Result<Vec<SpinorValue>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be finite and >= 0, got {t}")));
    }
    let exp = GlobalExpansion::new(spec, set, n_terms)?;
    Ok(grid.par_iter().map(|&x| exp.eval(x, t)).collect())
}

fn integrate_density(exp: &GlobalExpansion, t: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a < b) {
        return Ok(0.0);
    }
    let breaks = oscillation_breaks(a, b, 2.0 * exp.max_wavenumber());
    Quadrature::new(tol).integrate_real(|x| exp.eval(x, t).norm_sqr(), a, b, &breaks)
}

/// `∫₀¹ ψ†ψ dx` of the truncated evolved mode.
pub fn evolved_norm(spec: ModeSpec, t: f64, set: &BogoliubovSet, n_terms: usize) -> Result<f64> {
    let exp = GlobalExpansion::new(spec, set, n_terms)?;
    integrate_density(&exp, t, 0.0, 1.0, set.config.quad_tol)
}

/// Parseval residual of the truncated expansion of `spec`.
pub fn parseval_residual(spec: ModeSpec, set: &BogoliubovSet, n_terms: usize) -> Result<f64> {
    Ok(GlobalExpansion::new(spec, set, n_terms)?.parseval_residual())
}

/// Probability found outside the light cone of the mode's region, widened by
/// `margin`: `∫_{r+t+margin}^1` for left modes, `∫_0^{r−t−margin}` for right
/// modes.
pub fn causality_leakage(spec: ModeSpec, t: f64, set: &BogoliubovSet, margin: f64, n_terms: usize) -> Result<f64> {
    if !(t >= 0.0 && margin >= 0.0) {
        return Err(Error::domain("time and margin must be >= 0"));
    }
    let r = set.config.split_fraction;
    let (a, b) = match spec.family {
        Family::LocalLeft => (r + t + margin, 1.0),
        Family::LocalRight => (0.0, r - t - margin),
        Family::Global => return Err(Error::domain("leakage is defined for local modes")),
    };
    if !(a < b) {
        return Err(Error::domain(format!(
            "light cone plus margin covers the whole cavity at t = {t}"
        )));
    }
    let exp = GlobalExpansion::new(spec, set, n_terms)?;
    integrate_density(&exp, t, a, b, set.config.quad_tol)
}

/// `‖ψ_rec(·, 0) − ψ(·, 0)‖_{L²}` for the truncated expansion.
pub fn initial_reconstruction_error(spec: ModeSpec, set: &BogoliubovSet, n_terms: usize) -> Result<f64> {
    let exp = GlobalExpansion::new(spec, set, n_terms)?;
    let local = set.tables.mode(spec.family, spec.index)?;
    let r = set.config.split_fraction;
    let mut breaks = oscillation_breaks(0.0, 1.0, 2.0 * exp.max_wavenumber().max(local.p));
    breaks.push(r);
    let sq = Quadrature::new(set.config.quad_tol).integrate_real(
        |x| (exp.eval(x, 0.0) - local.eval_supported(spec.sign, x)).norm_sqr(),
        0.0,
        1.0,
        &breaks,
    )?;
    Ok(sq.max(0.0).sqrt())
}

/// Density `ψ†ψ` of an evolved local mode on a space-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub spec: ModeSpec,
    pub times: Vec<f64>,
    pub grid: Vec<f64>,
    /// Row per time, column per grid point.
    pub density: Array2<f64>,
    pub n_terms: usize,
}

impl DensityProfile {
    /// Largest grid point (smallest for right modes) where the density
    /// exceeds `threshold` times the row maximum.
    pub fn support_edge(&self, row: usize, threshold: f64) -> f64 {
        let d = self.density.row(row);
        let peak = d.iter().cloned().fold(0.0, f64::max);
        let above = |k: &usize| d[*k] > threshold * peak;
        let idx = match self.spec.family {
            Family::LocalRight => (0..self.grid.len()).find(above),
            _ => (0..self.grid.len()).rev().find(above),
        };
        idx.map(|k| self.grid[k]).unwrap_or(f64::NAN)
    }
}

pub fn density_profile(spec: ModeSpec, times: &[f64], grid: &[f64], set: &BogoliubovSet, n_terms: usize) -> Result<DensityProfile> {
    let mut density = Array2::zeros((times.len(), grid.len()));
    for (row, &t) in times.iter().enumerate() {
        let psi = evolve_local_mode_truncated(spec, t, grid, set, n_terms)?;
        for (col, v) in psi.iter().enumerate() {
            density[[row, col]] = v.norm_sqr();
        }
    }
    Ok(DensityProfile {
        spec,
        times: times.to_vec(),
        grid: grid.to_vec(),
        density,
        n_terms,
    })
}

/// Accuracy of a global mode rebuilt from the first `terms` local modes of
/// each region and sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub terms: usize,
    /// `‖Ψ − Ψ_rec‖_{L²}`
    pub l2_error: f64,
    /// `‖Ψ − Ψ_rec‖²` by quadrature.
    pub squared_error: f64,
    /// `1 − Σ |coefficients|²`, equal to `squared_error` for an orthonormal basis.
    pub parseval_residual: f64,
}

/// Local-basis coefficients of `Ψ^{sign}_I`: `(ψ⁽⁺⁾_i | Ψ)`, `(ψ⁽⁻⁾_i | Ψ)`.
fn local_coefficients(set: &BogoliubovSet, region: Region, i: usize, big_i: usize, sign: FrequencySign) -> (Complex64, Complex64) {
    let a = set.alpha(region)[[i, big_i]];
    let b = set.beta(region)[[i, big_i]];
    match sign {
        FrequencySign::Plus => (a.conj(), b.conj()),
        FrequencySign::Minus => (-b.conj(), a.conj()),
    }
}

/// Reconstructs `Ψ^{sign}_I` from the combined local basis truncated at each
/// of `partial_terms`.
pub fn expand_global_in_local(
    big_i: usize,
    sign: FrequencySign,
    partial_terms: &[usize],
    set: &BogoliubovSet,
) -> Result<Vec<Reconstruction>> {
    if big_i == 0 || big_i > set.n_global() {
        return Err(Error::domain(format!("global index {big_i} outside 1..={}", set.n_global())));
    }
    if partial_terms.iter().any(|&n| n == 0 || n > set.n_local()) {
        return Err(Error::domain(format!("term counts must lie in 1..={}", set.n_local())));
    }
    let global = set.tables.mode(Family::Global, big_i)?;
    let r = set.config.split_fraction;
    partial_terms
        .iter()
        .map(|&n| {
            let mut parts = Vec::with_capacity(2 * n);
            let mut weights = Vec::with_capacity(4 * n);
            for region in [Region::Left, Region::Right] {
                for i in 0..n {
                    let (cp, cm) = local_coefficients(set, region, i, big_i - 1, sign);
                    parts.push((set.tables.mode(region.family(), i + 1)?, cp, cm));
                    weights.push(cp.norm_sqr());
                    weights.push(cm.norm_sqr());
                }
            }
            let rec = |x: f64| {
                let mut acc = SpinorValue::ZERO;
                for (m, cp, cm) in &parts {
                    if m.contains(x) {
                        acc += m.eval(FrequencySign::Plus, x, 0.0) * *cp;
                        acc += m.eval(FrequencySign::Minus, x, 0.0) * *cm;
                    }
                }
                acc
            };
            let kmax = parts.iter().map(|p| p.0.p).fold(global.p, f64::max);
            let mut breaks = oscillation_breaks(0.0, 1.0, 2.0 * kmax);
            breaks.push(r);
            let sq = Quadrature::new(set.config.quad_tol).integrate_real(
                |x| (global.eval(sign, x, 0.0) - rec(x)).norm_sqr(),
                0.0,
                1.0,
                &breaks,
            )?;
            let parseval = 1.0 - crate::sum::sum_by_magnitude(&mut weights);
            Ok(Reconstruction {
                terms: n,
                l2_error: sq.max(0.0).sqrt(),
                squared_error: sq,
                parseval_residual: parseval,
            })
        })
        .collect()
}

/// Values of a global mode and its local-basis reconstruction on a grid.
pub fn reconstruction_profile(
    big_i: usize,
    sign: FrequencySign,
    terms: usize,
    grid: &[f64],
    set: &BogoliubovSet,
) -> Result<(Vec<SpinorValue>, Vec<SpinorValue>)> {
    if big_i == 0 || big_i > set.n_global() || terms == 0 || terms > set.n_local() {
        return Err(Error::domain("reconstruction indices out of range"));
    }
    let global = set.tables.mode(Family::Global, big_i)?;
    let mut parts = Vec::with_capacity(2 * terms);
    for region in [Region::Left, Region::Right] {
        for i in 0..terms {
            let (cp, cm) = local_coefficients(set, region, i, big_i - 1, sign);
            parts.push((set.tables.mode(region.family(), i + 1)?, cp, cm));
        }
    }
    let exact = grid.iter().map(|&x| global.eval(sign, x, 0.0)).collect();
    let rec = grid
        .par_iter()
        .map(|&x| {
            let mut acc = SpinorValue::ZERO;
            for (m, cp, cm) in &parts {
                if m.contains(x) {
                    acc += m.eval(FrequencySign::Plus, x, 0.0) * *cp;
                    acc += m.eval(FrequencySign::Minus, x, 0.0) * *cm;
                }
            }
            acc
        })
        .collect();
    Ok((exact, rec))
}
