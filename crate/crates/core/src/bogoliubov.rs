//! Bogoliubov coefficients between the global and the split-cavity bases.
//!
//! With `α_{i,I} = (Ψ⁽⁺⁾_I | ψ⁽⁺⁾_i)` and `β_{i,I} = −(Ψ⁽⁻⁾_I | ψ⁽⁺⁾_i)` the
//! overlaps also satisfy `(Ψ⁽⁻⁾_I | ψ⁽⁻⁾_i) = α_{i,I}` and
//! `(Ψ⁽⁺⁾_I | ψ⁽⁻⁾_i) = β_{i,I}`; the primed coefficients are the same overlaps
//! with the right-region modes. Under the phase conventions of [`crate::modes`]
//! every `α` is real and every `β` purely imaginary.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::FieldConfig;
use crate::error::{Error, Result};
use crate::modes::{mode_overlap, BagMode, Family, FrequencySign, ModeTables};
use crate::spectrum::solve_root;
use crate::sum::{sum_by_magnitude, sum_complex_by_magnitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Left,
    Right,
}

impl Region {
    pub fn family(self) -> Family {
        match self {
            Region::Left => Family::LocalLeft,
            Region::Right => Family::LocalRight,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::Left => "left",
            Region::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientKind {
    Alpha,
    Beta,
}

/// Closed-form coefficient for a local mode `local` (left or right region)
/// against the global mode `global`. `split` is `r`.
pub fn closed_form(region: Region, kind: CoefficientKind, local: &BagMode, global: &BagMode, split: f64) -> Complex64 {
    let m = global.mass;
    let (p, w) = (local.p, local.omega);
    let (pp, ww) = (global.p, global.omega);
    let len = local.length;
    let c = 1.0 / (len * (w * w + m / len) * (ww * ww + m)).sqrt();
    // (first, second, mass term) inside the bracket
    let (a, b, mass_term) = match region {
        Region::Left => {
            let (sp, cp) = (pp * split).sin_cos();
            let (sl, cl) = (p * split).sin_cos();
            (p * ww * sp * cl, pp * w * cp * sl, m * sp * sl)
        }
        Region::Right => {
            let (s1, c1) = pp.sin_cos();
            let (sl, cl) = (p * len).sin_cos();
            let x = s1 * cl - (pp * split).sin();
            (p * ww * x, pp * w * c1 * sl, m * s1 * sl)
        }
    };
    match kind {
        CoefficientKind::Alpha => Complex64::new(c * ((a - b) / (ww - w) + mass_term), 0.0),
        CoefficientKind::Beta => Complex64::new(0.0, -c * ((a + b) / (ww + w) + mass_term)),
    }
}

/// The same coefficient by numerical overlap of the mode functions.
pub fn quadrature_coefficient(kind: CoefficientKind, local: &BagMode, global: &BagMode, tol: f64) -> Result<Complex64> {
    match kind {
        CoefficientKind::Alpha => mode_overlap(global, FrequencySign::Plus, local, FrequencySign::Plus, tol),
        CoefficientKind::Beta => Ok(-mode_overlap(global, FrequencySign::Minus, local, FrequencySign::Plus, tol)?),
    }
}

/// True when `|Ω − ω| < degeneracy_tol·Ω`, where the closed-form `α` is
/// indeterminate.
pub fn is_degenerate(local: &BagMode, global: &BagMode, degeneracy_tol: f64) -> bool {
    (global.omega - local.omega).abs() < degeneracy_tol * global.omega
}

/// A coefficient together with the flag telling whether quadrature was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub value: Complex64,
    pub fallback: bool,
}

fn evaluate(
    region: Region,
    kind: CoefficientKind,
    local: &BagMode,
    global: &BagMode,
    config: &FieldConfig,
) -> Result<Coefficient> {
    // Only α carries the 1/(Ω − ω) factor; β's denominator is never small.
    if kind == CoefficientKind::Alpha && is_degenerate(local, global, config.degeneracy_tol) {
        // The overlap is real in exact arithmetic; drop the quadrature noise.
        let v = quadrature_coefficient(kind, local, global, config.quad_tol)?;
        return Ok(Coefficient {
            value: Complex64::new(v.re, 0.0),
            fallback: true,
        });
    }
    Ok(Coefficient {
        value: closed_form(region, kind, local, global, config.split_fraction),
        fallback: false,
    })
}

/// Coefficient `(i, I)` (1-based) using the tables' truncations.
pub fn coefficient(
    region: Region,
    kind: CoefficientKind,
    i: usize,
    big_i: usize,
    tables: &ModeTables,
) -> Result<Complex64> {
    let local = tables.mode(region.family(), i)?;
    let global = tables.mode(Family::Global, big_i)?;
    Ok(evaluate(region, kind, &local, &global, &tables.config)?.value)
}

/// Coefficient for arbitrary indices, solving the two roots on demand.
pub fn coefficient_on_demand(
    config: &FieldConfig,
    region: Region,
    kind: CoefficientKind,
    i: usize,
    big_i: usize,
) -> Result<Complex64> {
    config.validate()?;
    let m = config.mass_times_r;
    let r = config.split_fraction;
    let (offset, len) = match region {
        Region::Left => (0.0, r),
        Region::Right => (r, config.right_length()),
    };
    let local = BagMode::new(solve_root(m, len, i, config.root_tol)?, m, offset, len)?;
    let global = BagMode::new(solve_root(m, 1.0, big_i, config.root_tol)?, m, 0.0, 1.0)?;
    Ok(evaluate(region, kind, &local, &global, config)?.value)
}

/// Truncated coefficient matrices, row `i − 1`, column `I − 1`.
#[derive(Debug, Clone)]
pub struct BogoliubovSet {
    pub config: FieldConfig,
    pub tables: ModeTables,
    pub alpha: Array2<Complex64>,
    pub beta: Array2<Complex64>,
    pub alpha_prime: Array2<Complex64>,
    pub beta_prime: Array2<Complex64>,
    /// Entries of `alpha` computed by quadrature.
    pub fallback: Array2<bool>,
    pub fallback_prime: Array2<bool>,
}

impl BogoliubovSet {
    pub fn n_local(&self) -> usize {
        self.config.n_local
    }

    pub fn n_global(&self) -> usize {
        self.config.n_global
    }

    pub fn alpha(&self, region: Region) -> &Array2<Complex64> {
        match region {
            Region::Left => &self.alpha,
            Region::Right => &self.alpha_prime,
        }
    }

    pub fn beta(&self, region: Region) -> &Array2<Complex64> {
        match region {
            Region::Left => &self.beta,
            Region::Right => &self.beta_prime,
        }
    }

    pub fn fallback(&self, region: Region) -> &Array2<bool> {
        match region {
            Region::Left => &self.fallback,
            Region::Right => &self.fallback_prime,
        }
    }

    pub fn fallback_count(&self) -> usize {
        self.fallback.iter().chain(self.fallback_prime.iter()).filter(|&&f| f).count()
    }

    /// Local frequencies `ω_i` of a region.
    pub fn local_frequencies(&self, region: Region) -> Vec<f64> {
        let t = self.tables.table(region.family());
        (1..=t.len()).map(|i| t.omega(i)).collect()
    }

    pub fn global_frequencies(&self) -> Vec<f64> {
        let t = &self.tables.global;
        (1..=t.len()).map(|i| t.omega(i)).collect()
    }

    /// Assembles a set from precomputed parts, checking shapes.
    pub fn from_parts(
        config: FieldConfig,
        tables: ModeTables,
        matrices: [Array2<Complex64>; 4],
        fallback: [Array2<bool>; 2],
    ) -> Result<Self> {
        let shape = [config.n_local, config.n_global];
        if matrices.iter().any(|m| m.shape() != shape) || fallback.iter().any(|m| m.shape() != shape) {
            return Err(Error::domain("matrix shapes do not match the configuration"));
        }
        let [alpha, beta, alpha_prime, beta_prime] = matrices;
        let [fallback, fallback_prime] = fallback;
        Ok(Self {
            config,
            tables,
            alpha,
            beta,
            alpha_prime,
            beta_prime,
            fallback,
            fallback_prime,
        })
    }
}

fn fill_region(tables: &ModeTables, region: Region) -> Result<(Array2<Complex64>, Array2<Complex64>, Array2<bool>)> {
    let cfg = &tables.config;
    let (nl, ng) = (cfg.n_local, cfg.n_global);
    let globals = (1..=ng)
        .map(|k| tables.mode(Family::Global, k))
        .collect::<Result<Vec<_>>>()?;
    let rows = (1..=nl)
        .into_par_iter()
        .map(|i| {
            let local = tables.mode(region.family(), i)?;
            let mut out = Vec::with_capacity(ng);
            for g in &globals {
                let a = evaluate(region, CoefficientKind::Alpha, &local, g, cfg)?;
                let b = evaluate(region, CoefficientKind::Beta, &local, g, cfg)?;
                out.push((a, b.value));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut alpha = Array2::zeros((nl, ng));
    let mut beta = Array2::zeros((nl, ng));
    let mut flags = Array2::from_elem((nl, ng), false);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, (a, b)) in row.into_iter().enumerate() {
            alpha[[i, k]] = a.value;
            flags[[i, k]] = a.fallback;
            beta[[i, k]] = b;
        }
    }
    Ok((alpha, beta, flags))
}

/// Fills all four matrices for `config`.
pub fn build_matrices(config: &FieldConfig) -> Result<BogoliubovSet> {
    let tables = ModeTables::new(config)?;
    let (alpha, beta, fallback) = fill_region(&tables, Region::Left)?;
    let (alpha_prime, beta_prime, fallback_prime) = fill_region(&tables, Region::Right)?;
    Ok(BogoliubovSet {
        config: *config,
        tables,
        alpha,
        beta,
        alpha_prime,
        beta_prime,
        fallback,
        fallback_prime,
    })
}

/// Maximum deviations of the truncated unitarity sums.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    /// `max |Σ_I (α_iI α*_jI + β_iI β*_jI) − δ_ij|` over both regions.
    pub cond1_max_err: f64,
    /// `max |Σ_I (α_iI β_jI + β_iI α_jI)|` over both regions.
    pub cond2_max_err: f64,
    /// `max |Σ_i (α_iI α*_iJ + β_iI β*_iJ + primed) − δ_IJ|`.
    pub cond3_combined_max_err: f64,
    /// `max |Σ_i (α_iI β_iJ + β_iI α_iJ + primed)|`.
    pub cond4_max_err: f64,
    /// `max_I Σ_i (|α_iI|² + |β_iI|²)` with unprimed terms only.
    pub cond3_unprimed_diagonal_max: f64,
    pub truncation: (usize, usize),
    pub index_range: usize,
}

fn row_sum<F: Fn(usize) -> Complex64>(n: usize, f: F) -> Complex64 {
    let mut terms: Vec<Complex64> = (0..n).map(f).collect();
    sum_complex_by_magnitude(&mut terms)
}

/// Evaluates the four unitarity conditions for indices up to `index_range`.
pub fn check_conditions(set: &BogoliubovSet, index_range: usize) -> Result<ConditionReport> {
    let (nl, ng) = (set.n_local(), set.n_global());
    if index_range == 0 || index_range > nl.min(ng) {
        return Err(Error::domain(format!(
            "index_range {index_range} must lie in 1..={}",
            nl.min(ng)
        )));
    }
    let n = index_range;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();

    let (c1, c2) = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut e1: f64 = 0.0;
            let mut e2: f64 = 0.0;
            for region in [Region::Left, Region::Right] {
                let (a, b) = (set.alpha(region), set.beta(region));
                let s1 = row_sum(ng, |k| a[[i, k]] * a[[j, k]].conj() + b[[i, k]] * b[[j, k]].conj());
                let s2 = row_sum(ng, |k| a[[i, k]] * b[[j, k]] + b[[i, k]] * a[[j, k]]);
                let delta = if i == j { 1.0 } else { 0.0 };
                e1 = e1.max((s1 - delta).norm());
                e2 = e2.max(s2.norm());
            }
            (e1, e2)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));

    let (a, b, ap, bp) = (&set.alpha, &set.beta, &set.alpha_prime, &set.beta_prime);
    let (c3, c4) = pairs
        .par_iter()
        .map(|&(ii, jj)| {
            let s3 = row_sum(nl, |i| {
                a[[i, ii]] * a[[i, jj]].conj()
                    + b[[i, ii]] * b[[i, jj]].conj()
                    + ap[[i, ii]] * ap[[i, jj]].conj()
                    + bp[[i, ii]] * bp[[i, jj]].conj()
            });
            let s4 = row_sum(nl, |i| {
                a[[i, ii]] * b[[i, jj]] + b[[i, ii]] * a[[i, jj]] + ap[[i, ii]] * bp[[i, jj]] + bp[[i, ii]] * ap[[i, jj]]
            });
            let delta = if ii == jj { 1.0 } else { 0.0 };
            ((s3 - delta).norm(), s4.norm())
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));

    let diag = (0..ng)
        .map(|k| {
            let mut terms: Vec<f64> = (0..nl).map(|i| a[[i, k]].norm_sqr() + b[[i, k]].norm_sqr()).collect();
            sum_by_magnitude(&mut terms)
        })
        .fold(0.0_f64, f64::max);

    Ok(ConditionReport {
        cond1_max_err: c1,
        cond2_max_err: c2,
        cond3_combined_max_err: c3,
        cond4_max_err: c4,
        cond3_unprimed_diagonal_max: diag,
        truncation: (nl, ng),
        index_range,
    })
}
