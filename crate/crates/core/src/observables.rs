//! Vacuum observables of the split cavity, computed from the coefficient
//! matrices.
//!
//! All reductions over mode indices go through the magnitude-sorted
//! compensated sums of [`crate::sum`], so every value is independent of the
//! number of worker threads.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::bogoliubov::{closed_form, coefficient_on_demand, BogoliubovSet, CoefficientKind, Region};
use crate::config::FieldConfig;
use crate::error::{Error, Result};
use crate::modes::BagMode;
use crate::spectrum::solve_spectrum;
use crate::sum::{sum_by_magnitude, sum_complex_by_magnitude};

/// Relative spread allowed between successive increments of a
/// log-divergent series.
pub const LOG_GROWTH_SPREAD: f64 = 0.2;
/// Each doubling must shrink a convergent tail by at least this factor.
pub const TAIL_SHRINK: f64 = 0.75;

/// Partial sums of a series at increasing cutoffs, with a classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub partial_sums: Vec<(usize, f64)>,
    /// `S(N_{k+1}) − S(N_k)`.
    pub increments: Vec<f64>,
    pub extrapolated_value: Option<f64>,
    pub diverges: bool,
    pub converges: bool,
    pub note: String,
}

impl SeriesReport {
    /// Classifies partial sums taken at doubling cutoffs.
    ///
    /// Divergent: the last three increments are positive, above ten times
    /// the rounding noise and within [`LOG_GROWTH_SPREAD`] of each other
    /// (constant growth per doubling, i.e. `S(N) ~ c·log N`).
    /// Convergent: every increment is at most [`TAIL_SHRINK`] times the one
    /// before, or all increments are at the noise level.
    pub fn from_partials(partial_sums: Vec<(usize, f64)>) -> Result<Self> {
        if partial_sums.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::domain("series cutoffs must be strictly increasing"));
        }
        if partial_sums.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::domain("series partial sums must be finite"));
        }
        let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let (n_max, s_max) = partial_sums
            .last()
            .map(|&(n, s)| (n as f64, s.abs()))
            .unwrap_or((0.0, 0.0));
        let noise = n_max * f64::EPSILON * s_max.max(f64::MIN_POSITIVE);

        let mut diverges = false;
        let mut note = String::from("fewer than three increments; growth not classified");
        if increments.len() >= 3 {
            let last = &increments[increments.len() - 3..];
            let lo = last.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            diverges = lo > 10.0 * noise && hi - lo <= LOG_GROWTH_SPREAD * lo;
            note = if diverges {
                format!("log growth: increment per doubling ≈ {:.6e} (spread {:.1}%)", last[2], 100.0 * (hi - lo) / lo)
            } else {
                format!("increments {lo:.3e}..{hi:.3e} are not a constant-per-doubling profile")
            };
        }
        let all_noise = increments.iter().all(|d| d.abs() <= 10.0 * noise);
        let shrinking = increments.len() >= 2
            && increments.windows(2).all(|w| w[1].abs() <= TAIL_SHRINK * w[0].abs());
        let converges = !diverges && !increments.is_empty() && (all_noise || shrinking);
        let extrapolated_value = if converges {
            let s = partial_sums.last().unwrap().1;
            if all_noise || increments.len() < 2 {
                Some(s)
            } else {
                let d1 = increments[increments.len() - 1];
                let d0 = increments[increments.len() - 2];
                let q = d1 / d0;
                Some(s + d1 * q / (1.0 - q))
            }
        } else {
            None
        };
        if converges {
            note = "Cauchy tail shrinks geometrically under doubling".into();
        }
        Ok(Self {
            partial_sums,
            increments,
            extrapolated_value,
            diverges,
            converges,
            note,
        })
    }

    pub fn last_value(&self) -> Option<f64> {
        self.partial_sums.last().map(|p| p.1)
    }
}

fn check_region_index(set: &BogoliubovSet, i: usize) -> Result<()> {
    if i == 0 || i > set.n_local() {
        return Err(Error::domain(format!("local index {i} outside 1..={}", set.n_local())));
    }
    Ok(())
}

fn row_norm_sqr(m: &Array2<Complex64>, row: usize, upto: usize) -> f64 {
    let mut terms: Vec<f64> = (0..upto).map(|k| m[[row, k]].norm_sqr()).collect();
    sum_by_magnitude(&mut terms)
}

/// `⟨n_i⟩ = Σ_I |β_{i,I}|²` (or `|β′|²`) for every local index.
pub fn local_occupation(set: &BogoliubovSet, region: Region) -> Vec<f64> {
    let b = set.beta(region);
    (0..set.n_local())
        .into_par_iter()
        .map(|i| row_norm_sqr(b, i, set.n_global()))
        .collect()
}

/// `⟨n̄_i⟩`; the antiparticle spectrum is given by the very same sum.
pub fn local_antiparticle_occupation(set: &BogoliubovSet, region: Region) -> Vec<f64> {
    local_occupation(set, region)
}

/// `⟨n_i⟩` summed over `n_global` global modes without storing the matrix.
///
/// Used when the split is so close to a wall that the local wavenumbers far
/// exceed any practical matrix truncation.
pub fn local_occupation_streaming(config: &FieldConfig, region: Region, n_global: usize) -> Result<Vec<f64>> {
    config.validate()?;
    let m = config.mass_times_r;
    let r = config.split_fraction;
    let (offset, len) = match region {
        Region::Left => (0.0, r),
        Region::Right => (r, config.right_length()),
    };
    let global = solve_spectrum(m, 1.0, n_global, config.root_tol)?;
    let local = solve_spectrum(m, len, config.n_local, config.root_tol)?;
    let mut out = Vec::with_capacity(config.n_local);
    for i in 1..=config.n_local {
        let lm = BagMode::new(local.root(i), m, offset, len)?;
        let mut terms = global
            .roots()
            .par_iter()
            .map(|&p| {
                let g = BagMode::new(p, m, 0.0, 1.0)?;
                Ok(closed_form(region, CoefficientKind::Beta, &lm, &g, r).norm_sqr())
            })
            .collect::<Result<Vec<f64>>>()?;
        terms.par_sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
        out.push(sum_by_magnitude(&mut terms));
    }
    Ok(out)
}

/// `⟨N_I⟩ = Σ_i (|β_{i,I}|² + |β′_{i,I}|²)` for every global index.
pub fn removed_mirror_spectrum(set: &BogoliubovSet) -> Vec<f64> {
    let (b, bp) = (&set.beta, &set.beta_prime);
    (0..set.n_global())
        .into_par_iter()
        .map(|k| {
            let mut terms: Vec<f64> = (0..set.n_local())
                .flat_map(|i| [b[[i, k]].norm_sqr(), bp[[i, k]].norm_sqr()])
                .collect();
            sum_by_magnitude(&mut terms)
        })
        .collect()
}

/// Output of the thermality transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureReport {
    pub values: Vec<f64>,
    /// Indices (0-based) with `⟨n⟩ ≥ ½`, where the logarithm changes sign.
    pub flagged: Vec<usize>,
}

/// `T_i = ω_i / log((1 − ⟨n_i⟩)/⟨n_i⟩)`, with `T = 0` at `⟨n⟩ = 0`.
pub fn effective_temperature(spectrum: &[f64], frequencies: &[f64]) -> Result<TemperatureReport> {
    if spectrum.len() != frequencies.len() {
        return Err(Error::domain("spectrum and frequencies differ in length"));
    }
    let mut values = Vec::with_capacity(spectrum.len());
    let mut flagged = Vec::new();
    for (k, (&n, &w)) in spectrum.iter().zip(frequencies).enumerate() {
        if !(0.0..1.0).contains(&n) {
            return Err(Error::domain(format!("occupation {n} at index {k} outside [0, 1)")));
        }
        if n == 0.0 {
            values.push(0.0);
            continue;
        }
        if n >= 0.5 {
            flagged.push(k);
        }
        values.push(w / ((1.0 - n) / n).ln());
    }
    Ok(TemperatureReport { values, flagged })
}

/// Energy of the one-particle state `a_i†|0^G⟩` (normalized) cut off at each
/// `N`: `S(N) = Σ_{I≤N} Ω_I |α_{i,I}|² / (1 − ⟨n_i⟩)`.
pub fn quasilocal_energy(set: &BogoliubovSet, i: usize, cutoffs: &[usize]) -> Result<SeriesReport> {
    check_region_index(set, i)?;
    if cutoffs.iter().any(|&n| n == 0 || n > set.n_global()) {
        return Err(Error::domain(format!("energy cutoffs must lie in 1..={}", set.n_global())));
    }
    let n_i = row_norm_sqr(&set.beta, i - 1, set.n_global());
    let omega = set.global_frequencies();
    let partial = cutoffs
        .iter()
        .map(|&n| {
            let mut terms: Vec<f64> = (0..n)
                .map(|k| omega[k] * set.alpha[[i - 1, k]].norm_sqr() / (1.0 - n_i))
                .collect();
            (n, sum_by_magnitude(&mut terms))
        })
        .collect();
    SeriesReport::from_partials(partial)
}

/// Least-squares slope of `log ȳ` against `log x̄`, where the points are
/// first averaged in `bins` logarithmically spaced bins. The averaging
/// removes the oscillating `cos²` factors that multiply the power laws.
pub fn binned_loglog_slope(xs: &[f64], ys: &[f64], bins: usize) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || bins < 2 {
        return Err(Error::domain("slope fit needs matching inputs with at least two points and bins"));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min).ln();
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ln();
    if !(hi > lo) || xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("slope fit needs positive, non-constant abscissae"));
    }
    let mut sx = vec![0.0; bins];
    let mut sy = vec![0.0; bins];
    let mut cnt = vec![0usize; bins];
    for (&x, &y) in xs.iter().zip(ys) {
        let b = (((x.ln() - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
        sx[b] += x;
        sy[b] += y;
        cnt[b] += 1;
    }
    let pts: Vec<(f64, f64)> = (0..bins)
        .filter(|&b| cnt[b] > 0 && sy[b] > 0.0)
        .map(|b| ((sx[b] / cnt[b] as f64).ln(), (sy[b] / cnt[b] as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::domain("slope fit has fewer than two populated bins"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Log-log decay rate of `Ω_I |α_{i,I}|²` against `Ω_I` for `I ∈ [lo, hi]`.
pub fn energy_term_slope(set: &BogoliubovSet, i: usize, lo: usize, hi: usize) -> Result<f64> {
    check_region_index(set, i)?;
    if lo == 0 || lo >= hi || hi > set.n_global() {
        return Err(Error::domain("energy slope range must satisfy 1 <= lo < hi <= n_global"));
    }
    let omega = set.global_frequencies();
    let xs: Vec<f64> = (lo..=hi).map(|k| omega[k - 1]).collect();
    let ys: Vec<f64> = (lo..=hi).map(|k| omega[k - 1] * set.alpha[[i - 1, k - 1]].norm_sqr()).collect();
    binned_loglog_slope(&xs, &ys, 20)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationChannel {
    /// `corr(n_l, n′_k)`
    ParticleParticle,
    /// `corr(n̄_l, n̄′_k)`
    AntiparticleAntiparticle,
    /// `corr(n_l, n̄′_k)`
    ParticleAntiparticle,
    /// `corr(n̄_l, n′_k)`
    AntiparticleParticle,
}

impl CorrelationChannel {
    pub fn label(self) -> &'static str {
        match self {
            CorrelationChannel::ParticleParticle => "particle_particle",
            CorrelationChannel::AntiparticleAntiparticle => "antiparticle_antiparticle",
            CorrelationChannel::ParticleAntiparticle => "particle_antiparticle",
            CorrelationChannel::AntiparticleParticle => "antiparticle_particle",
        }
    }

    /// (left operator is a particle, right operator is a particle)
    fn species(self) -> (bool, bool) {
        match self {
            CorrelationChannel::ParticleParticle => (true, true),
            CorrelationChannel::AntiparticleAntiparticle => (false, false),
            CorrelationChannel::ParticleAntiparticle => (true, false),
            CorrelationChannel::AntiparticleParticle => (false, true),
        }
    }
}

/// Normalized number correlations between left modes `l` and right modes `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGrid {
    pub channel: CorrelationChannel,
    /// 1-based inclusive index ranges.
    pub l_range: (usize, usize),
    pub k_range: (usize, usize),
    /// Row `l − l_start`, column `k − k_start`.
    pub values: Array2<f64>,
    /// Entries whose normalizer vanished (set to 0 in `values`).
    pub flagged: Vec<(usize, usize)>,
    /// Largest discarded imaginary part relative to the entry's scale.
    pub max_imag_residue: f64,
    pub config: FieldConfig,
}

/// A local annihilation operator in the global basis:
/// `c = Σ_I (x_I A_I + y_I B_I + u_I A_I† + v_I B_I†)`.
///
/// From the Bogoliubov relations, `a_i` has `x = α*`, `v = −β*` and `b_i` has
/// `y = α*`, `u = −β*`; all other components vanish.
struct LocalOperator {
    x: Vec<Complex64>,
    y: Vec<Complex64>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl LocalOperator {
    fn new(set: &BogoliubovSet, region: Region, i: usize, particle: bool) -> Self {
        let n = set.n_global();
        let (a, b) = (set.alpha(region), set.beta(region));
        let ac: Vec<Complex64> = (0..n).map(|k| a[[i - 1, k]].conj()).collect();
        let bc: Vec<Complex64> = (0..n).map(|k| -b[[i - 1, k]].conj()).collect();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        if particle {
            Self { x: ac, y: zero.clone(), u: zero, v: bc }
        } else {
            Self { x: zero.clone(), y: ac, u: bc, v: zero }
        }
    }
}

/// `Σ_I (f_I g_I + h_I k_I)` with magnitude-sorted compensated summation.
fn pair_sum(f: impl Fn(usize) -> Complex64, g: impl Fn(usize) -> Complex64, n: usize) -> Complex64 {
    let mut terms: Vec<Complex64> = (0..n).flat_map(|k| [f(k), g(k)]).collect();
    sum_complex_by_magnitude(&mut terms)
}

/// Vacuum covariance of `c1†c1` and `c2†c2` for anticommuting `c1`, `c2`:
/// `⟨c1†c2⟩⟨c1 c2†⟩ − ⟨c1†c2†⟩⟨c1 c2⟩`, with the two-point functions of the
/// global vacuum `⟨A A†⟩ = ⟨B B†⟩ = 1`.
fn wick_covariance(c1: &LocalOperator, c2: &LocalOperator) -> Complex64 {
    let n = c1.x.len();
    let dag_ann = pair_sum(|k| c1.u[k].conj() * c2.u[k], |k| c1.v[k].conj() * c2.v[k], n);
    let ann_dag = pair_sum(|k| c1.x[k] * c2.x[k].conj(), |k| c1.y[k] * c2.y[k].conj(), n);
    let dag_dag = pair_sum(|k| c1.u[k].conj() * c2.x[k].conj(), |k| c1.v[k].conj() * c2.y[k].conj(), n);
    let ann_ann = pair_sum(|k| c1.x[k] * c2.u[k], |k| c1.y[k] * c2.v[k], n);
    dag_ann * ann_dag - dag_dag * ann_ann
}

/// Vacuum covariance of a left number operator (`n_l` or `n̄_l`) with a right
/// one (`n′_k` or `n̄′_k`), before normalization. Returned as complex so
/// callers can inspect the imaginary residue.
///
/// For the particle channels this evaluates to
/// `cov(n_l, n′_k) = (Σ_I β_{l,I} β′*_{k,I}) (Σ_J α*_{l,J} α′_{k,J})` and
/// `cov(n_l, n̄′_k) = −(Σ_I α*_{l,I} β′*_{k,I}) (Σ_J β_{l,J} α′_{k,J})`.
pub fn number_covariance(set: &BogoliubovSet, channel: CorrelationChannel, l: usize, k: usize) -> Result<Complex64> {
    check_region_index(set, l)?;
    check_region_index(set, k)?;
    let (pl, pk) = channel.species();
    let c1 = LocalOperator::new(set, Region::Left, l, pl);
    let c2 = LocalOperator::new(set, Region::Right, k, pk);
    Ok(wick_covariance(&c1, &c2))
}

/// `√(Σ_I |α_{i,I}|² · Σ_J |β_{i,J}|²)`, the standard deviation of `n_i`.
fn number_spread(set: &BogoliubovSet, region: Region, i: usize) -> f64 {
    let n = set.n_global();
    (row_norm_sqr(set.alpha(region), i - 1, n) * row_norm_sqr(set.beta(region), i - 1, n)).sqrt()
}

/// `corr(n_l, n′_k)` or `corr(n_l, n̄′_k)` on a rectangular index grid.
pub fn vacuum_correlation(
    set: &BogoliubovSet,
    channel: CorrelationChannel,
    l_range: (usize, usize),
    k_range: (usize, usize),
) -> Result<CorrelationGrid> {
    for (lo, hi) in [l_range, k_range] {
        if lo == 0 || lo > hi || hi > set.n_local() {
            return Err(Error::domain(format!(
                "correlation index range ({lo}, {hi}) outside 1..={}",
                set.n_local()
            )));
        }
    }
    let ls: Vec<usize> = (l_range.0..=l_range.1).collect();
    let ks: Vec<usize> = (k_range.0..=k_range.1).collect();
    let left: Vec<f64> = ls.iter().map(|&l| number_spread(set, Region::Left, l)).collect();
    let right: Vec<f64> = ks.iter().map(|&k| number_spread(set, Region::Right, k)).collect();
    let cells: Vec<(usize, usize)> = (0..ls.len()).flat_map(|a| (0..ks.len()).map(move |b| (a, b))).collect();
    let covs = cells
        .par_iter()
        .map(|&(a, b)| number_covariance(set, channel, ls[a], ks[b]))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Array2::zeros((ls.len(), ks.len()));
    let mut flagged = Vec::new();
    let mut residue: f64 = 0.0;
    for (&(a, b), c) in cells.iter().zip(covs) {
        let norm = left[a] * right[b];
        if !(norm > 0.0) {
            flagged.push((ls[a], ks[b]));
            continue;
        }
        residue = residue.max(c.im.abs() / norm);
        values[[a, b]] = c.re / norm;
    }
    Ok(CorrelationGrid {
        channel,
        l_range,
        k_range,
        values,
        flagged,
        max_imag_residue: residue,
        config: set.config,
    })
}

/// `⟨φ_l| n′_k |φ_l⟩ − ⟨0^G| n′_k |0^G⟩ = −cov(n_l, n′_k) / (1 − ⟨n_l⟩)` for
/// the state `φ_l ∝ a_l†|0^G⟩`.
pub fn strict_localization_defect(set: &BogoliubovSet, l: usize, k: usize) -> Result<f64> {
    let cov = number_covariance(set, CorrelationChannel::ParticleParticle, l, k)?;
    let n_l = row_norm_sqr(&set.beta, l - 1, set.n_global());
    Ok(-cov.re / (1.0 - n_l))
}

/// Path through the `(i, I)` plane along which `i·I·|β_{i,I}|²` is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitPath {
    /// `I = i`
    Diagonal,
    /// `I = i²`
    Quadratic,
}

impl LimitPath {
    pub fn global_index(self, i: usize) -> usize {
        match self {
            LimitPath::Diagonal => i,
            LimitPath::Quadratic => i * i,
        }
    }
}

/// Samples of the Abel term `i·I·|β_{i,I}|²` along one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub path: LimitPath,
    /// `(i, I, i·I·|β_{i,I}|²)`
    pub points: Vec<(usize, usize, f64)>,
    /// Strictly decreasing samples ending below half the first one.
    pub vanishing: bool,
    /// Maxima over consecutive windows (diagonal path only).
    pub window_maxima: Vec<f64>,
    /// Calibrated positive floor for the window maxima (diagonal path only).
    pub floor: Option<f64>,
    /// Every window maximum exceeds the floor.
    pub bounded_below: bool,
}

/// Consecutive `i` values per window in the diagonal-path test.
pub const DIAGONAL_WINDOW: usize = 50;

/// Large-index form of `i·I·|β_{i,I}|²` for the left region (`R = 1`):
/// `(r/π²)·cos²((2I−1)πr/2)·iI·(1/(rI + i) + 1/(iI))²`.
pub fn abel_leading_term(r: f64, i: usize, big_i: usize) -> f64 {
    let (fi, fj) = (i as f64, big_i as f64);
    let c = ((2.0 * fj - 1.0) * PI * r / 2.0).cos();
    let bracket = 1.0 / (r * fj + fi) + 1.0 / (fi * fj);
    r / (PI * PI) * c * c * fi * fj * bracket * bracket
}

/// Evaluates `i·I·|β_{i,I}|²` on a path, computing each coefficient on demand.
///
/// For the diagonal path `i_values` are grouped into windows of
/// [`DIAGONAL_WINDOW`] consecutive entries; the floor is half of the smallest
/// window maximum of [`abel_leading_term`].
pub fn inequivalence_diagnostic(config: &FieldConfig, path: LimitPath, i_values: &[usize]) -> Result<PathReport> {
    config.validate()?;
    if i_values.is_empty() || i_values.contains(&0) {
        return Err(Error::domain("path indices must be a non-empty list of positive integers"));
    }
    let points = i_values
        .par_iter()
        .map(|&i| {
            let big_i = path.global_index(i);
            let b = coefficient_on_demand(config, Region::Left, CoefficientKind::Beta, i, big_i)?;
            Ok((i, big_i, (i * big_i) as f64 * b.norm_sqr()))
        })
        .collect::<Result<Vec<_>>>()?;
    let vanishing = points.windows(2).all(|w| w[1].2 < w[0].2)
        && points.len() >= 2
        && points.last().unwrap().2 < 0.5 * points[0].2;
    let (window_maxima, floor, bounded_below) = match path {
        LimitPath::Quadratic => (Vec::new(), None, false),
        LimitPath::Diagonal => {
            let r = config.split_fraction;
            let maxima: Vec<f64> = points
                .chunks(DIAGONAL_WINDOW)
                .map(|c| c.iter().map(|p| p.2).fold(0.0, f64::max))
                .collect();
            let floor = 0.5
                * points
                    .chunks(DIAGONAL_WINDOW)
                    .map(|c| c.iter().map(|p| abel_leading_term(r, p.0, p.1)).fold(0.0, f64::max))
                    .fold(f64::INFINITY, f64::min);
            let bounded = floor > 0.0 && maxima.iter().all(|&m| m > floor);
            (maxima, Some(floor), bounded)
        }
    };
    Ok(PathReport {
        path,
        points,
        vanishing,
        window_maxima,
        floor,
        bounded_below,
    })
}

/// `Σ_{i,I≤N} (|β_{i,I}|² + |β′_{i,I}|²)` over growing squares.
pub fn hilbert_schmidt_partials(set: &BogoliubovSet, cutoffs: &[usize]) -> Result<SeriesReport> {
    let limit = set.n_local().min(set.n_global());
    if cutoffs.iter().any(|&n| n == 0 || n > limit) {
        return Err(Error::domain(format!("Hilbert–Schmidt cutoffs must lie in 1..={limit}")));
    }
    let partial = cutoffs
        .iter()
        .map(|&n| {
            let mut terms: Vec<f64> = (0..n)
                .flat_map(|i| (0..n).flat_map(move |k| [(i, k, false), (i, k, true)]))
                .map(|(i, k, primed)| if primed { set.beta_prime[[i, k]] } else { set.beta[[i, k]] }.norm_sqr())
                .collect();
            (n, sum_by_magnitude(&mut terms))
        })
        .collect();
    SeriesReport::from_partials(partial)
}

/// Row and column series of `|β|² + |β′|²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSeriesReports {
    /// `Σ_i` at fixed `I`, worst case over the tested `I`.
    pub over_local: SeriesReport,
    /// `Σ_I` at fixed `i`, worst case over the tested `i`.
    pub over_global: SeriesReport,
    /// Largest `Σ_i (|β_{i,I}|² + |β′_{i,I}|²)` over all `I`.
    pub max_column_sum: f64,
}

fn halving_cutoffs(n: usize) -> Vec<usize> {
    let mut c: Vec<usize> = (0..4).map(|k| n >> k).filter(|&v| v > 0).collect();
    c.reverse();
    c.dedup();
    c
}

/// Partial sums of the single series at cutoffs `n/8, n/4, n/2, n`; each
/// reported partial sum is the largest over the first `tested` fixed indices.
pub fn single_series_convergence(set: &BogoliubovSet, tested: usize) -> Result<SingleSeriesReports> {
    let (nl, ng) = (set.n_local(), set.n_global());
    if tested == 0 || tested > nl.min(ng) {
        return Err(Error::domain(format!("tested must lie in 1..={}", nl.min(ng))));
    }
    let (b, bp) = (&set.beta, &set.beta_prime);
    let col = |k: usize, n: usize| {
        let mut t: Vec<f64> = (0..n).flat_map(|i| [b[[i, k]].norm_sqr(), bp[[i, k]].norm_sqr()]).collect();
        sum_by_magnitude(&mut t)
    };
    let row = |i: usize, n: usize| {
        let mut t: Vec<f64> = (0..n).flat_map(|k| [b[[i, k]].norm_sqr(), bp[[i, k]].norm_sqr()]).collect();
        sum_by_magnitude(&mut t)
    };
    let worst = |cut: Vec<usize>, f: &(dyn Fn(usize, usize) -> f64 + Sync)| -> Result<SeriesReport> {
        // classify on the worst-case tail: the index whose last increment is largest
        let per_index: Vec<Vec<(usize, f64)>> = (0..tested)
            .into_par_iter()
            .map(|idx| cut.iter().map(|&n| (n, f(idx, n))).collect())
            .collect();
        let pick = per_index
            .into_iter()
            .max_by(|x, y| {
                let dx = x.last().unwrap().1 - x[x.len().saturating_sub(2)].1;
                let dy = y.last().unwrap().1 - y[y.len().saturating_sub(2)].1;
                dx.total_cmp(&dy)
            })
            .unwrap();
        SeriesReport::from_partials(pick)
    };
    let over_local = worst(halving_cutoffs(nl), &col)?;
    let over_global = worst(halving_cutoffs(ng), &row)?;
    let max_column_sum = (0..ng).into_par_iter().map(|k| col(k, nl)).reduce(|| 0.0, f64::max);
    Ok(SingleSeriesReports {
        over_local,
        over_global,
        max_column_sum,
    })
}

/// `Σ_J (|α_{i,J}|² N_J + |β_{i,J}|² (1 − N̄_J))`: the norm of `a_i` acting
/// on a global Fock state with particle occupations `N_J` and antiparticle
/// occupations `N̄_J`. Patterns shorter than the truncation are padded with
/// zeros.
pub fn pauli_bound(set: &BogoliubovSet, region: Region, i: usize, particles: &[bool], antiparticles: &[bool]) -> Result<f64> {
    check_region_index(set, i)?;
    let (a, b) = (set.alpha(region), set.beta(region));
    let mut terms: Vec<f64> = (0..set.n_global())
        .map(|k| {
            let np = particles.get(k).copied().unwrap_or(false) as u8 as f64;
            let na = antiparticles.get(k).copied().unwrap_or(false) as u8 as f64;
            a[[i - 1, k]].norm_sqr() * np + b[[i - 1, k]].norm_sqr() * (1.0 - na)
        })
        .collect();
    Ok(sum_by_magnitude(&mut terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_series_is_flagged_divergent() {
        let partial: Vec<_> = [500, 1000, 2000, 4000]
            .iter()
            .map(|&n| (n, (1..=n).map(|k| 1.0 / k as f64).sum::<f64>()))
            .collect();
        let r = SeriesReport::from_partials(partial).unwrap();
        assert!(r.diverges && !r.converges);
    }

    #[test]
    fn inverse_square_series_is_flagged_convergent() {
        let partial: Vec<_> = [100, 200, 400, 800]
            .iter()
            .map(|&n| (n, (1..=n).map(|k| 1.0 / (k * k) as f64).sum::<f64>()))
            .collect();
        let r = SeriesReport::from_partials(partial).unwrap();
        assert!(r.converges && !r.diverges);
        assert!((r.extrapolated_value.unwrap() - PI * PI / 6.0).abs() < 1e-5);
    }

    #[test]
    fn cutoffs_must_increase() {
        assert!(SeriesReport::from_partials(vec![(2, 1.0), (2, 1.5)]).is_err());
    }

    #[test]
    fn temperature_of_zero_occupation_is_zero() {
        let t = effective_temperature(&[0.0], &[3.0]).unwrap();
        assert_eq!(t.values, vec![0.0]);
    }

    #[test]
    fn fermi_dirac_input_returns_its_temperature() {
        let w: Vec<f64> = (1..=40).map(|k| 0.37 * k as f64).collect();
        let n: Vec<f64> = w.iter().map(|w| 1.0 / ((w / 2.0).exp() + 1.0)).collect();
        let t = effective_temperature(&n, &w).unwrap();
        assert!(t.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!(t.flagged.is_empty());
    }

    #[test]
    fn half_filling_is_flagged_not_clamped() {
        let t = effective_temperature(&[0.5, 0.7], &[1.0, 1.0]).unwrap();
        assert_eq!(t.flagged, vec![0, 1]);
        assert!(t.values[1] < 0.0);
        assert!(effective_temperature(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn binned_slope_of_clean_power_law() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        let s = binned_loglog_slope(&xs, &ys, 20).unwrap();
        assert!((s + 1.5).abs() < 0.05, "{s}");
    }

    #[test]
    fn leading_term_at_a_cosine_peak() {
        // r = 2/3, I = 5: (2I − 1)πr/2 = 3π, so cos² = 1
        let r = 2.0 / 3.0;
        let v = abel_leading_term(r, 5, 5);
        let expected = r / (PI * PI) * 25.0 * (1.0 / (5.0 * r + 5.0) + 1.0 / 25.0).powi(2);
        assert!((v - expected).abs() < 1e-15);
    }
}
