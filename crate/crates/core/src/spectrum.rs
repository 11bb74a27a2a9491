//! Wavenumbers of the MIT-bag cavity.
//!
//! On an interval of length `L` the allowed wavenumbers are the positive
//! solutions of `m·sin(PL) + P·cos(PL) = 0`, the pole-free form of
//! `tan(PL) = −P/m`. The `I`-th root lies in `((I−½)π/L, Iπ/L)`.
//!
//! Writing `PL = Iπ − θ` with `θ ∈ (0, π/2]` turns the condition into
//! `m·sin θ = P·cos θ`, i.e. `θ = arctan(P/m) = 2Δ`. The solver bisects on `θ`:
//! the trigonometric functions are then evaluated at an `O(1)` argument, which
//! keeps the residual at the `ε·P` level even for roots with `PL ~ 10³`
//! (evaluating `cos(PL)` directly there loses about `ε·PL` absolute accuracy).

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Iteration cap for the bisection.
pub const MAX_BISECTIONS: usize = 200;

/// Ordered positive wavenumbers `P_1 < P_2 < …` for one interval length.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberTable {
    length: f64,
    mass: f64,
    roots: Vec<f64>,
    /// `θ_I = Iπ − P_I·L`, kept alongside the roots for exact residuals.
    phases: Vec<f64>,
}

impl WavenumberTable {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// `P_index` with a 1-based index.
    pub fn root(&self, index: usize) -> f64 {
        self.roots[index - 1]
    }

    pub fn omega(&self, index: usize) -> f64 {
        dispersion(self.root(index), self.mass)
    }

    pub fn delta(&self, index: usize) -> f64 {
        self.phases[index - 1] / 2.0
    }

    /// Residual of the spectrum condition at root `index`, evaluated in the
    /// phase-reduced form (equal in exact arithmetic to
    /// `|m·sin(PL) + P·cos(PL)|`).
    pub fn residual(&self, index: usize) -> f64 {
        reduced_residual(self.mass, self.length, index, self.phases[index - 1]).abs()
    }

    /// Residual evaluated naively as `|m·sin(PL) + P·cos(PL)|`.
    pub fn direct_residual(&self, index: usize) -> f64 {
        let p = self.root(index);
        (self.mass * (p * self.length).sin() + p * (p * self.length).cos()).abs()
    }
}

/// `ω = √(p² + m²)`.
pub fn dispersion(p: f64, mass: f64) -> f64 {
    p.hypot(mass)
}

/// `Δ = arctan(p / (ω + m))`.
pub fn phase_delta(p: f64, mass: f64) -> Result<f64> {
    if p == 0.0 && mass == 0.0 {
        return Err(Error::domain("phase_delta is undefined at p = m = 0"));
    }
    Ok((p / (dispersion(p, mass) + mass)).atan())
}

/// `(−1)^{I+1}·(m·sin(PL) + P·cos(PL))` written in terms of `θ = Iπ − PL`.
fn reduced_residual(mass: f64, length: f64, index: usize, theta: f64) -> f64 {
    let p = (index as f64 * PI - theta) / length;
    mass * theta.sin() - p * theta.cos()
}

fn solve_one(mass: f64, length: f64, index: usize, tol: f64) -> Result<f64> {
    if mass == 0.0 {
        return Ok(FRAC_PI_2);
    }
    // g(0) = −Iπ/L < 0, g(π/2) = m > 0. Bisect until the bracket collapses
    // onto adjacent doubles (about 55 halvings), then judge the residual.
    let (mut lo, mut hi) = (0.0_f64, FRAC_PI_2);
    let mut best = (f64::INFINITY, FRAC_PI_2);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = reduced_residual(mass, length, index, mid);
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // A residual above `tol` is still accepted when it sits at the rounding
    // floor of its own evaluation.
    let p = (index as f64 * PI - best.1) / length;
    let floor = 8.0 * f64::EPSILON * (mass + p + index as f64 * PI / length);
    if best.0 < tol || best.0 <= floor {
        return Ok(best.1);
    }
    let to_p = |theta: f64| (index as f64 * PI - theta) / length;
    Err(Error::SolverFailure {
        index,
        lo: to_p(hi),
        hi: to_p(lo),
        residual: best.0,
    })
}

/// The single root `P_index` (1-based) without building a table.
pub fn solve_root(mass: f64, length: f64, index: usize, tol: f64) -> Result<f64> {
    validate(mass, length, tol)?;
    if index == 0 {
        return Err(Error::domain("root index is 1-based"));
    }
    if mass == 0.0 {
        return Ok((index as f64 - 0.5) * PI / length);
    }
    let theta = solve_one(mass, length, index, tol)?;
    Ok((index as f64 * PI - theta) / length)
}

fn validate(mass: f64, length: f64, tol: f64) -> Result<()> {
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(Error::domain(format!("mass must be finite and >= 0, got {mass}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::domain(format!("length must be > 0, got {length}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tol must be > 0, got {tol}")));
    }
    Ok(())
}

/// First `count` positive roots of `m·sin(PL) + P·cos(PL) = 0`.
///
/// For `mass = 0` the closed form `(I−½)π/L` is returned.
pub fn solve_spectrum(mass: f64, length: f64, count: usize, tol: f64) -> Result<WavenumberTable> {
    validate(mass, length, tol)?;
    if count == 0 {
        return Err(Error::domain("count must be >= 1"));
    }
    let phases = (1..=count)
        .into_par_iter()
        .map(|index| solve_one(mass, length, index, tol))
        .collect::<Result<Vec<_>>>()?;
    let roots = if mass == 0.0 {
        (1..=count)
            .map(|index| (index as f64 - 0.5) * PI / length)
            .collect()
    } else {
        phases
            .iter()
            .enumerate()
            .map(|(k, theta)| ((k + 1) as f64 * PI - theta) / length)
            .collect()
    };
    Ok(WavenumberTable {
        length,
        mass,
        roots,
        phases,
    })
}
