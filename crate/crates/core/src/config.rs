//! Physical setup and numerical knobs shared by every stage.
//!
//! Lengths are measured in units of the cavity length `R` (so `R = 1`), and
//! the mass enters only through the dimensionless product `mR`.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    /// Dimensionless mass `mR`.
    #[serde(rename = "mass_times_R")]
    pub mass_times_r: f64,
    /// Position of the splitting point, `r/R`.
    pub split_fraction: f64,
    /// Number of local modes kept per region.
    pub n_local: usize,
    /// Number of global cavity modes kept.
    pub n_global: usize,
    pub root_tol: f64,
    pub quad_tol: f64,
    /// Relative threshold on `|Ω_I − ω_i| / Ω_I` below which the closed-form
    /// α coefficient is replaced by quadrature.
    pub degeneracy_tol: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            mass_times_r: 1.0,
            split_fraction: 0.3,
            n_local: 30,
            n_global: 3000,
            root_tol: 1e-12,
            quad_tol: 1e-10,
            degeneracy_tol: 1e-8,
        }
    }
}

impl FieldConfig {
    pub fn new(mass_times_r: f64, split_fraction: f64, n_local: usize, n_global: usize) -> Self {
        Self {
            mass_times_r,
            split_fraction,
            n_local,
            n_global,
            ..Self::default()
        }
    }

    pub fn with_truncation(mut self, n_local: usize, n_global: usize) -> Self {
        self.n_local = n_local;
        self.n_global = n_global;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass_times_r >= 0.0 && self.mass_times_r.is_finite()) {
            return Err(Error::domain(format!(
                "mass_times_R must be finite and >= 0, got {}",
                self.mass_times_r
            )));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::domain(format!(
                "split_fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if self.n_local == 0 || self.n_global == 0 {
            return Err(Error::domain("truncations n_local and n_global must be >= 1"));
        }
        for (name, tol) in [
            ("root_tol", self.root_tol),
            ("quad_tol", self.quad_tol),
            ("degeneracy_tol", self.degeneracy_tol),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::domain(format!("{name} must be > 0, got {tol}")));
            }
        }
        Ok(())
    }

    /// Length of the right sub-interval `[r, 1]`.
    pub fn right_length(&self) -> f64 {
        1.0 - self.split_fraction
    }

    /// Reads a JSON config; missing fields take their defaults.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: FieldConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        FieldConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let bad = [
            FieldConfig { split_fraction: 0.0, ..Default::default() },
            FieldConfig { split_fraction: 1.0, ..Default::default() },
            FieldConfig { mass_times_r: -0.1, ..Default::default() },
            FieldConfig { n_local: 0, ..Default::default() },
            FieldConfig { n_global: 0, ..Default::default() },
            FieldConfig { quad_tol: 0.0, ..Default::default() },
            FieldConfig { root_tol: -1e-12, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Domain(_))), "{cfg:?}");
        }
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: FieldConfig =
            serde_json::from_str(r#"{"mass_times_R": 0.5, "n_global": 400}"#).unwrap();
        assert_eq!(cfg.mass_times_r, 0.5);
        assert_eq!(cfg.n_global, 400);
        assert_eq!(cfg.split_fraction, 0.3);
    }

    #[test]
    fn unknown_json_field_is_rejected() {
        assert!(serde_json::from_str::<FieldConfig>(r#"{"mass": 1}"#).is_err());
    }
}
