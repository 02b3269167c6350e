//! Run configuration: a JSON document plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::BuiltinLattice;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: String,
    pub d: usize,
    pub lambda: Option<f64>,
    /// Grid points per torus axis. `None` picks a size per subcommand.
    pub grid: Option<usize>,
    /// Tolerance for Fermi-surface membership and path residuals.
    pub tol: f64,
    /// Gradient tolerance used when refining threshold candidates.
    pub refine_tol: f64,
    /// Box radius for `ucp`, largest radius for `rellich-demo`.
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub amplitude: f64,
    pub seed: u64,
    /// `exhaustive` or `random` two-points search.
    pub mode: String,
    pub samples: usize,
    /// Strip half-width for `connect`.
    pub strip: f64,
    pub steps: usize,
    pub growth_depth: usize,
    pub decay_terms: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lattice: "square".into(),
            d: 2,
            lambda: None,
            grid: None,
            tol: 1e-8,
            refine_tol: 1e-10,
            radius: None,
            alpha: 1.0,
            amplitude: 0.5,
            seed: 1,
            mode: "exhaustive".into(),
            samples: 10_000,
            strip: 1.0,
            steps: 1000,
            growth_depth: 10,
            decay_terms: 400,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> Result<BuiltinLattice> {
        self.lattice.parse()
    }

    pub fn lambda_required(&self) -> Result<f64> {
        self.lambda
            .ok_or_else(|| Error::InvalidParameter("this subcommand needs --lambda".into()))
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        if kind.has_free_dimension() && self.d < 2 {
            return Err(Error::DimensionTooSmall {
                name: self.lattice.clone(),
                d: self.d,
            });
        }
        let positive = [
            ("tol", self.tol),
            ("refine_tol", self.refine_tol),
            ("alpha", self.alpha),
            ("strip", self.strip),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "C must be non-negative, got {}",
                self.amplitude
            )));
        }
        if let Some(g) = self.grid {
            if g < 16 {
                return Err(Error::InvalidParameter(format!(
                    "grid must be at least 16, got {g}"
                )));
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "R must be positive, got {r}"
                )));
            }
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "lambda must be finite, got {l}"
                )));
            }
        }
        match self.mode.as_str() {
            "exhaustive" | "random" => {}
            m => return Err(Error::InvalidParameter(format!("unknown mode `{m}`"))),
        }
        if self.samples == 0 || self.steps == 0 || self.decay_terms == 0 {
            return Err(Error::InvalidParameter(
                "samples, steps and decay_terms must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn partial_document_fills_defaults() {
        let c = RunConfig::from_json(r#"{"lattice": "kagome", "R": 2.5, "C": 0.1}"#).unwrap();
        assert_eq!(c.lattice, "kagome");
        assert_eq!(c.radius, Some(2.5));
        assert_eq!(c.amplitude, 0.1);
        assert_eq!(c.seed, 1);
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(RunConfig::from_json(r#"{"latice": "square"}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.grid = Some(8);
        assert!(c.validate().is_err());
        c = RunConfig {
            tol: 0.0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c = RunConfig {
            lattice: "cubic".into(),
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::UnknownLattice(_))));
        c = RunConfig {
            d: 1,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::DimensionTooSmall { .. })));
    }

    proptest! {
        #[test]
        fn round_trips(
            d in 2usize..5,
            lambda in proptest::option::of(-2.0f64..2.0),
            grid in proptest::option::of(16usize..300),
            tol in 1e-14f64..1e-2,
            seed in any::<u64>(),
            r in proptest::option::of(0.5f64..40.0),
        ) {
            let c = RunConfig { d, lambda, grid, tol, seed, radius: r, ..RunConfig::default() };
            let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
