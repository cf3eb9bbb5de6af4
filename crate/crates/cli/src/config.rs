use std::path::Path;

use dtunnel_core::model::{dimensionless_to_dimensional_unchecked, ConstraintReport};
use dtunnel_core::{DimensionlessConfig, ModelParams, Units};
use serde::{Deserialize, Serialize};

use crate::args::{parse_units, Format, PhysicsArgs};
use crate::error::{CliError, CliResult};

/// Contents of a `--config` file. Keys mirror the long flag names with
/// `_` in place of `-`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub z: Option<f64>,
    pub v: Option<f64>,
    pub eps: Option<f64>,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub units: Option<String>,
    pub strict: Option<bool>,
    pub allow_violations: Option<bool>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub t_max: Option<f64>,
    pub n_steps: Option<usize>,
    pub backend: Option<String>,
    pub ode: Option<bool>,
    pub fp: Option<bool>,
    pub grid: Option<usize>,
    pub fig: Option<u8>,
    pub axis1: Option<String>,
    pub axis2: Option<String>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub cases: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("config file {}: {e}", path.display())))
    }
}

/// Physics fields after merging flags over the config file. Missing
/// fields stay `None`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PartialConfig {
    pub z: Option<f64>,
    pub v: Option<f64>,
    pub eps: Option<f64>,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
}

impl PartialConfig {
    pub fn overlay(self, base: &DimensionlessConfig) -> Self {
        Self {
            z: self.z.or(Some(base.z)),
            v: self.v.or(Some(base.v)),
            eps: self.eps.or(Some(base.eps)),
            r: self.r.or(Some(base.r)),
            gamma: self.gamma.or(Some(base.gamma)),
            theta: self.theta.or(Some(base.theta)),
        }
    }

    /// `γ` defaults to 0 and `θ` to 1; the rest are required unless listed
    /// in `skip`, in which case they are filled with NaN.
    pub fn complete(&self, skip: &[&str]) -> CliResult<DimensionlessConfig> {
        let need = |name: &str, x: Option<f64>| match x {
            Some(x) => Ok(x),
            None if skip.contains(&name) => Ok(f64::NAN),
            None => Err(CliError::Parse(format!(
                "missing value for `{name}` (give the flag or a config-file key)"
            ))),
        };
        Ok(DimensionlessConfig {
            z: need("z", self.z)?,
            v: need("v", self.v)?,
            eps: need("eps", self.eps)?,
            r: need("r", self.r)?,
            gamma: self.gamma.unwrap_or(0.0),
            theta: self.theta.unwrap_or(1.0),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Physics {
    pub partial: PartialConfig,
    pub units: Units,
    pub strict: bool,
    pub allow_violations: bool,
}

pub fn merge_physics(args: &PhysicsArgs, file: &FileConfig) -> CliResult<Physics> {
    let units = match (&args.units, &file.units) {
        (Some(u), _) => *u,
        (None, Some(s)) => parse_units(s).map_err(|e| CliError::Parse(format!("units: {e}")))?,
        (None, None) => Units::default(),
    };
    Ok(Physics {
        partial: PartialConfig {
            z: args.z.or(file.z),
            v: args.v.or(file.v),
            eps: args.eps.or(file.eps),
            r: args.r.or(file.r),
            gamma: args.gamma.or(file.gamma),
            theta: args.theta.or(file.theta),
        },
        units,
        strict: args.strict || file.strict.unwrap_or(false),
        allow_violations: args.allow_violations || file.allow_violations.unwrap_or(false),
    })
}

/// Constraint report for the thermal coefficients of `cfg`, or `None`
/// when they are undefined (`ε ≤ γ`).
pub fn constraint_of(cfg: &DimensionlessConfig, units: Units) -> Option<ConstraintReport> {
    dimensionless_to_dimensional_unchecked(cfg, units)
        .ok()
        .map(|(p, _)| p.constraint())
}

/// Rejects a violated positivity constraint under `--strict`.
pub fn enforce_strict(strict: bool, report: Option<&ConstraintReport>) -> CliResult<()> {
    match report {
        Some(rep) if strict && !rep.satisfied => Err(CliError::Regime(format!(
            "diffusion coefficients violate the positivity constraint (margin {:e}); drop --strict to continue",
            rep.margin
        ))),
        _ => Ok(()),
    }
}

/// Fully resolved single-point configuration, as recorded in manifests.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    #[serde(flatten)]
    pub cfg: DimensionlessConfig,
    pub units: Units,
    pub strict: bool,
    pub allow_violations: bool,
}

pub fn params_for(cfg: &DimensionlessConfig, units: Units, allow: bool) -> CliResult<(ModelParams, dtunnel_core::GaussianState)> {
    if !allow {
        cfg.validate()?;
    }
    Ok(dimensionless_to_dimensional_unchecked(cfg, units)?)
}
