//! Sweep axes and the six figure presets.

use std::fmt;
use std::str::FromStr;

use dtunnel_core::DimensionlessConfig;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Eps,
    Theta,
    Gamma,
    Z,
    V,
    R,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Eps => "eps",
            Param::Theta => "theta",
            Param::Gamma => "gamma",
            Param::Z => "z",
            Param::V => "v",
            Param::R => "r",
        }
    }

    pub fn set(self, cfg: &mut DimensionlessConfig, x: f64) {
        match self {
            Param::Eps => cfg.eps = x,
            Param::Theta => cfg.theta = x,
            Param::Gamma => cfg.gamma = x,
            Param::Z => cfg.z = x,
            Param::V => cfg.v = x,
            Param::R => cfg.r = x,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "eps" => Param::Eps,
            "theta" => Param::Theta,
            "gamma" => Param::Gamma,
            "z" => Param::Z,
            "v" => Param::V,
            "r" => Param::R,
            _ => {
                return Err(CliError::Parse(format!(
                    "unknown axis parameter `{s}` (expected eps, theta, gamma, z, v or r)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    pub log: bool,
}

impl Axis {
    pub fn linear(param: Param, min: f64, max: f64, n_points: usize) -> Self {
        Self {
            param,
            min,
            max,
            n_points,
            log: false,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    return self.max;
                }
                let f = k as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n_points < 2 {
            return Err(CliError::Parse(format!("axis {} needs at least 2 points", self.param)));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(CliError::Parse(format!("axis {} has a non-finite range", self.param)));
        }
        if self.log && !(self.min > 0.0 && self.max > 0.0) {
            return Err(CliError::Parse(format!("log axis {} needs a positive range", self.param)));
        }
        Ok(())
    }
}

impl FromStr for Axis {
    type Err = CliError;

    /// `name:min:max:n` with an optional `:log` or `:lin` suffix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(CliError::Parse(format!("axis `{s}`: expected name:min:max:n[:log]")));
        }
        let bad = |what: &str| CliError::Parse(format!("axis `{s}`: bad {what}"));
        let axis = Axis {
            param: parts[0].parse()?,
            min: parts[1].parse().map_err(|_| bad("min"))?,
            max: parts[2].parse().map_err(|_| bad("max"))?,
            n_points: parts[3].parse().map_err(|_| bad("point count"))?,
            log: match parts.get(4) {
                None | Some(&"lin") => false,
                Some(&"log") => true,
                Some(_) => return Err(bad("scale")),
            },
        };
        axis.validate()?;
        Ok(axis)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: DimensionlessConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.axis1.param == self.axis2.param {
            return Err(CliError::Parse(format!(
                "both axes sweep `{}`",
                self.axis1.param
            )));
        }
        Ok(())
    }

    /// Configurations in output order (`axis1` outer).
    pub fn points(&self) -> Vec<(f64, f64, DimensionlessConfig)> {
        let v2 = self.axis2.values();
        let mut out = Vec::with_capacity(self.axis1.n_points * v2.len());
        for a in self.axis1.values() {
            for &b in &v2 {
                let mut cfg = self.fixed;
                self.axis1.param.set(&mut cfg, a);
                self.axis2.param.set(&mut cfg, b);
                out.push((a, b, cfg));
            }
        }
        out
    }
}

/// Default points per axis for presets.
pub const PRESET_POINTS: usize = 41;
/// Fraction of the ε window trimmed from each end.
pub const EDGE_MARGIN: f64 = 0.02;

fn eps_axis(gamma: f64) -> Axis {
    let (lo, hi) = DimensionlessConfig::eps_window(gamma);
    let pad = EDGE_MARGIN * (hi - lo);
    Axis::linear(Param::Eps, lo + pad, hi - pad, PRESET_POINTS)
}

fn theta_axis() -> Axis {
    Axis::linear(Param::Theta, 1.0, 10.0, PRESET_POINTS)
}

fn base(z: f64, v: f64, r: f64, gamma: f64) -> DimensionlessConfig {
    DimensionlessConfig {
        z,
        v,
        eps: f64::NAN,
        r,
        gamma,
        theta: 1.0,
    }
}

/// Figure presets 1-6.
///
/// Figs. 3 and 4 sweep `(ε, γ)` at `θ = 1`. The rectangle
/// `γ ∈ [0.01, 0.45]`, `ε ∈ [0.46, 0.99]` lies inside the window for every
/// `γ` on the axis.
pub fn preset(fig: u8) -> Result<SweepSpec, CliError> {
    let (fixed, axis1, axis2) = match fig {
        1 => (base(-3.0, -0.5, 0.5, 0.0), eps_axis(0.0), theta_axis()),
        2 => (base(-3.0, -0.5, 0.1, 0.0), eps_axis(0.0), theta_axis()),
        3 | 4 => {
            let fixed = if fig == 3 {
                base(-3.0, -0.5, 0.3, f64::NAN)
            } else {
                base(-9.0, -0.9, 0.3, f64::NAN)
            };
            (
                fixed,
                Axis::linear(Param::Eps, 0.46, 0.99, PRESET_POINTS),
                Axis::linear(Param::Gamma, 0.01, 0.45, PRESET_POINTS),
            )
        }
        5 => (base(-3.0, -0.5, 0.5, 7.99), eps_axis(7.99), theta_axis()),
        6 => (base(-9.0, -0.9, 0.5, 0.97), eps_axis(0.97), theta_axis()),
        _ => return Err(CliError::Parse(format!("--fig must be 1-6, got {fig}"))),
    };
    Ok(SweepSpec {
        axis1,
        axis2,
        fixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_and_values() {
        let a: Axis = "eps:0.1:0.9:5".parse().unwrap();
        assert_eq!(a.values(), vec![0.1, 0.30000000000000004, 0.5, 0.7000000000000001, 0.9]);
        let l: Axis = "theta:1:100:3:log".parse().unwrap();
        let v = l.values();
        assert!((v[1] - 10.0).abs() < 1e-12 && v[2] == 100.0);
        assert!("eps:0:1:1".parse::<Axis>().is_err());
        assert!("foo:0:1:3".parse::<Axis>().is_err());
        assert!("theta:0:1:3:log".parse::<Axis>().is_err());
    }

    #[test]
    fn presets_are_inside_their_windows() {
        for fig in 1..=6 {
            let spec = preset(fig).unwrap();
            spec.validate().unwrap();
            for (_, _, cfg) in spec.points() {
                cfg.validate().unwrap_or_else(|e| panic!("fig {fig}: {e}"));
            }
        }
        assert!(preset(7).is_err());
    }

    #[test]
    fn fig5_window() {
        let spec = preset(5).unwrap();
        let (lo, hi) = DimensionlessConfig::eps_window(7.99);
        assert!(spec.axis1.min > lo && spec.axis1.max < hi);
        assert!((hi - 8.052_33).abs() < 1e-5);
    }
}
