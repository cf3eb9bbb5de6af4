//! Physical parameters, thermal-bath diffusion coefficients and the
//! dimensionless parameterization used for penetrability surfaces.
//!
//! Temperature is carried as `θ = coth(ħω/2kT)` throughout, with `θ = 1`
//! meaning zero temperature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::state::GaussianState;

/// Relative margin applied to the strict inequalities of the admissible
/// windows (`γ < ε < √(1+γ²)`, `0 < ε < 1`).
pub const WINDOW_MARGIN: f64 = 1e-9;

/// Unit system. The default is `m = ω = ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
        }
    }
}

impl Units {
    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("omega", self.omega)?;
        positive("hbar", self.hbar)
    }
}

/// Hamiltonian and environment coefficients of the master equation.
///
/// Fields are public so that synthetic configurations (zero dissipation,
/// zero diffusion) can be built for oracle tests; [`ModelParams::validate`]
/// enforces the physical invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mass: f64,
    pub omega: f64,
    pub lambda: f64,
    pub mu: f64,
    pub hbar: f64,
    pub d_qq: f64,
    pub d_pp: f64,
    pub d_pq: f64,
}

impl ModelParams {
    /// Parameters with Gibbs-state (thermal bath) diffusion coefficients.
    pub fn thermal(units: Units, lambda: f64, mu: f64, theta: f64) -> Result<Self> {
        let (d_pp, d_qq, d_pq) =
            thermal_coefficients(units.mass, units.omega, lambda, mu, units.hbar, theta)?;
        let params = Self {
            mass: units.mass,
            omega: units.omega,
            lambda,
            mu,
            hbar: units.hbar,
            d_qq,
            d_pp,
            d_pq,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks `m, ω, ħ, λ > 0` and `D_qq, D_pp > 0`.
    pub fn validate(&self) -> Result<()> {
        self.units().validate()?;
        positive("lambda", self.lambda)?;
        finite("mu", self.mu)?;
        positive("d_qq", self.d_qq)?;
        positive("d_pp", self.d_pp)?;
        finite("d_pq", self.d_pq)
    }

    pub fn units(&self) -> Units {
        Units {
            mass: self.mass,
            omega: self.omega,
            hbar: self.hbar,
        }
    }

    /// `ν = √(ω² + μ²)`.
    pub fn nu(&self) -> f64 {
        self.omega.hypot(self.mu)
    }

    pub fn has_diffusion(&self) -> bool {
        self.d_qq != 0.0 || self.d_pp != 0.0 || self.d_pq != 0.0
    }

    pub fn constraint(&self) -> ConstraintReport {
        check_positivity_constraint(self)
    }
}

/// Relative round-off allowed when testing the positivity constraint.
pub const CONSTRAINT_ROUNDOFF: f64 = 1e-12;

/// Outcome of the complete-positivity check
/// `D_pp D_qq − D_pq² ≥ λ²ħ²/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub satisfied: bool,
    /// `D_pp D_qq − D_pq² − λ²ħ²/4`.
    pub margin: f64,
}

pub fn check_positivity_constraint(params: &ModelParams) -> ConstraintReport {
    let bound = 0.25 * params.lambda * params.lambda * params.hbar * params.hbar;
    let margin = params.d_pp * params.d_qq - params.d_pq * params.d_pq - bound;
    ConstraintReport {
        // the zero-temperature, μ = 0 bath sits exactly on the boundary
        satisfied: margin >= -CONSTRAINT_ROUNDOFF * bound,
        margin,
    }
}

/// Diffusion coefficients `(D_pp, D_qq, D_pq)` for which the asymptotic
/// state of a harmonic oscillator is the Gibbs state at temperature `θ`.
pub fn thermal_coefficients(
    mass: f64,
    omega: f64,
    lambda: f64,
    mu: f64,
    hbar: f64,
    theta: f64,
) -> Result<(f64, f64, f64)> {
    Units { mass, omega, hbar }.validate()?;
    finite("lambda", lambda)?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(invalid("mu", format!("must be finite and ≥ 0, got {mu}")));
    }
    if !(lambda > mu) {
        return Err(invalid(
            "lambda",
            format!("thermal coefficients require λ > μ (λ = {lambda}, μ = {mu})"),
        ));
    }
    check_theta(theta)?;
    let d_pp = 0.5 * (lambda + mu) * hbar * mass * omega * theta;
    let d_qq = 0.5 * (lambda - mu) * hbar / (mass * omega) * theta;
    Ok((d_pp, d_qq, 0.0))
}

/// Thermal bath, stored through `θ = coth(ħω/2kT) ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub theta: f64,
}

impl BathSpec {
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { theta })
    }

    pub fn zero_temperature() -> Self {
        Self { theta: 1.0 }
    }

    pub fn from_kt(hbar: f64, omega: f64, kt: f64) -> Result<Self> {
        Self::new(theta_from_kt(hbar, omega, kt)?)
    }
}

/// `coth(ħω/2kT)`, with `kT = 0` mapping to 1.
pub fn theta_from_kt(hbar: f64, omega: f64, kt: f64) -> Result<f64> {
    if !(kt >= 0.0) || !kt.is_finite() {
        return Err(invalid("kT", format!("must be finite and ≥ 0, got {kt}")));
    }
    if kt == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (hbar * omega / (2.0 * kt)).tanh())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 1.0) || !theta.is_finite() {
        return Err(invalid("theta", format!("coth factor must be ≥ 1, got {theta}")));
    }
    Ok(())
}

/// Scaled variables of a tunneling configuration.
///
/// * `z = σ_q(0)/√σ_qq(0)`: initial position
/// * `v = σ_p(0)/(mω σ_q(0))`: initial momentum
/// * `eps = λ/ω`: dissipation
/// * `r = √(ħ/2mω)/√σ_qq(0)`: inverse packet width
/// * `gamma = μ/ω`
/// * `theta = coth(ħω/2kT)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessConfig {
    pub z: f64,
    pub v: f64,
    pub eps: f64,
    pub r: f64,
    pub gamma: f64,
    pub theta: f64,
}

impl DimensionlessConfig {
    /// Admissible `ε` interval for this `γ` (open at both ends).
    pub fn eps_window(gamma: f64) -> (f64, f64) {
        if gamma == 0.0 {
            (0.0, 1.0)
        } else {
            (gamma, (1.0 + gamma * gamma).sqrt())
        }
    }

    /// Checks field ranges without the `ε` window.
    pub fn validate_fields(&self) -> Result<()> {
        finite("z", self.z)?;
        finite("v", self.v)?;
        finite("eps", self.eps)?;
        positive("r", self.r)?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma", format!("must be finite and ≥ 0, got {}", self.gamma)));
        }
        check_theta(self.theta)
    }

    /// Checks all fields and the regime window (`0 < ε < 1` for `γ = 0`,
    /// `γ < ε < √(1+γ²)` otherwise).
    pub fn validate(&self) -> Result<()> {
        self.validate_fields()?;
        let (lo, hi) = Self::eps_window(self.gamma);
        let inside = if self.gamma == 0.0 {
            self.eps > WINDOW_MARGIN && self.eps < hi * (1.0 - WINDOW_MARGIN)
        } else {
            self.eps > lo * (1.0 + WINDOW_MARGIN) && self.eps < hi * (1.0 - WINDOW_MARGIN)
        };
        if inside {
            Ok(())
        } else if self.gamma == 0.0 {
            Err(Error::RegimeViolation(format!(
                "for γ = 0 the scaled dissipation must satisfy 0 < ε < 1, got ε = {}",
                self.eps
            )))
        } else {
            Err(Error::RegimeViolation(format!(
                "for γ = {} the scaled dissipation must satisfy {} < ε < {}, got ε = {}",
                self.gamma, lo, hi, self.eps
            )))
        }
    }

    /// `γ + √(1+γ²) = (μ+ν)/ω`.
    pub fn growth_factor(&self) -> f64 {
        self.gamma + (1.0 + self.gamma * self.gamma).sqrt()
    }
}

/// Builds dimensional parameters and the minimum-uncertainty initial state
/// for `cfg`, enforcing the regime window.
pub fn dimensionless_to_dimensional(
    cfg: &DimensionlessConfig,
    units: Units,
) -> Result<(ModelParams, GaussianState)> {
    cfg.validate()?;
    dimensionless_to_dimensional_unchecked(cfg, units)
}

/// As [`dimensionless_to_dimensional`] but without the `ε` window check.
/// Thermal coefficients still require `λ > μ`.
pub fn dimensionless_to_dimensional_unchecked(
    cfg: &DimensionlessConfig,
    units: Units,
) -> Result<(ModelParams, GaussianState)> {
    let state = initial_state(cfg, units)?;
    let params = ModelParams::thermal(units, cfg.eps * units.omega, cfg.gamma * units.omega, cfg.theta)?;
    Ok((params, state))
}

/// Minimum-uncertainty initial state of `cfg`; independent of the bath.
pub fn initial_state(cfg: &DimensionlessConfig, units: Units) -> Result<GaussianState> {
    cfg.validate_fields()?;
    units.validate()?;
    let Units { mass, omega, hbar } = units;
    let sigma_qq = hbar / (2.0 * mass * omega) / (cfg.r * cfg.r);
    let sigma_q = cfg.z * sigma_qq.sqrt();
    let sigma_p = cfg.v * mass * omega * sigma_q;
    Ok(GaussianState::coherent(sigma_q, sigma_p, sigma_qq, hbar))
}

/// Inverse of [`dimensionless_to_dimensional`]. `θ` is recovered from
/// `D_pp`, which assumes Gibbs-form coefficients. When `σ_q(0) = 0` the
/// scaled momentum is undefined and reported as 0.
pub fn dimensional_to_dimensionless(
    params: &ModelParams,
    state0: &GaussianState,
) -> Result<DimensionlessConfig> {
    params.units().validate()?;
    positive("sigma_qq", state0.sigma_qq)?;
    let Units { mass, omega, hbar } = params.units();
    let z = state0.sigma_q / state0.sigma_qq.sqrt();
    let v = if state0.sigma_q == 0.0 {
        0.0
    } else {
        state0.sigma_p / (mass * omega * state0.sigma_q)
    };
    let r = (hbar / (2.0 * mass * omega)).sqrt() / state0.sigma_qq.sqrt();
    let friction = params.lambda + params.mu;
    positive("lambda + mu", friction)?;
    let theta = params.d_pp / (0.5 * friction * hbar * mass * omega);
    Ok(DimensionlessConfig {
        z,
        v,
        eps: params.lambda / omega,
        r,
        gamma: params.mu / omega,
        theta,
    })
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

fn finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn thermal_coefficients_examples() {
        assert_eq!(
            thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 1.0).unwrap(),
            (0.25, 0.25, 0.0)
        );
        assert_eq!(
            thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 2.0).unwrap(),
            (0.5, 0.5, 0.0)
        );
        assert_eq!(
            thermal_coefficients(1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap(),
            (0.75, 0.25, 0.0)
        );
    }

    #[test]
    fn thermal_coefficients_rejects_bad_inputs() {
        assert!(thermal_coefficients(1.0, 1.0, 0.5, 0.5, 1.0, 1.0).is_err());
        assert!(thermal_coefficients(1.0, 1.0, 0.4, 0.5, 1.0, 1.0).is_err());
        assert!(thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 0.99).is_err());
        assert!(thermal_coefficients(1.0, 0.0, 0.5, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn positivity_constraint_examples() {
        let p = ModelParams::thermal(Units::default(), 0.5, 0.0, 1.0).unwrap();
        let rep = check_positivity_constraint(&p);
        assert!(rep.satisfied);
        assert_eq!(rep.margin, 0.0);

        let p = ModelParams::thermal(Units::default(), 1.0, 0.5, 1.0).unwrap();
        let rep = check_positivity_constraint(&p);
        assert!(!rep.satisfied);
        assert!(close(rep.margin, -0.0625, 1e-15));

        let p = ModelParams {
            mass: 1.0,
            omega: 1.0,
            lambda: 1.0,
            mu: 0.0,
            hbar: 1.0,
            d_qq: 1.0,
            d_pp: 1.0,
            d_pq: 0.0,
        };
        let rep = check_positivity_constraint(&p);
        assert!(rep.satisfied);
        assert_eq!(rep.margin, 0.75);
    }

    #[test]
    fn fig1_config_to_dimensional() {
        let cfg = DimensionlessConfig {
            z: -3.0,
            v: -0.5,
            eps: 0.5,
            r: 0.5,
            gamma: 0.0,
            theta: 1.0,
        };
        let (p, s) = dimensionless_to_dimensional(&cfg, Units::default()).unwrap();
        let sq2 = 2f64.sqrt();
        assert!(close(s.sigma_qq, 2.0, 1e-15));
        assert!(close(s.sigma_pp, 0.125, 1e-15));
        assert!(close(s.sigma_q, -3.0 * sq2, 1e-15));
        assert!(close(s.sigma_p, 1.5 * sq2, 1e-15));
        assert_eq!(s.sigma_pq, 0.0);
        assert_eq!(p.lambda, 0.5);
        assert_eq!(p.mu, 0.0);
    }

    #[test]
    fn zero_position_zeroes_first_moments() {
        let cfg = DimensionlessConfig {
            z: 0.0,
            v: 3.7,
            eps: 0.5,
            r: 1.0,
            gamma: 0.0,
            theta: 1.0,
        };
        let (_, s) = dimensionless_to_dimensional(&cfg, Units::default()).unwrap();
        assert_eq!(s.sigma_q, 0.0);
        assert_eq!(s.sigma_p, 0.0);
        assert_eq!(s.sigma_qq, 0.5);
    }

    #[test]
    fn window_is_enforced() {
        let mut cfg = DimensionlessConfig {
            z: -3.0,
            v: -0.5,
            eps: 1.2,
            r: 0.5,
            gamma: 0.0,
            theta: 1.0,
        };
        assert!(matches!(cfg.validate(), Err(Error::RegimeViolation(_))));
        cfg.eps = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::RegimeViolation(_))));
        cfg.gamma = 0.97;
        cfg.eps = 0.97;
        assert!(cfg.validate().is_err());
        cfg.eps = 1.2;
        assert!(cfg.validate().is_ok());
        cfg.eps = (1.0f64 + 0.97 * 0.97).sqrt();
        assert!(cfg.validate().is_err());
        cfg.r = 0.0;
        cfg.eps = 1.2;
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { name: "r", .. })));
    }

    #[test]
    fn theta_from_temperature() {
        assert_eq!(theta_from_kt(1.0, 1.0, 0.0).unwrap(), 1.0);
        let th = theta_from_kt(1.0, 1.0, 0.5).unwrap();
        assert!(close(th, 1.0 / 1f64.tanh(), 1e-15));
        assert!(theta_from_kt(1.0, 1.0, 1e6).unwrap() > 1e5);
        assert!(theta_from_kt(1.0, 1.0, -1.0).is_err());
    }
}
