//! Tunneling probability `P(t)`, the asymptotic penetrability, the
//! dimensionless closed forms and the initial-energy criterion.
//!
//! `P(t)` is the Gaussian mass to the right of the barrier top:
//! `P(t) = ½ erfc(−σ_q(t)/√(2σ_qq(t)))`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{DimensionlessConfig, ModelParams, Units};
use crate::propagator::{self, Regime};
use crate::special::half_erfc;
use crate::state::GaussianState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenetrabilityResult {
    /// Probability in `[0, 1]`; equals `½ erfc(argument)`.
    pub value: f64,
    /// The argument `x` of `½(1 − erf(x))`.
    pub argument: f64,
    pub regime: Option<Regime>,
    /// `value − P(0)`, when requested.
    pub net_adjusted: Option<f64>,
}

impl PenetrabilityResult {
    fn from_argument(argument: f64, regime: Option<Regime>) -> Self {
        Self {
            value: half_erfc(argument),
            argument,
            regime,
            net_adjusted: None,
        }
    }

    /// Subtracts the mass already beyond the barrier top at `t = 0`.
    pub fn with_net_adjustment(mut self, initial_tail: f64) -> Self {
        self.net_adjusted = Some(self.value - initial_tail);
        self
    }
}

fn argument_of(state: &GaussianState) -> Result<f64> {
    if !(state.sigma_qq > 0.0) {
        return Err(invalid(
            "sigma_qq",
            format!("position variance must be positive, got {}", state.sigma_qq),
        ));
    }
    Ok(-state.sigma_q / (2.0 * state.sigma_qq).sqrt())
}

/// Mass beyond `q = 0` at `t = 0`.
pub fn initial_tail(state0: &GaussianState) -> Result<f64> {
    Ok(half_erfc(argument_of(state0)?))
}

/// `P(t)` from the closed-form moments.
///
/// For `λ < ν` the moments are evaluated in the co-moving frame; the ratio
/// `σ_q/√σ_qq` is frame-independent, so `t` can exceed the point where the
/// bare moments overflow.
pub fn tunneling_probability_at(
    params: &ModelParams,
    state0: &GaussianState,
    t: f64,
) -> Result<PenetrabilityResult> {
    let kappa = (params.lambda - params.nu()).min(0.0);
    let state = propagator::propagate_scaled(params, state0, t, kappa)?;
    let regime = propagator::asymptotics(params, state0).ok().map(|a| a.regime);
    Ok(PenetrabilityResult::from_argument(argument_of(&state)?, regime))
}

/// `P(t)` from an already evolved state (any backend).
pub fn probability_of_state(state: &GaussianState) -> Result<f64> {
    Ok(half_erfc(argument_of(state)?))
}

/// Final penetrability `P = lim P(t)`: `½ erfc(−δ/√(2Δ))` for `λ < ν`,
/// `½` for `λ > ν`.
pub fn asymptotic_penetrability(
    params: &ModelParams,
    state0: &GaussianState,
) -> Result<PenetrabilityResult> {
    let summary = propagator::asymptotics(params, state0)?;
    match summary.regime {
        Regime::Stuck => Ok(PenetrabilityResult::from_argument(0.0, Some(Regime::Stuck))),
        Regime::Separatrix => Ok(PenetrabilityResult::from_argument(0.0, Some(Regime::Separatrix))),
        regime => {
            if !(summary.big_delta > 0.0) {
                return Err(Error::NonPositiveDelta(summary.big_delta));
            }
            let argument = -summary.delta / (2.0 * summary.big_delta).sqrt();
            Ok(PenetrabilityResult::from_argument(argument, Some(regime)))
        }
    }
}

/// Pieces of the dimensionless ratio `δ/√Δ = numerator/√radicand`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRatio {
    /// `z(g + v)` with `g = γ + √(1+γ²)`.
    pub numerator: f64,
    pub radicand: f64,
    pub ratio: f64,
}

/// `δ/√Δ` in scaled variables for a thermal bath and minimum-uncertainty
/// start.
///
/// `γ = 0`: `z(1+v) / √(1 + r⁴ − 2ε/(ε−1) r²θ)`.
///
/// `γ > 0`: `z(g+v) / √(g² + r⁴ − 2g [(ε²−γ²)√(1+γ²) + ε]/(ε²−γ²−1) r²θ)`.
pub fn closed_form_ratio(cfg: &DimensionlessConfig) -> Result<ClosedFormRatio> {
    cfg.validate()?;
    let DimensionlessConfig {
        z,
        v,
        eps,
        r,
        gamma,
        theta,
    } = *cfg;
    let r2 = r * r;
    let (numerator, radicand) = if gamma == 0.0 {
        (
            z * (1.0 + v),
            1.0 + r2 * r2 - 2.0 * eps / (eps - 1.0) * r2 * theta,
        )
    } else {
        let root = (1.0 + gamma * gamma).sqrt();
        let g = gamma + root;
        let e2g2 = eps * eps - gamma * gamma;
        let k = (e2g2 * root + eps) / (e2g2 - 1.0);
        (z * (g + v), g * g + r2 * r2 - 2.0 * g * k * r2 * theta)
    };
    if !(radicand > 0.0) {
        return Err(Error::NonPositiveDelta(radicand));
    }
    Ok(ClosedFormRatio {
        numerator,
        radicand,
        ratio: numerator / radicand.sqrt(),
    })
}

/// Final penetrability from the dimensionless closed forms.
pub fn penetrability_dimensionless(cfg: &DimensionlessConfig) -> Result<PenetrabilityResult> {
    let c = closed_form_ratio(cfg)?;
    let g = cfg.growth_factor();
    let regime = if c.numerator.abs() <= 1e-12 * ((cfg.z * g).abs() + (cfg.z * cfg.v).abs()) {
        Regime::Separatrix
    } else if c.numerator > 0.0 {
        Regime::Crossing
    } else {
        Regime::Reflected
    };
    let argument = if regime == Regime::Separatrix {
        0.0
    } else {
        -c.ratio / std::f64::consts::SQRT_2
    };
    Ok(PenetrabilityResult::from_argument(argument, Some(regime)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Initial mean energy `⟨H⟩` at `t = 0`.
    pub energy: f64,
    /// `E < 0`.
    pub sub_barrier: bool,
    /// The packet centre classically crosses the barrier top (`δ > 0`);
    /// for `z < 0` this is `v < −(γ + √(1+γ²))`.
    pub classical_pass: bool,
}

/// `⟨H⟩` at `t = 0` from dimensional moments, with
/// `H = p²/2m − mω²q²/2 + (μ/2)(qp + pq)`.
pub fn initial_energy_dimensional(params: &ModelParams, state0: &GaussianState) -> f64 {
    let m = params.mass;
    let mw2 = m * params.omega * params.omega;
    state0.sigma_pp / (2.0 * m) - 0.5 * mw2 * state0.sigma_qq
        + state0.sigma_p * state0.sigma_p / (2.0 * m)
        - 0.5 * mw2 * state0.sigma_q * state0.sigma_q
        + params.mu * (state0.sigma_p * state0.sigma_q + state0.sigma_pq)
}

/// Energy report from a dimensional state.
pub fn energy_report(params: &ModelParams, state0: &GaussianState) -> EnergyReport {
    let energy = initial_energy_dimensional(params, state0);
    let delta = params.mass * (params.mu + params.nu()) * state0.sigma_q + state0.sigma_p;
    EnergyReport {
        energy,
        sub_barrier: energy < 0.0,
        classical_pass: delta > 0.0,
    }
}

/// `E = (ħω/4r²)[r⁴ − 1 + z²(v² − 1)] + (ħμ/2) z²v/r²`, which assumes a
/// minimum-uncertainty start.
pub fn initial_energy(cfg: &DimensionlessConfig, units: Units) -> Result<EnergyReport> {
    cfg.validate_fields()?;
    units.validate()?;
    let DimensionlessConfig { z, v, r, gamma, .. } = *cfg;
    let r2 = r * r;
    let mu = gamma * units.omega;
    let energy = units.hbar * units.omega / (4.0 * r2) * (r2 * r2 - 1.0 + z * z * (v * v - 1.0))
        + 0.5 * units.hbar * mu * z * z * v / r2;
    Ok(EnergyReport {
        energy,
        sub_barrier: energy < 0.0,
        classical_pass: z * (cfg.growth_factor() + v) > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dimensionless_to_dimensional;

    fn fig1() -> DimensionlessConfig {
        DimensionlessConfig {
            z: -3.0,
            v: -0.5,
            eps: 0.5,
            r: 0.5,
            gamma: 0.0,
            theta: 1.0,
        }
    }

    #[test]
    fn fig1_spot_value() {
        let c = closed_form_ratio(&fig1()).unwrap();
        assert_eq!(c.radicand, 1.5625);
        assert!((c.ratio + 1.2).abs() < 1e-15);
        let p = penetrability_dimensionless(&fig1()).unwrap();
        assert!((p.value - 0.115_069_670_221_708_28).abs() < 1e-15);
        assert_eq!(p.regime, Some(Regime::Reflected));
    }

    #[test]
    fn separatrix_gives_one_half() {
        let mut cfg = fig1();
        cfg.v = -1.0;
        for (eps, r, theta) in [(0.2, 0.3, 1.0), (0.9, 1.0, 7.0)] {
            cfg.eps = eps;
            cfg.r = r;
            cfg.theta = theta;
            let p = penetrability_dimensionless(&cfg).unwrap();
            assert_eq!(p.value, 0.5);
            assert_eq!(p.argument, 0.0);
        }
    }

    #[test]
    fn gamma_to_zero_is_continuous() {
        let a = closed_form_ratio(&fig1()).unwrap();
        let mut cfg = fig1();
        cfg.gamma = 1e-14;
        let b = closed_form_ratio(&cfg).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-12);
    }

    #[test]
    fn initial_probability_is_gaussian_tail() {
        let (p, s0) = dimensionless_to_dimensional(&fig1(), Units::default()).unwrap();
        let res = tunneling_probability_at(&p, &s0, 0.0).unwrap();
        assert!((res.argument - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((res.value - 1.349_898_031_630_094_5e-3).abs() < 1e-17);
        let net = res.with_net_adjustment(initial_tail(&s0).unwrap());
        assert_eq!(net.net_adjusted, Some(0.0));
    }

    #[test]
    fn centred_packet_gives_one_half() {
        let p = ModelParams::thermal(Units::default(), 0.5, 0.0, 1.0).unwrap();
        let s0 = GaussianState::coherent(0.0, 0.0, 1.0, 1.0);
        let res = tunneling_probability_at(&p, &s0, 2.0).unwrap();
        assert_eq!(res.value, 0.5);
    }

    #[test]
    fn crossing_packet_saturates() {
        let p = ModelParams::thermal(Units::default(), 0.1, 0.0, 1.0).unwrap();
        let s0 = GaussianState::coherent(-1.0, 30.0, 1.0, 1.0);
        let res = tunneling_probability_at(&p, &s0, 50.0).unwrap();
        assert!(res.value > 1.0 - 1e-12);
    }

    #[test]
    fn stuck_regime_is_one_half() {
        let p = ModelParams::thermal(Units::default(), 1.5, 0.0, 2.0).unwrap();
        let s0 = GaussianState::coherent(-3.0, 1.0, 2.0, 1.0);
        let res = asymptotic_penetrability(&p, &s0).unwrap();
        assert_eq!(res.value, 0.5);
        assert_eq!(res.regime, Some(Regime::Stuck));
    }

    #[test]
    fn asymptotic_matches_dimensionless_for_mu_zero() {
        let cfg = fig1();
        let (p, s0) = dimensionless_to_dimensional(&cfg, Units::default()).unwrap();
        let a = asymptotic_penetrability(&p, &s0).unwrap();
        let b = penetrability_dimensionless(&cfg).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn fig1_energy() {
        let e = initial_energy(&fig1(), Units::default()).unwrap();
        assert_eq!(e.energy, -7.6875);
        assert!(e.sub_barrier);
        assert!(!e.classical_pass);
        let (p, s0) = dimensionless_to_dimensional(&fig1(), Units::default()).unwrap();
        assert!((initial_energy_dimensional(&p, &s0) + 7.6875).abs() < 1e-12);
    }

    #[test]
    fn centred_unit_packet_has_zero_energy() {
        let cfg = DimensionlessConfig {
            z: 0.0,
            v: 0.3,
            r: 1.0,
            ..fig1()
        };
        assert_eq!(initial_energy(&cfg, Units::default()).unwrap().energy, 0.0);
    }

    #[test]
    fn window_violation_is_reported() {
        let mut cfg = fig1();
        cfg.eps = 1.2;
        assert!(matches!(
            penetrability_dimensionless(&cfg),
            Err(Error::RegimeViolation(_))
        ));
    }
}
