//! Interchangeable moment-evolution strategies selected by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::moment_ode::{integrate_moments, IntegratorConfig, QuadraticPotential};
use crate::phase_space::{
    auto_bounds, fokker_planck_evolve, grid_moments, FokkerPlanckOperator, FokkerPlanckOptions,
    PhaseSpaceGrid,
};
use crate::propagator::propagate;
use crate::state::GaussianState;

/// Evolves barrier moments from `state0` to each of `times`.
pub trait MomentBackend: Send + Sync {
    fn name(&self) -> &str;
    fn describe(&self) -> &str;
    fn evolve(
        &self,
        params: &ModelParams,
        state0: &GaussianState,
        times: &[f64],
    ) -> Result<Vec<GaussianState>>;
}

pub struct Analytic;

impl MomentBackend for Analytic {
    fn name(&self) -> &str {
        "analytic"
    }

    fn describe(&self) -> &str {
        "closed-form hyperbolic propagator"
    }

    fn evolve(&self, params: &ModelParams, state0: &GaussianState, times: &[f64]) -> Result<Vec<GaussianState>> {
        times.iter().map(|&t| propagate(params, state0, t)).collect()
    }
}

pub struct Ode {
    name: &'static str,
    config: IntegratorConfig,
}

impl Ode {
    pub fn new(name: &'static str, config: IntegratorConfig) -> Self {
        Self { name, config }
    }
}

impl MomentBackend for Ode {
    fn name(&self) -> &str {
        self.name
    }

    fn describe(&self) -> &str {
        "numerical integration of the moment equations"
    }

    fn evolve(&self, params: &ModelParams, state0: &GaussianState, times: &[f64]) -> Result<Vec<GaussianState>> {
        let potential = QuadraticPotential::barrier(params.omega);
        integrate_moments(params, &potential, state0, times, &self.config)
    }
}

pub struct FokkerPlanck {
    pub n_q: usize,
    pub n_p: usize,
    pub options: FokkerPlanckOptions,
}

impl MomentBackend for FokkerPlanck {
    fn name(&self) -> &str {
        "fokker-planck"
    }

    fn describe(&self) -> &str {
        "finite-volume Wigner evolution with quadrature moments"
    }

    fn evolve(&self, params: &ModelParams, state0: &GaussianState, times: &[f64]) -> Result<Vec<GaussianState>> {
        let t_end = times.iter().copied().fold(0.0, f64::max);
        let bounds = auto_bounds(params, state0, t_end)?;
        let op = FokkerPlanckOperator::barrier(params);
        let mut grid = PhaseSpaceGrid::from_state(&state0.at(0.0), bounds, self.n_q, self.n_p)?;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t < grid.time {
                return Err(crate::error::invalid("times", "must be non-decreasing"));
            }
            grid = fokker_planck_evolve(&op, &grid, t - grid.time, &self.options)?;
            grid.time = t;
            out.push(grid_moments(&grid)?);
        }
        Ok(out)
    }
}

/// Name-indexed collection of backends.
#[derive(Clone, Default)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn MomentBackend>>,
}

impl BackendRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `analytic`, `ode-rk45`, `ode-rk4` and `fokker-planck`.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(Analytic));
        r.register(Arc::new(Ode::new("ode-rk45", IntegratorConfig::default())));
        r.register(Arc::new(Ode::new("ode-rk4", IntegratorConfig::rk4(1e-3))));
        r.register(Arc::new(FokkerPlanck {
            n_q: 256,
            n_p: 256,
            options: FokkerPlanckOptions::default(),
        }));
        r
    }

    /// Adds or replaces the backend under its own name.
    pub fn register(&mut self, backend: Arc<dyn MomentBackend>) {
        self.backends.insert(backend.name().to_string(), backend);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn MomentBackend>> {
        self.backends
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownBackend(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.backends.keys().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Units;

    #[test]
    fn defaults_are_registered() {
        let r = BackendRegistry::with_defaults();
        assert_eq!(r.names(), ["analytic", "fokker-planck", "ode-rk4", "ode-rk45"]);
        assert!(matches!(r.get("euler"), Err(Error::UnknownBackend(_))));
    }

    #[test]
    fn analytic_and_ode_agree() {
        let params = ModelParams::thermal(Units::default(), 0.4, 0.1, 2.0).unwrap();
        let s0 = GaussianState::coherent(-2.0, 1.0, 0.5, 1.0);
        let times = [0.0, 0.5, 1.0, 2.0];
        let r = BackendRegistry::with_defaults();
        let a = r.get("analytic").unwrap().evolve(&params, &s0, &times).unwrap();
        let b = r.get("ode-rk45").unwrap().evolve(&params, &s0, &times).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let d = crate::moment_ode::relative_deviation(y, x);
            assert!(d.iter().all(|e| *e < 1e-8), "{d:?}");
        }
    }
}
