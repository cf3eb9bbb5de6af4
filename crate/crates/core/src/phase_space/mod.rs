//! Phase-space representations of the Gaussian state and the
//! finite-volume Fokker-Planck oracle for the Wigner function.

mod fokker_planck;
mod grid;

pub use fokker_planck::{
    auto_bounds, fokker_planck_evolve, Boundary, FokkerPlanckOperator, FokkerPlanckOptions,
};
pub use grid::{grid_moments, GridBounds, PhaseSpaceGrid, GRID_MAGIC};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::state::GaussianState;

/// Gaussian Wigner function of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGaussian {
    pub state: GaussianState,
    /// `σ = σ_qq σ_pp − σ_pq²`.
    pub det_sigma: f64,
}

impl WignerGaussian {
    pub fn new(state: GaussianState) -> Result<Self> {
        let det_sigma = state.determinant();
        if !(det_sigma > 0.0) {
            return Err(invalid(
                "state",
                format!("covariance determinant must be positive, got {det_sigma}"),
            ));
        }
        Ok(Self { state, det_sigma })
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        let s = &self.state;
        let dq = q - s.sigma_q;
        let dp = p - s.sigma_p;
        let quad = s.sigma_pp * dq * dq + s.sigma_qq * dp * dp - 2.0 * s.sigma_pq * dq * dp;
        (-quad / (2.0 * self.det_sigma)).exp() / (2.0 * PI * self.det_sigma.sqrt())
    }
}

/// `W(q, p)` for a Gaussian state. The state must have a positive
/// covariance determinant.
pub fn wigner_eval(state: &GaussianState, q: f64, p: f64) -> f64 {
    let det = state.determinant();
    debug_assert!(det > 0.0);
    WignerGaussian {
        state: *state,
        det_sigma: det,
    }
    .eval(q, p)
}

/// `⟨q|ρ|q'⟩ = ∫ dp e^{ip(q−q')/ħ} W((q+q')/2, p)`.
///
/// With this convention the kernel is normalized, `∫⟨q|ρ|q⟩ dq = 1`, and
/// the diagonal is [`position_density`]; no extra constant is needed.
pub fn density_matrix_eval(state: &GaussianState, q: f64, q_prime: f64, hbar: f64) -> Complex64 {
    let s = state;
    let centre = 0.5 * (q + q_prime) - s.sigma_q;
    let x = q - q_prime;
    let cond_var = s.sigma_pp - s.sigma_pq * s.sigma_pq / s.sigma_qq;
    let re = -centre * centre / (2.0 * s.sigma_qq) - cond_var * x * x / (2.0 * hbar * hbar);
    let im = (s.sigma_pq / s.sigma_qq * centre + s.sigma_p) * x / hbar;
    let amp = (1.0 / (2.0 * PI * s.sigma_qq)).sqrt();
    Complex64::from_polar(amp * re.exp(), im)
}

/// Normal density with mean `σ_q` and variance `σ_qq`.
pub fn position_density(state: &GaussianState, q: f64) -> f64 {
    let d = q - state.sigma_q;
    (-d * d / (2.0 * state.sigma_qq)).exp() / (2.0 * PI * state.sigma_qq).sqrt()
}
