use serde::{Deserialize, Serialize};

/// First and second moments of a Gaussian state at time `t`.
///
/// `sigma_q`, `sigma_p` are the expectation values of position and momentum;
/// `sigma_qq`, `sigma_pp` their variances and `sigma_pq` the symmetrized
/// covariance `½⟨qp + pq⟩ − ⟨q⟩⟨p⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub t: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub sigma_qq: f64,
    pub sigma_pp: f64,
    pub sigma_pq: f64,
}

impl GaussianState {
    pub fn new(sigma_q: f64, sigma_p: f64, sigma_qq: f64, sigma_pp: f64, sigma_pq: f64) -> Self {
        Self {
            t: 0.0,
            sigma_q,
            sigma_p,
            sigma_qq,
            sigma_pp,
            sigma_pq,
        }
    }

    /// Minimum-uncertainty packet (`σ_qq σ_pp = ħ²/4`, no correlation).
    pub fn coherent(sigma_q: f64, sigma_p: f64, sigma_qq: f64, hbar: f64) -> Self {
        Self::new(sigma_q, sigma_p, sigma_qq, hbar * hbar / (4.0 * sigma_qq), 0.0)
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Covariance determinant `σ = σ_qq σ_pp − σ_pq²`.
    pub fn determinant(&self) -> f64 {
        self.sigma_qq * self.sigma_pp - self.sigma_pq * self.sigma_pq
    }

    pub fn is_physical(&self) -> bool {
        self.sigma_qq > 0.0 && self.sigma_pp > 0.0 && self.determinant() > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.moments().iter().all(|x| x.is_finite())
    }

    /// Moments in the fixed order `(σ_q, σ_p, σ_qq, σ_pp, σ_pq)`.
    pub fn moments(&self) -> [f64; 5] {
        [
            self.sigma_q,
            self.sigma_p,
            self.sigma_qq,
            self.sigma_pp,
            self.sigma_pq,
        ]
    }

    pub fn from_moments(t: f64, m: [f64; 5]) -> Self {
        Self {
            t,
            sigma_q: m[0],
            sigma_p: m[1],
            sigma_qq: m[2],
            sigma_pp: m[3],
            sigma_pq: m[4],
        }
    }
}

/// Names matching [`GaussianState::moments`] order.
pub const MOMENT_NAMES: [&str; 5] = ["sigma_q", "sigma_p", "sigma_qq", "sigma_pp", "sigma_pq"];
