//! Numerical integration of the moment equations for a quadratic potential
//! `U(q) = ±mω²q²/2`.
//!
//! For a quadratic potential the hierarchy closes at second order and the
//! system is linear:
//!
//! ```text
//! dσ_q/dt  = −(λ−μ)σ_q + σ_p/m
//! dσ_p/dt  = s mω²σ_q − (λ+μ)σ_p
//! dσ_qq/dt = −2(λ−μ)σ_qq + 2σ_pq/m + 2D_qq
//! dσ_pp/dt = −2(λ+μ)σ_pp + 2s mω²σ_pq + 2D_pp
//! dσ_pq/dt = s mω²σ_qq + σ_pp/m − 2λσ_pq + 2D_pq
//! ```
//!
//! with `s = +1` for the barrier and `s = −1` for the well. This module is
//! deliberately independent of [`crate::propagator`]; it is the oracle the
//! closed forms are checked against.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::propagator;
use crate::state::GaussianState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    /// `U = −mω²q²/2`
    Barrier,
    /// `U = +mω²q²/2`
    Well,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPotential {
    pub curvature: Curvature,
    pub omega: f64,
}

impl QuadraticPotential {
    pub fn barrier(omega: f64) -> Self {
        Self {
            curvature: Curvature::Barrier,
            omega,
        }
    }

    pub fn well(omega: f64) -> Self {
        Self {
            curvature: Curvature::Well,
            omega,
        }
    }

    fn sign(&self) -> f64 {
        match self.curvature {
            Curvature::Barrier => 1.0,
            Curvature::Well => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4Fixed { dt: f64 },
    /// Dormand-Prince 5(4) with embedded error control.
    Rk45Adaptive { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Integrate `e^{(λ−ν)t}`-scaled first moments and `e^{2(λ−ν)t}`-scaled
    /// second moments (barrier only). Results are returned in that frame.
    pub scaled: bool,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive {
                rtol: 1e-10,
                atol: 1e-12,
            },
            scaled: false,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64) -> Self {
        Self {
            method: Method::Rk4Fixed { dt },
            ..Self::default()
        }
    }

    pub fn rk45(rtol: f64, atol: f64) -> Self {
        Self {
            method: Method::Rk45Adaptive { rtol, atol },
            ..Self::default()
        }
    }

    pub fn scaled(mut self) -> Self {
        self.scaled = true;
        self
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4Fixed { dt } if !(dt > 0.0) => {
                Err(invalid("dt", format!("must be > 0, got {dt}")))
            }
            Method::Rk45Adaptive { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => Err(invalid(
                "rtol/atol",
                format!("must both be > 0, got {rtol}/{atol}"),
            )),
            _ => Ok(()),
        }
    }
}

type Vec5 = [f64; 5];

struct MomentSystem {
    mass: f64,
    drift_q: f64,
    drift_p: f64,
    lambda: f64,
    force: f64,
    d_qq: f64,
    d_pp: f64,
    d_pq: f64,
    kappa: f64,
}

impl MomentSystem {
    fn new(params: &ModelParams, potential: &QuadraticPotential, kappa: f64) -> Self {
        Self {
            mass: params.mass,
            drift_q: params.lambda - params.mu,
            drift_p: params.lambda + params.mu,
            lambda: params.lambda,
            force: potential.sign() * params.mass * potential.omega * potential.omega,
            d_qq: params.d_qq,
            d_pp: params.d_pp,
            d_pq: params.d_pq,
            kappa,
        }
    }

    fn rhs(&self, t: f64, y: &Vec5, dy: &mut Vec5) {
        let k = self.kappa;
        let k2 = 2.0 * k;
        let forcing = if k == 0.0 { 2.0 } else { 2.0 * (k2 * t).exp() };
        let [q, p, qq, pp, pq] = *y;
        dy[0] = (k - self.drift_q) * q + p / self.mass;
        dy[1] = self.force * q + (k - self.drift_p) * p;
        dy[2] = (k2 - 2.0 * self.drift_q) * qq + 2.0 * pq / self.mass + forcing * self.d_qq;
        dy[3] = (k2 - 2.0 * self.drift_p) * pp + 2.0 * self.force * pq + forcing * self.d_pp;
        dy[4] = self.force * qq + pp / self.mass + (k2 - 2.0 * self.lambda) * pq
            + forcing * self.d_pq;
    }
}

/// Integrates the moment equations from `state0` and returns the state at
/// every point of `t_grid` (strictly increasing, starting at 0).
pub fn integrate_moments(
    params: &ModelParams,
    potential: &QuadraticPotential,
    state0: &GaussianState,
    t_grid: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<GaussianState>> {
    config.validate()?;
    check_grid(t_grid)?;
    let kappa = if config.scaled {
        if potential.curvature == Curvature::Well {
            return Err(invalid("scaled", "the co-moving frame is defined for the barrier only"));
        }
        params.lambda - potential.omega.hypot(params.mu)
    } else {
        0.0
    };
    let sys = MomentSystem::new(params, potential, kappa);
    let mut y = state0.moments();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut steps = 0usize;
    let mut h_hint = None;
    for &target in t_grid {
        if target > t {
            match config.method {
                Method::Rk4Fixed { dt } => {
                    let n = ((target - t) / dt).ceil().max(1.0) as usize;
                    let h = (target - t) / n as f64;
                    for i in 0..n {
                        rk4_step(&sys, t + i as f64 * h, &mut y, h);
                    }
                    steps += n;
                    if !y.iter().all(|x| x.is_finite()) {
                        return Err(Error::NonFiniteState(target));
                    }
                }
                Method::Rk45Adaptive { rtol, atol } => {
                    let (n, h) = dopri5(&sys, t, target, &mut y, rtol, atol, h_hint)?;
                    steps += n;
                    h_hint = Some(h);
                }
            }
            if steps > config.max_steps {
                return Err(Error::StepSizeUnderflow {
                    t: target,
                    h: target / steps as f64,
                });
            }
            t = target;
        }
        out.push(GaussianState::from_moments(target, y));
    }
    Ok(out)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        Some(&t0) if t0 == 0.0 => {}
        _ => return Err(invalid("t_grid", "must be non-empty and start at 0")),
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("t_grid", "must be finite and strictly increasing"));
    }
    Ok(())
}

fn axpy(y: &Vec5, h: f64, k: &Vec5) -> Vec5 {
    let mut out = *y;
    for i in 0..5 {
        out[i] += h * k[i];
    }
    out
}

fn rk4_step(sys: &MomentSystem, t: f64, y: &mut Vec5, h: f64) {
    let mut k1 = [0.0; 5];
    let mut k2 = [0.0; 5];
    let mut k3 = [0.0; 5];
    let mut k4 = [0.0; 5];
    sys.rhs(t, y, &mut k1);
    sys.rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1), &mut k2);
    sys.rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2), &mut k3);
    sys.rhs(t + h, &axpy(y, h, &k3), &mut k4);
    for i in 0..5 {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// b − b̂
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Advances `y` from `t0` to `t1`; returns the number of accepted steps and
/// the last proposed step size.
fn dopri5(
    sys: &MomentSystem,
    t0: f64,
    t1: f64,
    y: &mut Vec5,
    rtol: f64,
    atol: f64,
    h_hint: Option<f64>,
) -> Result<(usize, f64)> {
    let span = t1 - t0;
    let mut t = t0;
    let mut k = [[0.0; 5]; 7];
    sys.rhs(t, y, &mut k[0]);
    let mut h = h_hint.unwrap_or_else(|| initial_step(y, &k[0], rtol, atol)).min(span);
    let mut accepted = 0usize;
    loop {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(span) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..5 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            sys.rhs(t + C[s] * h, &ys, &mut k[s]);
        }
        let mut y_new = *y;
        let mut err = 0.0f64;
        for i in 0..5 {
            let mut incr = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                incr += B[s] * k[s][i];
                e += E[s] * k[s][i];
            }
            y_new[i] += h * incr;
            let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        if !y_new.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteState(t + h));
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            *y = y_new;
            t = if last { t1 } else { t + h };
            accepted += 1;
            // FSAL: the last stage is f(t + h, y_new)
            k[0] = k[6];
            if last {
                return Ok((accepted, h * factor));
            }
            h *= factor;
        } else {
            h *= factor.min(1.0);
        }
    }
}

fn initial_step(y: &Vec5, f: &Vec5, rtol: f64, atol: f64) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..5 {
        let sc = atol + rtol * y[i].abs();
        d0 = d0.max(y[i].abs() / sc);
        d1 = d1.max(f[i].abs() / sc);
    }
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}

/// Per-moment maximum relative deviation between the integrator and the
/// closed forms.
///
/// Each deviation is normalized by the larger of the moment's magnitude
/// and its natural scale: `√σ_qq` for `σ_q`, `√σ_pp` for `σ_p` and
/// `√(σ_qq σ_pp)` for `σ_pq`. The normalization keeps the metric finite
/// when a mean or the covariance crosses zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub max_rel: [f64; 5],
}

impl ErrorReport {
    pub fn worst(&self) -> f64 {
        self.max_rel.iter().copied().fold(0.0, f64::max)
    }
}

/// Normalized deviation of `numeric` from `exact` (see [`ErrorReport`]).
pub fn relative_deviation(numeric: &GaussianState, exact: &GaussianState) -> [f64; 5] {
    let sq = exact.sigma_qq.abs().sqrt();
    let sp = exact.sigma_pp.abs().sqrt();
    let scales = [
        exact.sigma_q.abs().max(sq),
        exact.sigma_p.abs().max(sp),
        exact.sigma_qq.abs(),
        exact.sigma_pp.abs(),
        exact.sigma_pq.abs().max(sq * sp),
    ];
    let a = numeric.moments();
    let b = exact.moments();
    let mut out = [0.0; 5];
    for i in 0..5 {
        let d = (a[i] - b[i]).abs();
        out[i] = if d == 0.0 { 0.0 } else { d / scales[i] };
    }
    out
}

/// Runs [`integrate_moments`] on the barrier and compares every grid point
/// with [`propagator::propagate`].
pub fn compare_with_analytic(
    params: &ModelParams,
    state0: &GaussianState,
    t_grid: &[f64],
    config: &IntegratorConfig,
) -> Result<ErrorReport> {
    let numeric = integrate_moments(
        params,
        &QuadraticPotential::barrier(params.omega),
        state0,
        t_grid,
        config,
    )?;
    let kappa = if config.scaled {
        params.lambda - params.nu()
    } else {
        0.0
    };
    let mut max_rel = [0.0f64; 5];
    for s in &numeric {
        let exact = propagator::propagate_scaled(params, state0, s.t, kappa)?;
        let dev = relative_deviation(s, &exact);
        for i in 0..5 {
            max_rel[i] = max_rel[i].max(dev[i]);
        }
    }
    Ok(ErrorReport { max_rel })
}
