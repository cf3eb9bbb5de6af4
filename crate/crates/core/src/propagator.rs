//! Closed-form moment evolution for the inverted parabola
//! `U(q) = −mω²q²/2`.
//!
//! With `ν = √(ω² + μ²)` the means evolve as
//!
//! ```text
//! σ_q(t) = e^{−λt}[(cosh νt + (μ/ν) sinh νt) σ_q(0) + sinh νt/(mν) σ_p(0)]
//! σ_p(t) = e^{−λt}[(mω²/ν) sinh νt σ_q(0) + (cosh νt − (μ/ν) sinh νt) σ_p(0)]
//! ```
//!
//! and every covariance relaxes about the stationary offsets `σ_xx(∞)` as
//! a quadratic form in `Δ_xx = σ_xx(0) − σ_xx(∞)`:
//!
//! ```text
//! σ_qq(t) = e^{−2λt}/(2ν²) { Δ_qq[(μ²+ν²) cosh 2νt + 2μν sinh 2νt + ω²]
//!           + Δ_pp/m² (cosh 2νt − 1) + (2/m) Δ_pq (μ cosh 2νt + ν sinh 2νt − μ) } + σ_qq(∞)
//! σ_pp(t) = e^{−2λt}/(2ν²) { Δ_pp[(μ²+ν²) cosh 2νt − 2μν sinh 2νt + ω²]
//!           + m²ω⁴ Δ_qq (cosh 2νt − 1) + 2mω² Δ_pq (ν sinh 2νt − μ cosh 2νt + μ) } + σ_pp(∞)
//! σ_pq(t) = e^{−2λt}/(2ν²) { mω² Δ_qq (ν sinh 2νt + μ cosh 2νt − μ)
//!           + 2 Δ_pq (ω² cosh 2νt + μ²) + Δ_pp/m (ν sinh 2νt − μ cosh 2νt + μ) } + σ_pq(∞)
//! ```
//!
//! The `σ_pp` and `σ_pq` forms are the entries of `Φ(t) Δ Φ(t)ᵀ` where
//! `Φ` is the mean transfer matrix above; `docs/closed_forms.md` has the
//! derivation. Exponentials are combined (`e^{(ν−λ)t}`) so that sweeps to
//! large `t` do not overflow before the moments themselves do.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::state::GaussianState;

/// Relative tolerance for the singular surfaces `λ² = ω² + μ²` and `λ = ν`.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Large-time classification of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `λ < ν`, `δ > 0`: the centre crosses the barrier top.
    Crossing,
    /// `λ < ν`, `δ < 0`: the centre turns back.
    Reflected,
    /// `λ < ν`, `δ = 0`: the centre creeps up to the barrier top.
    Separatrix,
    /// `λ > ν`: the packet settles on the barrier.
    Stuck,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Crossing => "crossing",
            Regime::Reflected => "reflected",
            Regime::Separatrix => "separatrix",
            Regime::Stuck => "stuck",
        };
        f.write_str(s)
    }
}

/// `δ`, `Δ`, stationary offsets and the regime of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSummary {
    pub nu: f64,
    /// `δ = m(μ+ν)σ_q(0) + σ_p(0)`.
    pub delta: f64,
    /// `Δ = m²(μ+ν)²Δ_qq + Δ_pp + 2m(μ+ν)Δ_pq`.
    pub big_delta: f64,
    pub sigma_qq_inf: f64,
    pub sigma_pp_inf: f64,
    pub sigma_pq_inf: f64,
    pub regime: Regime,
}

/// `e^{(κ−λ)t}` times `cosh νt`, `sinh νt` and 1.
#[derive(Debug, Clone, Copy)]
struct Hyperbolic {
    ch: f64,
    sh: f64,
    decay: f64,
}

impl Hyperbolic {
    fn new(lambda: f64, nu: f64, t: f64, kappa: f64) -> Self {
        let a = (kappa - lambda) * t;
        let x = nu * t;
        if x.abs() < 20.0 {
            let e = a.exp();
            Self {
                ch: e * x.cosh(),
                sh: e * x.sinh(),
                decay: e,
            }
        } else {
            let up = (a + x).exp();
            let down = (a - x).exp();
            Self {
                ch: 0.5 * (up + down),
                sh: 0.5 * (up - down),
                decay: a.exp(),
            }
        }
    }
}

/// `σ_q(t), σ_p(t)`.
pub fn propagate_mean(params: &ModelParams, state0: &GaussianState, t: f64) -> (f64, f64) {
    mean_with(params, state0, Hyperbolic::new(params.lambda, params.nu(), t, 0.0))
}

fn mean_with(params: &ModelParams, s: &GaussianState, h: Hyperbolic) -> (f64, f64) {
    let m = params.mass;
    let nu = params.nu();
    let k = params.mu / nu;
    let q = (h.ch + k * h.sh) * s.sigma_q + h.sh / (m * nu) * s.sigma_p;
    let p = m * params.omega * params.omega / nu * h.sh * s.sigma_q + (h.ch - k * h.sh) * s.sigma_p;
    (q, p)
}

/// `σ_qq(t), σ_pp(t), σ_pq(t)`.
pub fn propagate_covariance(
    params: &ModelParams,
    state0: &GaussianState,
    t: f64,
) -> Result<(f64, f64, f64)> {
    let stat = stationary_covariance(params)?;
    let h = Hyperbolic::new(params.lambda, params.nu(), t, 0.0);
    Ok(covariance_with(params, state0, stat, h, 1.0))
}

fn covariance_with(
    params: &ModelParams,
    s: &GaussianState,
    (qq_inf, pp_inf, pq_inf): (f64, f64, f64),
    h: Hyperbolic,
    offset_scale: f64,
) -> (f64, f64, f64) {
    let m = params.mass;
    let w2 = params.omega * params.omega;
    let mu = params.mu;
    let nu = params.nu();
    let nu2 = nu * nu;

    let d_qq = s.sigma_qq - qq_inf;
    let d_pp = s.sigma_pp - pp_inf;
    let d_pq = s.sigma_pq - pq_inf;

    // e^{−2λt} cosh 2νt, e^{−2λt} sinh 2νt, e^{−2λt}, e^{−2λt}(cosh 2νt − 1)
    let c2 = h.ch * h.ch + h.sh * h.sh;
    let s2 = 2.0 * h.ch * h.sh;
    let e = h.decay * h.decay;
    let cm = 2.0 * h.sh * h.sh;

    let pref = 0.5 / nu2;
    let qq = pref
        * (d_qq * ((mu * mu + nu2) * c2 + 2.0 * mu * nu * s2 + w2 * e)
            + d_pp / (m * m) * cm
            + 2.0 / m * d_pq * (mu * cm + nu * s2))
        + offset_scale * qq_inf;
    let pp = pref
        * (d_pp * ((mu * mu + nu2) * c2 - 2.0 * mu * nu * s2 + w2 * e)
            + m * m * w2 * w2 * d_qq * cm
            + 2.0 * m * w2 * d_pq * (nu * s2 - mu * cm))
        + offset_scale * pp_inf;
    let pq = pref
        * (m * w2 * d_qq * (nu * s2 + mu * cm)
            + 2.0 * d_pq * (w2 * c2 + mu * mu * e)
            + d_pp / m * (nu * s2 - mu * cm))
        + offset_scale * pq_inf;
    (qq, pp, pq)
}

/// Full Gaussian state at time `t`.
pub fn propagate(params: &ModelParams, state0: &GaussianState, t: f64) -> Result<GaussianState> {
    propagate_scaled(params, state0, t, 0.0)
}

/// State at time `t` in a co-moving frame: first moments multiplied by
/// `e^{κt}`, second moments by `e^{2κt}`. With `κ = λ − ν` the frame
/// removes the exponential growth of the `λ < ν` regime, so ratios such as
/// `σ_q/√σ_qq` can be evaluated at arbitrarily large `t`.
pub fn propagate_scaled(
    params: &ModelParams,
    state0: &GaussianState,
    t: f64,
    kappa: f64,
) -> Result<GaussianState> {
    let stat = stationary_covariance(params)?;
    if t == 0.0 {
        return Ok(state0.at(0.0));
    }
    let h = Hyperbolic::new(params.lambda, params.nu(), t, kappa);
    let (q, p) = mean_with(params, state0, h);
    let (qq, pp, pq) = covariance_with(params, state0, stat, h, (2.0 * kappa * t).exp());
    Ok(GaussianState {
        t,
        sigma_q: q,
        sigma_p: p,
        sigma_qq: qq,
        sigma_pp: pp,
        sigma_pq: pq,
    })
}

/// Stationary offsets `(σ_qq(∞), σ_pp(∞), σ_pq(∞))`. They are attractors
/// only for `λ > ν`; otherwise they are formal offsets of the closed forms.
pub fn stationary_covariance(params: &ModelParams) -> Result<(f64, f64, f64)> {
    let ModelParams {
        mass: m,
        omega: w,
        lambda: l,
        mu,
        d_qq,
        d_pp,
        d_pq,
        ..
    } = *params;
    let w2 = w * w;
    let gap = l * l - w2 - mu * mu;
    if gap.abs() < SINGULAR_TOL * w2 {
        return Err(Error::SingularParameters(format!(
            "λ² − ω² − μ² = {gap:e} vanishes; use the moment integrator instead"
        )));
    }
    if !params.has_diffusion() {
        return Ok((0.0, 0.0, 0.0));
    }
    if l.abs() < SINGULAR_TOL * w {
        return Err(Error::SingularParameters(
            "λ = 0 with nonzero diffusion has no stationary covariance; use the moment integrator instead"
                .into(),
        ));
    }
    let den = 2.0 * l * gap;
    let qq = (m * m * (2.0 * l * (l + mu) - w2) * d_qq + d_pp + 2.0 * m * (l + mu) * d_pq)
        / (m * m * den);
    let pp = ((m * w) * (m * w) * w2 * d_qq
        + (2.0 * l * (l - mu) - w2) * d_pp
        + 2.0 * m * w2 * (l - mu) * d_pq)
        / den;
    let pq = ((l + mu) * (m * w) * (m * w) * d_qq
        + (l - mu) * d_pp
        + 2.0 * m * (l * l - mu * mu) * d_pq)
        / (m * den);
    Ok((qq, pp, pq))
}

/// `δ`, `Δ` and the regime.
pub fn asymptotics(params: &ModelParams, state0: &GaussianState) -> Result<AsymptoticSummary> {
    let nu = params.nu();
    if (params.lambda - nu).abs() < SINGULAR_TOL * params.omega {
        return Err(Error::AmbiguousRegime {
            lambda: params.lambda,
            nu,
        });
    }
    let (qq_inf, pp_inf, pq_inf) = stationary_covariance(params)?;
    let m = params.mass;
    let g = params.mu + nu;
    let position_term = m * g * state0.sigma_q;
    let delta = position_term + state0.sigma_p;
    let big_delta = m * m * g * g * (state0.sigma_qq - qq_inf)
        + (state0.sigma_pp - pp_inf)
        + 2.0 * m * g * (state0.sigma_pq - pq_inf);

    let regime = if params.lambda > nu {
        Regime::Stuck
    } else if delta.abs() <= 1e-12 * (position_term.abs() + state0.sigma_p.abs()) {
        Regime::Separatrix
    } else if delta > 0.0 {
        Regime::Crossing
    } else {
        Regime::Reflected
    };

    Ok(AsymptoticSummary {
        nu,
        delta,
        big_delta,
        sigma_qq_inf: qq_inf,
        sigma_pp_inf: pp_inf,
        sigma_pq_inf: pq_inf,
        regime,
    })
}

/// Mean transfer matrix `Φ(t)`, with `(σ_q(t), σ_p(t))ᵀ = Φ(t) (σ_q(0), σ_p(0))ᵀ`.
pub fn transfer_matrix(params: &ModelParams, t: f64) -> [[f64; 2]; 2] {
    let h = Hyperbolic::new(params.lambda, params.nu(), t, 0.0);
    let nu = params.nu();
    let k = params.mu / nu;
    let m = params.mass;
    [
        [h.ch + k * h.sh, h.sh / (m * nu)],
        [m * params.omega * params.omega / nu * h.sh, h.ch - k * h.sh],
    ]
}
