//! Explicit finite-volume solver for the Wigner-function Fokker-Planck
//! equation with linear drift and constant diffusion:
//!
//! ```text
//! ∂W/∂t = −∂_q(u_q W) − ∂_p(u_p W) + D_qq ∂²_q W + D_pp ∂²_p W + 2 D_pq ∂_q ∂_p W
//! (u_q, u_p) = A (q, p)
//! ```
//!
//! Drift fluxes use a MUSCL reconstruction with the van Leer limiter and
//! upwinding; diffusion fluxes are centred. Each directional operator is
//! advanced with two-stage SSP Runge-Kutta and the directions are combined
//! by Strang splitting `Q(½) P(½) C(1) P(½) Q(½)`, where `C` is the
//! cross-diffusion operator (skipped when `D_pq = 0`).

use super::grid::{GridBounds, PhaseSpaceGrid};
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::propagator::propagate;
use crate::state::GaussianState;

const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FokkerPlanckOperator {
    /// `[[a_qq, a_qp], [a_pq, a_pp]]`.
    pub drift: [[f64; 2]; 2],
    pub d_qq: f64,
    pub d_pp: f64,
    pub d_pq: f64,
}

impl FokkerPlanckOperator {
    /// Inverted-oscillator dynamics of `params`.
    pub fn barrier(params: &ModelParams) -> Self {
        let m = params.mass;
        Self {
            drift: [
                [-(params.lambda - params.mu), 1.0 / m],
                [m * params.omega * params.omega, -(params.lambda + params.mu)],
            ],
            d_qq: params.d_qq,
            d_pp: params.d_pp,
            d_pq: params.d_pq,
        }
    }

    pub fn well(params: &ModelParams) -> Self {
        let mut op = Self::barrier(params);
        op.drift[1][0] = -op.drift[1][0];
        op
    }

    pub fn pure_diffusion(d_qq: f64, d_pp: f64, d_pq: f64) -> Self {
        Self {
            drift: [[0.0; 2]; 2],
            d_qq,
            d_pp,
            d_pq,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = self.drift.iter().flatten().chain([&self.d_qq, &self.d_pp, &self.d_pq]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(invalid("operator", "coefficients must be finite"));
        }
        if self.d_qq < 0.0 || self.d_pp < 0.0 {
            return Err(invalid("operator", "diagonal diffusion must be non-negative"));
        }
        Ok(())
    }

    /// Largest stable step on `grid`: `cfl · min(dq/|u_q|, dp/|u_p|,
    /// dq²/2D_qq', dp²/2D_pp')` with `D' = D + |D_pq|`.
    pub fn stable_dt(&self, grid: &PhaseSpaceGrid, cfl: f64) -> f64 {
        let corners = [
            (grid.q_min, grid.p_min),
            (grid.q_min, grid.p_max),
            (grid.q_max, grid.p_min),
            (grid.q_max, grid.p_max),
        ];
        let a = &self.drift;
        let (mut uq, mut up) = (0.0f64, 0.0f64);
        for (q, p) in corners {
            uq = uq.max((a[0][0] * q + a[0][1] * p).abs());
            up = up.max((a[1][0] * q + a[1][1] * p).abs());
        }
        let (dq, dp) = (grid.dq(), grid.dp());
        let dqq = self.d_qq + self.d_pq.abs();
        let dpp = self.d_pp + self.d_pq.abs();
        let bound = |h: f64, u: f64, d: f64| {
            let rate = u / h + 2.0 * d / (h * h);
            if rate > 0.0 {
                1.0 / rate
            } else {
                f64::INFINITY
            }
        };
        cfl * bound(dq, uq, dqq).min(bound(dp, up, dpp))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zero-gradient ghost cells; mass drifting out is counted as leakage.
    Outflow,
    DirichletZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FokkerPlanckOptions {
    pub cfl: f64,
    /// Requested step; rejected if above the stability bound.
    pub dt: Option<f64>,
    pub boundary: Boundary,
    pub check_positivity: bool,
}

impl Default for FokkerPlanckOptions {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt: None,
            boundary: Boundary::Outflow,
            check_positivity: true,
        }
    }
}

/// Domain covering `mean ± 8 sd` of the analytic barrier forecast on
/// `[0, t_final]`.
pub fn auto_bounds(params: &ModelParams, state0: &GaussianState, t_final: f64) -> Result<GridBounds> {
    const SAMPLES: usize = 65;
    const WIDTH: f64 = 8.0;
    let mut b = GridBounds {
        q_min: f64::INFINITY,
        q_max: f64::NEG_INFINITY,
        p_min: f64::INFINITY,
        p_max: f64::NEG_INFINITY,
    };
    for k in 0..SAMPLES {
        let t = t_final * k as f64 / (SAMPLES - 1) as f64;
        let s = propagate(params, state0, t)?;
        let (sq, sp) = (s.sigma_qq.sqrt(), s.sigma_pp.sqrt());
        b.q_min = b.q_min.min(s.sigma_q - WIDTH * sq);
        b.q_max = b.q_max.max(s.sigma_q + WIDTH * sq);
        b.p_min = b.p_min.min(s.sigma_p - WIDTH * sp);
        b.p_max = b.p_max.max(s.sigma_p + WIDTH * sp);
    }
    b.validate()?;
    Ok(b)
}

/// Advances `grid0` by `t_final`. The returned grid carries the step used
/// and the accumulated boundary leakage.
pub fn fokker_planck_evolve(
    op: &FokkerPlanckOperator,
    grid0: &PhaseSpaceGrid,
    t_final: f64,
    opts: &FokkerPlanckOptions,
) -> Result<PhaseSpaceGrid> {
    op.validate()?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(invalid("t_final", format!("must be finite and non-negative, got {t_final}")));
    }
    if !(opts.cfl > 0.0 && opts.cfl <= 0.5) {
        return Err(invalid("cfl", format!("must lie in (0, 0.5], got {}", opts.cfl)));
    }
    let bound = op.stable_dt(grid0, opts.cfl);
    let dt_max = match opts.dt {
        Some(dt) if !(dt > 0.0) => return Err(invalid("dt", "must be positive")),
        Some(dt) if dt > bound => return Err(Error::CflViolation { dt, bound }),
        Some(dt) => dt,
        None => bound,
    };
    let mut grid = grid0.clone();
    if t_final == 0.0 {
        return Ok(grid);
    }
    let n_steps = if dt_max.is_finite() {
        (t_final / dt_max).ceil().max(1.0) as usize
    } else {
        1
    };
    let dt = t_final / n_steps as f64;
    grid.dt = dt;

    let mut solver = Solver::new(op, &grid, opts.boundary);
    for step in 0..n_steps {
        solver.sweep_q(&mut grid, 0.5 * dt);
        solver.sweep_p(&mut grid, 0.5 * dt);
        if op.d_pq != 0.0 {
            solver.cross(&mut grid, dt);
        }
        solver.sweep_p(&mut grid, 0.5 * dt);
        solver.sweep_q(&mut grid, 0.5 * dt);
        let t = grid0.time + (step + 1) as f64 * dt;
        if opts.check_positivity {
            let (lo, hi) = grid.min_max();
            if lo < -1e-12 * hi.max(0.0) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NegativeDensity { value: lo, scale: hi, t });
            }
        }
    }
    grid.time = grid0.time + t_final;
    grid.leaked = grid0.leaked + solver.leaked;
    Ok(grid)
}

struct Solver {
    op: FokkerPlanckOperator,
    boundary: Boundary,
    leaked: f64,
    transposed: Vec<f64>,
    ext: Vec<f64>,
    flux: Vec<f64>,
    stage: Vec<f64>,
    cross_a: Vec<f64>,
    cross_b: Vec<f64>,
}

/// One line of cells along a single axis with linear face velocity
/// `u(x) = slope·x + offset`.
struct Line {
    x_min: f64,
    h: f64,
    slope: f64,
    offset: f64,
    diffusion: f64,
}

/// `dst[j·rows + i] = src[i·cols + j]`, in tiles.
fn transpose(src: &[f64], dst: &mut [f64], rows: usize, cols: usize) {
    const TILE: usize = 32;
    for i0 in (0..rows).step_by(TILE) {
        for j0 in (0..cols).step_by(TILE) {
            for i in i0..(i0 + TILE).min(rows) {
                for j in j0..(j0 + TILE).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
}

fn van_leer(a: f64, b: f64) -> f64 {
    let ab = a * b;
    if ab > 0.0 {
        2.0 * ab / (a + b)
    } else {
        0.0
    }
}

impl Solver {
    fn new(op: &FokkerPlanckOperator, grid: &PhaseSpaceGrid, boundary: Boundary) -> Self {
        let n = grid.n_q.max(grid.n_p);
        Self {
            op: *op,
            boundary,
            leaked: 0.0,
            transposed: vec![0.0; grid.values.len()],
            ext: vec![0.0; n + 2 * GHOST],
            flux: vec![0.0; n + 1],
            stage: vec![0.0; n],
            cross_a: Vec::new(),
            cross_b: Vec::new(),
        }
    }

    /// Fills `self.flux` for `w` and returns the outward boundary flux.
    fn line_flux(&mut self, w: &[f64], line: &Line) -> f64 {
        let n = w.len();
        let ext = &mut self.ext[..n + 2 * GHOST];
        ext[GHOST..GHOST + n].copy_from_slice(w);
        let (lo, hi) = match self.boundary {
            Boundary::Outflow => (w[0], w[n - 1]),
            Boundary::DirichletZero => (0.0, 0.0),
        };
        ext[..GHOST].fill(lo);
        ext[GHOST + n..].fill(hi);

        let flux = &mut self.flux[..n + 1];
        let inv_h = 1.0 / line.h;
        // face k separates cells k-1 and k, i.e. the middle of ext[k..k+4]
        for (k, (f, e)) in flux.iter_mut().zip(ext.windows(4)).enumerate() {
            let u = line.slope * (line.x_min + k as f64 * line.h) + line.offset;
            let face = if u >= 0.0 {
                e[1] + 0.5 * van_leer(e[1] - e[0], e[2] - e[1])
            } else {
                e[2] - 0.5 * van_leer(e[2] - e[1], e[3] - e[2])
            };
            *f = u * face - line.diffusion * (e[2] - e[1]) * inv_h;
        }
        flux[n] - flux[0]
    }

    /// SSP-RK2 step of one line in place; returns the mass that left.
    fn advance_line(&mut self, w: &mut [f64], line: &Line, dt: f64) -> f64 {
        let n = w.len();
        let r = dt / line.h;
        let out0 = self.line_flux(w, line);
        for c in 0..n {
            self.stage[c] = w[c] - r * (self.flux[c + 1] - self.flux[c]);
        }
        let stage = std::mem::take(&mut self.stage);
        let out1 = self.line_flux(&stage[..n], line);
        for c in 0..n {
            w[c] = 0.5 * (w[c] + stage[c] - r * (self.flux[c + 1] - self.flux[c]));
        }
        self.stage = stage;
        0.5 * dt * (out0 + out1)
    }

    fn sweep_p(&mut self, grid: &mut PhaseSpaceGrid, dt: f64) {
        let a = self.op.drift;
        let (n_p, dq, dp) = (grid.n_p, grid.dq(), grid.dp());
        let mut leak = 0.0;
        for i in 0..grid.n_q {
            let line = Line {
                x_min: grid.p_min,
                h: dp,
                slope: a[1][1],
                offset: a[1][0] * grid.q_at(i),
                diffusion: self.op.d_pp,
            };
            leak += self.advance_line(&mut grid.values[i * n_p..(i + 1) * n_p], &line, dt);
        }
        self.leaked += leak * dq;
    }

    fn sweep_q(&mut self, grid: &mut PhaseSpaceGrid, dt: f64) {
        let a = self.op.drift;
        let (n_q, n_p, dq, dp) = (grid.n_q, grid.n_p, grid.dq(), grid.dp());
        let mut t = std::mem::take(&mut self.transposed);
        transpose(&grid.values, &mut t, n_q, n_p);
        let mut leak = 0.0;
        for j in 0..n_p {
            let line = Line {
                x_min: grid.q_min,
                h: dq,
                slope: a[0][0],
                offset: a[0][1] * grid.p_at(j),
                diffusion: self.op.d_qq,
            };
            leak += self.advance_line(&mut t[j * n_q..(j + 1) * n_q], &line, dt);
        }
        transpose(&t, &mut grid.values, n_p, n_q);
        self.transposed = t;
        self.leaked += leak * dp;
    }

    /// Right-hand side of `2 D_pq ∂_q ∂_p W` written as
    /// `∂_q(D_pq ∂_p W) + ∂_p(D_pq ∂_q W)` with centred face gradients.
    /// Returns the outward boundary flux integrated along the edges.
    fn cross_rhs(&self, grid: &PhaseSpaceGrid, w: &[f64], out: &mut [f64]) -> f64 {
        let (n_q, n_p, dq, dp) = (grid.n_q, grid.n_p, grid.dq(), grid.dp());
        let d = self.op.d_pq;
        let outflow = self.boundary == Boundary::Outflow;
        let at = |i: isize, j: isize| -> f64 {
            let inside = i >= 0 && j >= 0 && (i as usize) < n_q && (j as usize) < n_p;
            if inside {
                w[i as usize * n_p + j as usize]
            } else if outflow {
                let ic = i.clamp(0, n_q as isize - 1) as usize;
                let jc = j.clamp(0, n_p as isize - 1) as usize;
                w[ic * n_p + jc]
            } else {
                0.0
            }
        };
        // q-face (i-½, j) flux: −D_pq ∂_p W averaged over the two cells
        let fq = |i: isize, j: isize| {
            -d * (at(i, j + 1) + at(i - 1, j + 1) - at(i, j - 1) - at(i - 1, j - 1)) / (4.0 * dp)
        };
        let fp = |i: isize, j: isize| {
            -d * (at(i + 1, j) + at(i + 1, j - 1) - at(i - 1, j) - at(i - 1, j - 1)) / (4.0 * dq)
        };
        let mut leak = 0.0;
        for i in 0..n_q as isize {
            for j in 0..n_p as isize {
                let dfq = (fq(i + 1, j) - fq(i, j)) / dq;
                let dfp = (fp(i, j + 1) - fp(i, j)) / dp;
                out[i as usize * n_p + j as usize] = -(dfq + dfp);
            }
        }
        for j in 0..n_p as isize {
            leak += (fq(n_q as isize, j) - fq(0, j)) * dp;
        }
        for i in 0..n_q as isize {
            leak += (fp(i, n_p as isize) - fp(i, 0)) * dq;
        }
        leak
    }

    fn cross(&mut self, grid: &mut PhaseSpaceGrid, dt: f64) {
        let len = grid.values.len();
        let mut k = std::mem::take(&mut self.cross_a);
        let mut s = std::mem::take(&mut self.cross_b);
        k.resize(len, 0.0);
        s.resize(len, 0.0);
        let out0 = self.cross_rhs(grid, &grid.values, &mut k);
        for c in 0..len {
            s[c] = grid.values[c] + dt * k[c];
        }
        let out1 = self.cross_rhs(grid, &s, &mut k);
        for c in 0..len {
            grid.values[c] = 0.5 * (grid.values[c] + s[c] + dt * k[c]);
        }
        self.leaked += 0.5 * dt * (out0 + out1);
        self.cross_a = k;
        self.cross_b = s;
    }
}
