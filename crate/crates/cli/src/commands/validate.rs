use dtunnel_core::model::dimensionless_to_dimensional_unchecked;
use dtunnel_core::moment_ode::{compare_with_analytic, relative_deviation, IntegratorConfig};
use dtunnel_core::phase_space::{
    auto_bounds, fokker_planck_evolve, grid_moments, FokkerPlanckOperator, FokkerPlanckOptions,
    PhaseSpaceGrid,
};
use dtunnel_core::{propagate, DimensionlessConfig, Units};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Format, ValidateArgs};
use crate::config::FileConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{ConstraintSummary, RunManifest};
use crate::output::{csv_row, emit, num, to_json};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CASES: usize = 100;
pub const ODE_TOLERANCE: f64 = 1e-8;
pub const FP_TOLERANCE: f64 = 1e-2;
/// Time points per trajectory on `[0, 10/ω]`.
const SAMPLES: usize = 41;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Case {
    pub cfg: DimensionlessConfig,
    pub units: Units,
    /// `λ > ν`.
    pub stuck: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub case: usize,
    #[serde(flatten)]
    pub config: Case,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub message: Option<String>,
}

/// Random configuration; half of the draws have `λ > ν`.
pub fn sample_case(rng: &mut impl Rng) -> Case {
    let gamma = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.05..1.5) };
    let nu = (1.0f64 + gamma * gamma).sqrt();
    let stuck = rng.random_bool(0.5);
    let eps = if stuck {
        rng.random_range(1.05 * nu..2.5 * nu)
    } else {
        let w = nu - gamma;
        rng.random_range(gamma + 0.05 * w..nu - 0.05 * w)
    };
    let cfg = DimensionlessConfig {
        z: rng.random_range(-6.0..-0.5),
        v: rng.random_range(-1.5..0.5),
        eps,
        r: rng.random_range(0.2..1.5),
        gamma,
        theta: rng.random_range(1.0..5.0),
    };
    let units = Units {
        mass: rng.random_range(0.5..2.0),
        omega: rng.random_range(0.5..2.0),
        hbar: rng.random_range(0.5..2.0),
    };
    Case { cfg, units, stuck }
}

pub fn ode_check(index: usize, case: Case) -> CheckResult {
    let outcome = (|| -> dtunnel_core::Result<f64> {
        let (params, state0) = dimensionless_to_dimensional_unchecked(&case.cfg, case.units)?;
        let t_max = 10.0 / case.units.omega;
        let grid: Vec<f64> = (0..SAMPLES)
            .map(|k| t_max * k as f64 / (SAMPLES - 1) as f64)
            .collect();
        Ok(compare_with_analytic(&params, &state0, &grid, &IntegratorConfig::default())?.worst())
    })();
    finish("ode", index, case, ODE_TOLERANCE, outcome)
}

/// Figure 1 configuration evolved to `t = 1/ω` on an `n × n` grid.
pub fn fp_check(n: usize) -> CheckResult {
    let case = Case {
        cfg: DimensionlessConfig {
            z: -3.0,
            v: -0.5,
            eps: 0.5,
            r: 0.5,
            gamma: 0.0,
            theta: 1.0,
        },
        units: Units::default(),
        stuck: false,
    };
    let outcome = (|| -> dtunnel_core::Result<f64> {
        let (params, state0) = dimensionless_to_dimensional_unchecked(&case.cfg, case.units)?;
        let t = 1.0 / params.omega;
        let bounds = auto_bounds(&params, &state0, t)?;
        let grid0 = PhaseSpaceGrid::from_state(&state0, bounds, n, n)?;
        let op = FokkerPlanckOperator::barrier(&params);
        let grid = fokker_planck_evolve(&op, &grid0, t, &FokkerPlanckOptions::default())?;
        let exact = propagate(&params, &state0, t)?;
        let dev = relative_deviation(&grid_moments(&grid)?, &exact);
        Ok(dev.into_iter().fold(0.0, f64::max))
    })();
    finish("fokker-planck", 0, case, FP_TOLERANCE, outcome)
}

fn finish(check: &'static str, case: usize, config: Case, tolerance: f64, outcome: dtunnel_core::Result<f64>) -> CheckResult {
    let (error, message) = match outcome {
        Ok(e) => (e, None),
        Err(e) => (f64::NAN, Some(e.to_string())),
    };
    CheckResult {
        check,
        case,
        config,
        error,
        tolerance,
        pass: error < tolerance,
        message,
    }
}

/// All checks for `seed`, in a fixed order independent of `jobs`.
pub fn run_checks(seed: u64, cases: usize, fp_grid: Option<usize>) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn: Vec<Case> = (0..cases).map(|_| sample_case(&mut rng)).collect();
    let mut results: Vec<CheckResult> = drawn
        .par_iter()
        .enumerate()
        .map(|(i, c)| ode_check(i, *c))
        .collect();
    if let Some(n) = fp_grid {
        results.push(fp_check(n));
    }
    results
}

pub fn render(results: &[CheckResult], format: Format) -> String {
    match format {
        Format::Json => to_json(&results),
        Format::Csv => {
            let mut body = csv_row(&[
                "check", "case", "m", "omega", "hbar", "eps", "gamma", "theta", "z", "v", "r",
                "stuck", "error", "tolerance", "status",
            ]);
            for r in results {
                let c = &r.config;
                body += &csv_row(&[
                    r.check.to_string(),
                    r.case.to_string(),
                    num(c.units.mass),
                    num(c.units.omega),
                    num(c.units.hbar),
                    num(c.cfg.eps),
                    num(c.cfg.gamma),
                    num(c.cfg.theta),
                    num(c.cfg.z),
                    num(c.cfg.v),
                    num(c.cfg.r),
                    c.stuck.to_string(),
                    num(r.error),
                    num(r.tolerance),
                    if r.pass { "pass" } else { "fail" }.to_string(),
                ]);
            }
            body
        }
    }
}

#[derive(Serialize)]
struct ValidateConfig {
    seed: u64,
    cases: usize,
    fp_grid: Option<usize>,
}

pub fn run(args: &ValidateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let cases = args.cases.or(file.cases).unwrap_or(DEFAULT_CASES);
    let fp = args.fp || file.fp.unwrap_or(false);
    let fp_grid = fp.then(|| args.grid.or(file.grid).unwrap_or(256));
    if fp_grid.is_some_and(|n| n < 3) {
        return Err(CliError::Parse("--grid must be at least 3".into()));
    }
    let results = match args.jobs.or(file.jobs) {
        Some(0) => return Err(CliError::Parse("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Parse(format!("thread pool: {e}")))?
            .install(|| run_checks(seed, cases, fp_grid)),
        None => run_checks(seed, cases, fp_grid),
    };

    let out = args.output.out.clone().or(file.out.map(Into::into));
    let format = args.output.format.or(file.format).unwrap_or(Format::Csv);
    let points = results.len();
    let mut manifest = RunManifest::new(
        "validate",
        ValidateConfig { seed, cases, fp_grid },
        ConstraintSummary::from_margins((0..points).map(|_| None)),
    );
    let failures: Vec<&CheckResult> = results.iter().filter(|r| !r.pass).collect();
    let worst = results
        .iter()
        .filter(|r| r.check == "ode")
        .map(|r| r.error)
        .fold(0.0, f64::max);
    manifest.notes.push(format!(
        "{} of {} checks passed; max analytic-vs-ODE error {worst:e}",
        points - failures.len(),
        points
    ));
    emit(out.as_deref(), &render(&results, format), &manifest)?;

    if let Some(first) = failures.first() {
        for f in &failures {
            eprintln!(
                "FAIL {} case {}: error {} (tolerance {}) config {}{}",
                f.check,
                f.case,
                f.error,
                f.tolerance,
                serde_json::to_string(&f.config).unwrap_or_default(),
                f.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
            );
        }
        return Err(CliError::Validation(format!(
            "{} check(s) failed, first: {} case {}",
            failures.len(),
            first.check,
            first.case
        )));
    }
    Ok(())
}
