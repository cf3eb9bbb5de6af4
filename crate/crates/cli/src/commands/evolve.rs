use std::sync::Arc;

use dtunnel_core::backend::{BackendRegistry, FokkerPlanck};
use dtunnel_core::phase_space::FokkerPlanckOptions;
use dtunnel_core::state::MOMENT_NAMES;
use dtunnel_core::tunneling::probability_of_state;
use dtunnel_core::{Error, GaussianState};
use serde::Serialize;

use crate::args::{EvolveArgs, Format};
use crate::config::{constraint_of, enforce_strict, merge_physics, params_for, FileConfig, ResolvedConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{ConstraintSummary, RunManifest};
use crate::output::{csv_row, emit, num, to_json};

#[derive(Debug, Clone, Serialize)]
struct Row {
    #[serde(flatten)]
    state: GaussianState,
    p: f64,
}

#[derive(Debug, Clone, Serialize)]
struct EvolveConfig {
    #[serde(flatten)]
    physics: ResolvedConfig,
    backend: String,
    t_max: f64,
    n_steps: usize,
    grid: Option<usize>,
}

pub fn registry(grid: Option<usize>) -> BackendRegistry {
    let mut r = BackendRegistry::with_defaults();
    if let Some(n) = grid {
        r.register(Arc::new(FokkerPlanck {
            n_q: n,
            n_p: n,
            options: FokkerPlanckOptions::default(),
        }));
    }
    r
}

pub fn backend_name(args: &EvolveArgs, file: &FileConfig) -> String {
    if args.ode {
        "ode-rk45".into()
    } else if args.fp {
        "fokker-planck".into()
    } else if let Some(b) = &args.backend {
        b.clone()
    } else if file.ode == Some(true) {
        "ode-rk45".into()
    } else if file.fp == Some(true) {
        "fokker-planck".into()
    } else {
        file.backend.clone().unwrap_or_else(|| "analytic".into())
    }
}

pub fn run(args: &EvolveArgs) -> CliResult<()> {
    let file = FileConfig::load(args.physics.config.as_deref())?;
    let physics = merge_physics(&args.physics, &file)?;
    let cfg = physics.partial.complete(&[])?;
    let (params, state0) = params_for(&cfg, physics.units, physics.allow_violations)?;
    let constraint = constraint_of(&cfg, physics.units);
    enforce_strict(physics.strict, constraint.as_ref())?;

    let t_max = args.t_max.or(file.t_max).unwrap_or(10.0) / physics.units.omega;
    let n_steps = args.n_steps.or(file.n_steps).unwrap_or(100);
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(CliError::Parse(format!("--t-max must be positive, got {t_max}")));
    }
    if n_steps == 0 {
        return Err(CliError::Parse("--n-steps must be at least 1".into()));
    }
    let grid = args.grid.or(file.grid);
    let name = backend_name(args, &file);
    let backend = registry(grid).get(&name).map_err(|_| {
        CliError::Parse(format!(
            "unknown backend `{name}` (available: {})",
            registry(None).names().join(", ")
        ))
    })?;

    let times: Vec<f64> = (0..=n_steps)
        .map(|k| if k == n_steps { t_max } else { t_max * k as f64 / n_steps as f64 })
        .collect();
    let states = backend.evolve(&params, &state0, &times).map_err(|e| match e {
        Error::SingularParameters(msg) => CliError::Singular(format!(
            "{msg} (--ode)"
        )),
        e => e.into(),
    })?;
    let rows = states
        .into_iter()
        .map(|state| Ok(Row { p: probability_of_state(&state)?, state }))
        .collect::<Result<Vec<_>, Error>>()?;

    let out = args.output.out.clone().or(file.out.map(Into::into));
    let body = match args.output.format.or(file.format).unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut header = vec!["t"];
            header.extend(MOMENT_NAMES);
            header.push("P");
            let mut body = csv_row(&header);
            for r in &rows {
                let mut f = vec![num(r.state.t)];
                f.extend(r.state.moments().map(num));
                f.push(num(r.p));
                body += &csv_row(&f);
            }
            body
        }
    };
    let resolved = EvolveConfig {
        physics: ResolvedConfig {
            cfg,
            units: physics.units,
            strict: physics.strict,
            allow_violations: physics.allow_violations,
        },
        backend: name,
        t_max,
        n_steps,
        grid,
    };
    let mut manifest = RunManifest::new(
        "evolve",
        &resolved,
        ConstraintSummary::from_margins([constraint.map(|c| (c.satisfied, c.margin))]),
    );
    if cfg.validate().is_err() {
        manifest.notes.push("configuration lies outside the admissible ε window".into());
    }
    emit(out.as_deref(), &body, &manifest)
}
