use dtunnel_core::{DimensionlessConfig, Error, Units};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Format, SweepArgs};
use crate::commands::tunnel::penetrability;
use crate::config::{constraint_of, merge_physics, FileConfig, PartialConfig};
use crate::error::{CliError, CliResult};
use crate::figures::{preset, Axis, SweepSpec};
use crate::manifest::{ConstraintSummary, RunManifest};
use crate::output::{csv_row, emit, num, to_json};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub a1: f64,
    pub a2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SweepConfig<'a> {
    fig: Option<u8>,
    spec: &'a SweepSpec,
    units: Units,
    strict: bool,
    allow_violations: bool,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    axis1: &'a Axis,
    axis2: &'a Axis,
    /// Row-major, `axis1` outer.
    points: &'a [SweepPoint],
}

/// Penetrability at one grid point; window violations become NaN when
/// `allow` is set.
pub fn point_value(cfg: &DimensionlessConfig, units: Units, allow: bool) -> CliResult<f64> {
    match penetrability(cfg, units, false) {
        Ok((p, _)) => Ok(p.value),
        Err(CliError::Core(Error::RegimeViolation(_))) if allow => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

pub fn evaluate(spec: &SweepSpec, units: Units, allow: bool, jobs: Option<usize>) -> CliResult<Vec<SweepPoint>> {
    let points = spec.points();
    let eval = || {
        points
            .par_iter()
            .map(|(a1, a2, cfg)| {
                Ok(SweepPoint {
                    a1: *a1,
                    a2: *a2,
                    p: point_value(cfg, units, allow)?,
                })
            })
            .collect::<CliResult<Vec<_>>>()
    };
    match jobs {
        Some(0) => Err(CliError::Parse("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Parse(format!("thread pool: {e}")))?
            .install(eval),
        None => eval(),
    }
}

fn resolve_spec(args: &SweepArgs, file: &FileConfig, partial: PartialConfig) -> CliResult<(Option<u8>, SweepSpec)> {
    let fig = args.fig.or(file.fig);
    let preset_spec = fig.map(preset).transpose()?;
    let axis = |flag: &Option<String>, key: &Option<String>| -> CliResult<Option<Axis>> {
        flag.as_ref().or(key.as_ref()).map(|s| s.parse()).transpose()
    };
    let axis1 = axis(&args.axis1, &file.axis1)?.or(preset_spec.as_ref().map(|s| s.axis1));
    let axis2 = axis(&args.axis2, &file.axis2)?.or(preset_spec.as_ref().map(|s| s.axis2));
    let (Some(axis1), Some(axis2)) = (axis1, axis2) else {
        return Err(CliError::Parse("sweep needs --fig or both --axis1 and --axis2".into()));
    };
    let partial = match &preset_spec {
        Some(s) => partial.overlay(&s.fixed),
        None => partial,
    };
    let fixed = partial.complete(&[axis1.param.name(), axis2.param.name()])?;
    let spec = SweepSpec { axis1, axis2, fixed };
    spec.validate()?;
    let unset = [
        ("z", fixed.z),
        ("v", fixed.v),
        ("eps", fixed.eps),
        ("r", fixed.r),
        ("gamma", fixed.gamma),
        ("theta", fixed.theta),
    ]
    .into_iter()
    .find(|(name, x)| x.is_nan() && *name != axis1.param.name() && *name != axis2.param.name());
    if let Some((name, _)) = unset {
        return Err(CliError::Parse(format!("missing value for `{name}`")));
    }
    Ok((fig, spec))
}

pub fn run(args: &SweepArgs) -> CliResult<()> {
    let file = FileConfig::load(args.physics.config.as_deref())?;
    let physics = merge_physics(&args.physics, &file)?;
    let (fig, spec) = resolve_spec(args, &file, physics.partial)?;
    let allow = physics.allow_violations;
    let jobs = args.jobs.or(file.jobs);

    let cfgs = spec.points();
    let violations = cfgs.iter().filter(|(_, _, c)| c.validate().is_err()).count();
    if violations > 0 && !allow {
        let (_, _, bad) = cfgs.iter().find(|(_, _, c)| c.validate().is_err()).unwrap();
        let msg = bad.validate().unwrap_err();
        return Err(CliError::Regime(format!(
            "{violations} grid point(s) outside the admissible window, e.g. {msg}; pass --allow-violations to emit them as NaN"
        )));
    }
    let constraint = ConstraintSummary::from_margins(
        cfgs.iter()
            .map(|(_, _, c)| constraint_of(c, physics.units).map(|r| (r.satisfied, r.margin))),
    );
    if physics.strict && !constraint.satisfied {
        return Err(CliError::Regime(format!(
            "{} grid point(s) violate the positivity constraint (min margin {:e}); drop --strict to continue",
            constraint.violating_points,
            constraint.min_margin.unwrap_or(f64::NAN)
        )));
    }

    let points = evaluate(&spec, physics.units, allow, jobs)?;

    let out = args.output.out.clone().or(file.out.map(Into::into));
    let body = match args.output.format.or(file.format).unwrap_or(Format::Csv) {
        Format::Json => to_json(&SweepJson {
            axis1: &spec.axis1,
            axis2: &spec.axis2,
            points: &points,
        }),
        Format::Csv => {
            let mut body = csv_row(&[spec.axis1.param.name(), spec.axis2.param.name(), "P"]);
            for p in &points {
                body += &csv_row(&[num(p.a1), num(p.a2), num(p.p)]);
            }
            body
        }
    };
    let config = SweepConfig {
        fig,
        spec: &spec,
        units: physics.units,
        strict: physics.strict,
        allow_violations: allow,
    };
    let mut manifest = RunManifest::new("sweep", &config, constraint.clone());
    if violations > 0 {
        manifest.notes.push(format!(
            "{violations} grid point(s) lie outside the admissible ε window and are emitted as NaN"
        ));
    }
    if !constraint.satisfied {
        manifest.notes.push(format!(
            "{} of {} grid point(s) violate the positivity constraint D_pp D_qq − D_pq² ≥ λ²ħ²/4",
            constraint.violating_points, constraint.points
        ));
    }
    emit(out.as_deref(), &body, &manifest)
}
