use dtunnel_core::model::{dimensionless_to_dimensional_unchecked, initial_state, ConstraintReport};
use dtunnel_core::tunneling::{
    asymptotic_penetrability, initial_energy, initial_tail, penetrability_dimensionless,
    PenetrabilityResult,
};
use dtunnel_core::{DimensionlessConfig, Error, Regime, Units};
use serde::Serialize;

use crate::args::{Format, TunnelArgs};
use crate::config::{constraint_of, enforce_strict, merge_physics, FileConfig, ResolvedConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{ConstraintSummary, RunManifest};
use crate::output::{csv_row, emit, num, to_json};

#[derive(Debug, Clone, Serialize)]
pub struct TunnelReport {
    pub penetrability: f64,
    pub erf_argument: f64,
    pub regime: Option<Regime>,
    /// Mass already beyond the barrier top at `t = 0`.
    pub initial_tail: f64,
    pub net_penetrability: f64,
    pub energy: f64,
    pub sub_barrier: bool,
    pub classical_pass: bool,
    pub constraint_satisfied: Option<bool>,
    pub constraint_margin: Option<f64>,
    /// The configuration lies outside the ε window.
    pub window_violation: bool,
}

/// Asymptotic penetrability. Inside the window the dimensional closed form
/// is used; outside it, with `allow`, the dimensional asymptotics.
pub fn penetrability(cfg: &DimensionlessConfig, units: Units, allow: bool) -> CliResult<(PenetrabilityResult, bool)> {
    match penetrability_dimensionless(cfg) {
        Ok(p) => Ok((p, false)),
        Err(Error::RegimeViolation(msg)) if allow => {
            let (params, state0) = dimensionless_to_dimensional_unchecked(cfg, units)
                .map_err(|e| CliError::Regime(format!("{msg}; {e}")))?;
            Ok((asymptotic_penetrability(&params, &state0)?, true))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn evaluate(cfg: &DimensionlessConfig, units: Units, allow: bool) -> CliResult<(TunnelReport, Option<ConstraintReport>)> {
    let (p, window_violation) = penetrability(cfg, units, allow)?;
    let state0 = initial_state(cfg, units)?;
    let tail = initial_tail(&state0)?;
    let energy = initial_energy(cfg, units)?;
    let constraint = constraint_of(cfg, units);
    Ok((
        TunnelReport {
            penetrability: p.value,
            erf_argument: p.argument,
            regime: p.regime,
            initial_tail: tail,
            net_penetrability: p.value - tail,
            energy: energy.energy,
            sub_barrier: energy.sub_barrier,
            classical_pass: energy.classical_pass,
            constraint_satisfied: constraint.map(|c| c.satisfied),
            constraint_margin: constraint.map(|c| c.margin),
            window_violation,
        },
        constraint,
    ))
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn render(report: &TunnelReport, format: Option<Format>) -> String {
    let fields: [(&str, String); 11] = [
        ("P", num(report.penetrability)),
        ("erf_argument", num(report.erf_argument)),
        ("regime", opt(report.regime)),
        ("initial_tail", num(report.initial_tail)),
        ("net_P", num(report.net_penetrability)),
        ("energy", num(report.energy)),
        ("sub_barrier", report.sub_barrier.to_string()),
        ("classical_pass", report.classical_pass.to_string()),
        ("constraint_satisfied", opt(report.constraint_satisfied)),
        ("constraint_margin", report.constraint_margin.map_or("none".into(), num)),
        ("window_violation", report.window_violation.to_string()),
    ];
    match format {
        Some(Format::Json) => to_json(report),
        Some(Format::Csv) => {
            let (names, values): (Vec<_>, Vec<_>) = fields.into_iter().unzip();
            csv_row(&names) + &csv_row(&values)
        }
        None => fields
            .iter()
            .map(|(k, v)| format!("{k:<21}{v}\n"))
            .collect(),
    }
}

pub fn run(args: &TunnelArgs) -> CliResult<()> {
    let file = FileConfig::load(args.physics.config.as_deref())?;
    let physics = merge_physics(&args.physics, &file)?;
    let cfg = physics.partial.complete(&[])?;
    let (report, constraint) = evaluate(&cfg, physics.units, physics.allow_violations)?;
    enforce_strict(physics.strict, constraint.as_ref())?;

    let out = args.output.out.clone().or(file.out.map(Into::into));
    let format = args
        .output
        .format
        .or(file.format)
        .or(out.as_ref().map(|_| Format::Csv));
    let resolved = ResolvedConfig {
        cfg,
        units: physics.units,
        strict: physics.strict,
        allow_violations: physics.allow_violations,
    };
    let mut manifest = RunManifest::new(
        "tunnel",
        &resolved,
        ConstraintSummary::from_margins([constraint.map(|c| (c.satisfied, c.margin))]),
    );
    if report.window_violation {
        manifest.notes.push("configuration lies outside the admissible ε window".into());
    }
    if constraint.is_some_and(|c| !c.satisfied) {
        manifest.notes.push("diffusion coefficients violate the positivity constraint".into());
    }
    emit(out.as_deref(), &render(&report, format), &manifest)
}
