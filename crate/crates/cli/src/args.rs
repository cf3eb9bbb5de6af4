use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtunnel_core::Units;

#[derive(Debug, Parser)]
#[command(
    name = "dtunnel",
    version,
    about = "Tunneling of a Gaussian packet through a dissipative parabolic barrier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic penetrability for one configuration.
    Tunnel(TunnelArgs),
    /// Moment time series and P(t).
    Evolve(EvolveArgs),
    /// Penetrability surface over two parameters.
    Sweep(SweepArgs),
    /// Cross-check the closed forms against the numerical oracles.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Scaled physical parameters shared by all commands.
#[derive(Debug, Clone, Default, Args)]
pub struct PhysicsArgs {
    /// Initial position σ_q(0)/√σ_qq(0).
    #[arg(short = 'z', allow_negative_numbers = true)]
    pub z: Option<f64>,
    /// Initial momentum σ_p(0)/(mω σ_q(0)).
    #[arg(short = 'v', allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Scaled dissipation λ/ω.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Inverse packet width.
    #[arg(short = 'r', allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Scaled mixed coefficient μ/ω.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Temperature factor coth(ħω/2kT).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Physical units as `m,omega,hbar`.
    #[arg(long, value_parser = parse_units)]
    pub units: Option<Units>,
    /// Flat JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Abort when the diffusion coefficients violate the positivity constraint.
    #[arg(long)]
    pub strict: bool,
    /// Evaluate outside the admissible ε window instead of failing.
    #[arg(long)]
    pub allow_violations: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output file; a `<file>.manifest.json` is written alongside.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct TunnelArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// End time in units of 1/ω (default 10).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of intervals (default 100).
    #[arg(long)]
    pub n_steps: Option<usize>,
    /// Moment backend: analytic, ode-rk45, ode-rk4, fokker-planck.
    #[arg(long, conflicts_with_all = ["ode", "fp"])]
    pub backend: Option<String>,
    /// Shorthand for `--backend ode-rk45`.
    #[arg(long, conflicts_with = "fp")]
    pub ode: bool,
    /// Shorthand for `--backend fokker-planck`.
    #[arg(long)]
    pub fp: bool,
    /// Fokker-Planck cells per axis.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Figure preset 1-6.
    #[arg(long)]
    pub fig: Option<u8>,
    /// First axis as `name:min:max:n[:log]`.
    #[arg(long)]
    pub axis1: Option<String>,
    /// Second axis as `name:min:max:n[:log]`.
    #[arg(long)]
    pub axis2: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random configurations (default 100).
    #[arg(long)]
    pub cases: Option<usize>,
    /// Also run the Fokker-Planck comparison.
    #[arg(long)]
    pub fp: bool,
    /// Fokker-Planck cells per axis (default 256).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn parse_units(s: &str) -> Result<Units, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected m,omega,hbar, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (dst, p) in v.iter_mut().zip(&parts) {
        *dst = p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"))?;
    }
    let units = Units {
        mass: v[0],
        omega: v[1],
        hbar: v[2],
    };
    units.validate().map_err(|e| e.to_string())?;
    Ok(units)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from([
            "dtunnel", "tunnel", "-z", "-3", "-v", "-0.5", "--eps", "0.5", "-r", "0.5",
        ])
        .unwrap();
        let Command::Tunnel(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.physics.z, Some(-3.0));
        assert_eq!(a.physics.v, Some(-0.5));
    }

    #[test]
    fn units_flag() {
        let u = parse_units("2,0.5,1").unwrap();
        assert_eq!((u.mass, u.omega, u.hbar), (2.0, 0.5, 1.0));
        assert!(parse_units("1,1").is_err());
        assert!(parse_units("1,-1,1").is_err());
    }
}
