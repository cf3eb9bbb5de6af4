//! Acceptance gate: one line per criterion, non-zero exit on any failure.

use std::process::Command;
use std::time::Instant;

use dtunnel_core::model::{dimensionless_to_dimensional, dimensionless_to_dimensional_unchecked};
use dtunnel_core::moment_ode::{
    compare_with_analytic, integrate_moments, relative_deviation, IntegratorConfig,
    QuadraticPotential,
};
use dtunnel_core::phase_space::{
    auto_bounds, fokker_planck_evolve, grid_moments, FokkerPlanckOperator, FokkerPlanckOptions,
    PhaseSpaceGrid,
};
use dtunnel_core::propagator::asymptotics;
use dtunnel_core::tunneling::{
    closed_form_ratio, initial_energy, initial_energy_dimensional, penetrability_dimensionless,
    tunneling_probability_at,
};
use dtunnel_core::{propagate, DimensionlessConfig, ModelParams, Units};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fig1() -> DimensionlessConfig {
    DimensionlessConfig {
        z: -3.0,
        v: -0.5,
        eps: 0.5,
        r: 0.5,
        gamma: 0.0,
        theta: 1.0,
    }
}

fn random_units(rng: &mut ChaCha8Rng) -> Units {
    Units {
        mass: rng.random_range(0.5..2.0),
        omega: rng.random_range(0.5..2.0),
        hbar: rng.random_range(0.5..2.0),
    }
}

fn random_gamma(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.3) {
        0.0
    } else {
        rng.random_range(0.05..2.0)
    }
}

/// `ε` strictly inside the window, at least 2% of its width from either end.
fn inner_eps(rng: &mut ChaCha8Rng, gamma: f64) -> f64 {
    let (lo, hi) = DimensionlessConfig::eps_window(gamma);
    lo + (hi - lo) * rng.random_range(0.02..0.98)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut stuck) = (0.0f64, 0);
    for _ in 0..200 {
        let gamma = random_gamma(&mut rng);
        let nu = (1.0f64 + gamma * gamma).sqrt();
        let eps = if rng.random_bool(0.5) {
            stuck += 1;
            nu * rng.random_range(1.05..2.5)
        } else {
            inner_eps(&mut rng, gamma)
        };
        let cfg = DimensionlessConfig {
            z: rng.random_range(-6.0..-0.3),
            v: rng.random_range(-1.5..1.0),
            eps,
            r: rng.random_range(0.2..1.5),
            gamma,
            theta: rng.random_range(1.0..6.0),
        };
        let units = random_units(&mut rng);
        let (params, s0) = dimensionless_to_dimensional_unchecked(&cfg, units).unwrap();
        let t_max = 10.0 / units.omega;
        let grid: Vec<f64> = (0..=50).map(|k| t_max * k as f64 / 50.0).collect();
        let config = IntegratorConfig::rk45(1e-10, 1e-12);
        match compare_with_analytic(&params, &s0, &grid, &config) {
            Ok(r) => worst = worst.max(r.worst()),
            Err(e) => return outcome(false, format!("integration failed for {cfg:?}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-8 && secs < 30.0,
        format!("analytic vs RK45 on 200 configs ({stuck} with λ>ν): max deviation {worst:.2e} (< 1e-8), {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (params, s0) = dimensionless_to_dimensional(&fig1(), Units::default()).unwrap();
    let t = 1.0 / params.omega;
    let exact = propagate(&params, &s0, t).unwrap();
    let bounds = auto_bounds(&params, &s0, t).unwrap();
    let op = FokkerPlanckOperator::barrier(&params);
    let mut errors = Vec::new();
    for n in [128, 256, 512] {
        let g0 = PhaseSpaceGrid::from_state(&s0, bounds, n, n).unwrap();
        let g = match fokker_planck_evolve(&op, &g0, t, &FokkerPlanckOptions::default()) {
            Ok(g) => g,
            Err(e) => return outcome(false, format!("{n}² evolution failed: {e}")),
        };
        let m = grid_moments(&g).unwrap();
        errors.push(relative_deviation(&m, &exact).into_iter().fold(0.0, f64::max));
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        errors[2] < 1e-3 && orders.iter().all(|p| *p >= 1.8) && secs < 120.0,
        format!(
            "Fokker-Planck Fig. 1 at t=1/ω: errors 128/256/512 = {:.2e}/{:.2e}/{:.2e} (512² < 1e-3), orders {:.2}/{:.2} (≥ 1.8), {secs:.1} s",
            errors[0], errors[1], errors[2], orders[0], orders[1]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let gamma = random_gamma(&mut rng);
        let cfg = DimensionlessConfig {
            z: rng.random_range(-6.0..-0.3),
            v: rng.random_range(-1.5..1.0),
            eps: inner_eps(&mut rng, gamma),
            r: rng.random_range(0.2..1.5),
            gamma,
            theta: rng.random_range(1.0..6.0),
        };
        let (params, s0) = dimensionless_to_dimensional(&cfg, random_units(&mut rng)).unwrap();
        let a = asymptotics(&params, &s0).unwrap();
        let t = 25.0 / (params.nu() - params.lambda);
        let out = integrate_moments(
            &params,
            &QuadraticPotential::barrier(params.omega),
            &s0,
            &[0.0, t],
            &IntegratorConfig::default().scaled(),
        );
        let s = match out {
            Ok(s) => s[1],
            Err(e) => return outcome(false, format!("scaled integration failed for {cfg:?}: {e}")),
        };
        let err = (s.sigma_q / s.sigma_qq.sqrt() - a.delta / a.big_delta.sqrt()).abs();
        worst = worst.max(err);
    }
    outcome(
        worst < 1e-6,
        format!("asymptotic ratio on 50 λ<ν configs at t=25/(ν−λ): max |σ_q/√σ_qq − δ/√Δ| = {worst:.2e} (< 1e-6)"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let gamma = random_gamma(&mut rng);
        let nu = (1.0f64 + gamma * gamma).sqrt();
        let cfg = DimensionlessConfig {
            z: rng.random_range(-6.0..-0.3),
            v: rng.random_range(-1.5..1.0),
            eps: nu * rng.random_range(1.05..3.0),
            r: rng.random_range(0.2..1.5),
            gamma,
            theta: rng.random_range(1.0..6.0),
        };
        let units = random_units(&mut rng);
        let (params, s0) = dimensionless_to_dimensional_unchecked(&cfg, units).unwrap();
        let t = 40.0 / (params.lambda - params.nu());
        let p = tunneling_probability_at(&params, &s0, t).unwrap().value;
        worst = worst.max((p - 0.5).abs());
    }
    outcome(
        worst < 1e-6,
        format!("stuck regime on 20 λ>ν configs at t=40/(λ−ν): max |P − 1/2| = {worst:.2e} (< 1e-6)"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let gamma = random_gamma(&mut rng);
        let cfg = DimensionlessConfig {
            z: rng.random_range(-8.0..8.0),
            v: rng.random_range(-3.0..3.0),
            eps: inner_eps(&mut rng, gamma),
            r: rng.random_range(0.1..2.0),
            gamma,
            theta: rng.random_range(1.0..10.0),
        };
        let units = random_units(&mut rng);
        let (params, s0) = dimensionless_to_dimensional(&cfg, units).unwrap();
        let scaled = initial_energy(&cfg, units).unwrap().energy;
        let direct = initial_energy_dimensional(&params, &s0);
        let DimensionlessConfig { z, v, r, .. } = cfg;
        let r2 = r * r;
        let hw = units.hbar * units.omega;
        let magnitude = hw / (4.0 * r2) * (r2 * r2 + 1.0 + z * z * (v * v + 1.0))
            + (0.5 * hw * gamma * z * z * v / r2).abs();
        worst = worst.max((scaled - direct).abs() / magnitude);
    }
    let e1 = initial_energy(&fig1(), Units::default()).unwrap();
    outcome(
        worst < 1e-12 && e1.energy == -7.6875 && e1.sub_barrier,
        format!(
            "energy forms agree on 500 configs: max relative gap {worst:.2e} (< 1e-12); Fig. 1 E = {} ħω, sub-barrier = {}",
            e1.energy, e1.sub_barrier
        ),
    )
}

fn p_of(cfg: &DimensionlessConfig) -> f64 {
    penetrability_dimensionless(cfg).unwrap().value
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let slack = 1e-12;
    let mut comparisons = 0;
    let mut violations = Vec::new();
    let mut check = |name: &str, lo: f64, hi: f64, increasing: bool, cfg: &DimensionlessConfig| {
        comparisons += 1;
        let ok = if increasing { hi >= lo - slack } else { hi <= lo + slack };
        if !ok {
            violations.push(format!("{name} at {cfg:?}: {lo} -> {hi}"));
        }
    };
    for _ in 0..300 {
        let gamma = random_gamma(&mut rng);
        let base = DimensionlessConfig {
            z: rng.random_range(-8.0..-0.2),
            v: rng.random_range(-0.99..-0.01),
            eps: inner_eps(&mut rng, gamma),
            r: rng.random_range(0.05..1.0),
            gamma,
            theta: rng.random_range(1.0..10.0),
        };
        let e = initial_energy(&base, Units::default()).unwrap();
        assert!(e.sub_barrier && !e.classical_pass, "sample is not sub-barrier: {base:?}");
        let p0 = p_of(&base);

        let (lo, hi) = DimensionlessConfig::eps_window(gamma);
        let eps2 = base.eps + rng.random_range(0.0..1.0) * (hi - (hi - lo) * 0.02 - base.eps);
        check("eps", p0, p_of(&DimensionlessConfig { eps: eps2, ..base }), true, &base);

        let theta2 = base.theta + rng.random_range(0.0..5.0);
        check("theta", p0, p_of(&DimensionlessConfig { theta: theta2, ..base }), true, &base);

        let z2 = base.z * rng.random_range(1.0..3.0);
        check("|z|", p0, p_of(&DimensionlessConfig { z: z2, ..base }), false, &base);

        let r2 = base.r + rng.random_range(0.0..1.0) * (1.0 - base.r);
        check("r", p0, p_of(&DimensionlessConfig { r: r2, ..base }), true, &base);

        // γ pairs at fixed ε, both inside their windows
        let eps = rng.random_range(0.2..3.0f64);
        let g_lo = (eps * eps - 1.0).max(0.0).sqrt();
        let width = eps - g_lo;
        let g1 = g_lo + width * rng.random_range(0.02..0.97);
        let g2 = g1 + (eps - width * 0.01 - g1) * rng.random_range(0.0..1.0);
        let a = DimensionlessConfig { gamma: g1, eps, ..base };
        let b = DimensionlessConfig { gamma: g2, eps, ..base };
        check("gamma", p_of(&a), p_of(&b), false, &a);
    }
    outcome(
        violations.is_empty() && comparisons >= 1000,
        format!(
            "monotonicity on sub-barrier samples: {comparisons} comparisons (ε, θ, γ, |z|, r), {} violations beyond 1e-12{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut below, mut above) = (0, 0);
    let mut bad = Vec::new();
    for k in 0..1000 {
        let gamma = random_gamma(&mut rng);
        let g = gamma + (1.0 + gamma * gamma).sqrt();
        let sub = k < 500;
        let v = if sub {
            let (lo, hi) = (-g, 1.0 / g);
            lo + (hi - lo) * rng.random_range(0.001..0.999)
        } else {
            -g - rng.random_range(0.001..3.0)
        };
        let cfg = DimensionlessConfig {
            z: rng.random_range(-8.0..-0.2),
            v,
            eps: inner_eps(&mut rng, gamma),
            r: if sub { rng.random_range(0.05..1.0) } else { rng.random_range(0.05..2.0) },
            gamma,
            theta: rng.random_range(1.0..10.0),
        };
        let e = initial_energy(&cfg, Units::default()).unwrap();
        let p = p_of(&cfg);
        if sub {
            if e.sub_barrier && p < 0.5 {
                below += 1;
            } else {
                bad.push(format!("sub-barrier {cfg:?}: E={} P={p}", e.energy));
            }
        } else if e.classical_pass && p > 0.5 {
            above += 1;
        } else {
            bad.push(format!("classical pass {cfg:?}: P={p}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "bound structure: {below}/500 sub-barrier with P < 1/2, {above}/500 classical-pass with P > 1/2{}",
            bad.first().map(|v| format!("; first failure: {v}")).unwrap_or_default()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut trajectories = 0;
    let mut worst = f64::INFINITY;
    while trajectories < 200 {
        let gamma = random_gamma(&mut rng);
        let nu = (1.0f64 + gamma * gamma).sqrt();
        let eps = if rng.random_bool(0.5) {
            nu * rng.random_range(1.05..2.5)
        } else {
            inner_eps(&mut rng, gamma)
        };
        let cfg = DimensionlessConfig {
            z: rng.random_range(-6.0..6.0),
            v: rng.random_range(-2.0..2.0),
            eps,
            r: rng.random_range(0.2..2.0),
            gamma,
            theta: rng.random_range(1.0..8.0),
        };
        let units = random_units(&mut rng);
        let (params, s0) = dimensionless_to_dimensional_unchecked(&cfg, units).unwrap();
        if !params.constraint().satisfied {
            continue;
        }
        trajectories += 1;
        let floor = 0.25 * units.hbar * units.hbar;
        for k in 0..=40 {
            let t = 10.0 / units.omega * k as f64 / 40.0;
            let s = propagate(&params, &s0, t).unwrap();
            worst = worst.min(s.determinant() / floor);
        }
    }
    let gibbs = ModelParams::thermal(Units::default(), 1.0, 0.5, 1.0).unwrap().constraint();
    outcome(
        worst >= 1.0 - 1e-9 && !gibbs.satisfied && (gibbs.margin + 0.0625).abs() < 1e-15,
        format!(
            "uncertainty on {trajectories} constraint-satisfying trajectories: min σ(t)/(ħ²/4) = {worst:.12} (≥ 1 − 1e-9); λ=1, μ=0.5, θ=1 margin = {} (violation reported: {})",
            gibbs.margin, !gibbs.satisfied
        ),
    )
}

/// Positive-term series, independent of the library's error function.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-18 * sum {
        n += 1.0;
        term *= 2.0 * x * x / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum
}

fn criterion_9() -> Outcome {
    let c = closed_form_ratio(&fig1()).unwrap();
    let p = p_of(&fig1());
    let oracle = 0.5 * (1.0 - erf_series(-c.ratio / std::f64::consts::SQRT_2));
    outcome(
        c.radicand == 1.5625 && (p - oracle).abs() < 1e-15 && (p - 0.1151).abs() < 5e-5,
        format!(
            "Fig. 1 spot value: radicand {} (= 1.5625), P = {p:.6} vs series oracle {oracle:.6} (gap {:.1e})",
            c.radicand,
            (p - oracle).abs()
        ),
    )
}

fn criterion_10() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_dtunnel"))
            .args(["validate", "--seed", "42"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        same && a.status.success(),
        format!(
            "`validate --seed 42` twice: {} bytes each, identical = {same}, exit {:?}",
            a.stdout.len(),
            a.status.code()
        ),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n:>2}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
