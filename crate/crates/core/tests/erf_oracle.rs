//! The error function against a positive-term series and against
//! high-precision reference values.

use dtunnel_core::special::{erf, erfc, half_erfc};
use dtunnel_core::tunneling::{closed_form_ratio, penetrability_dimensionless};
use dtunnel_core::DimensionlessConfig;

/// `erf(x) = (2/√π) e^{−x²} Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))`, all terms positive.
fn erf_series(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_series(-x);
    }
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

const REFERENCE: [(f64, f64); 9] = [
    (0.1, 0.1124629160182848922),
    (0.5, 0.5204998778130465377),
    (0.84375, 0.7672256612323416335),
    (1.0, 0.8427007929497148693),
    (2.5, 0.9995930479825550411),
    (3.5, 0.9999992569016276586),
    (4.0, 0.9999999845827420997),
    (6.0, 0.9999999999999999784803),
    (0.0, 0.0),
];

#[test]
fn series_oracle_reproduces_reference_values() {
    for (x, want) in REFERENCE {
        assert!((erf_series(x) - want).abs() <= 1e-15 * want, "x = {x}");
    }
}

#[test]
fn library_erf_matches_reference_and_series() {
    for (x, want) in REFERENCE {
        assert!((erf(x) - want).abs() <= 2e-16, "x = {x}: {}", erf(x));
        assert_eq!(erf(-x), -erf(x));
    }
    for k in 0..=400 {
        let x = k as f64 * 0.01;
        let (a, b) = (erf(x), erf_series(x));
        assert!((a - b).abs() <= 1.5e-15 * b, "x = {x}: {a} vs {b}");
    }
}

#[test]
fn complementary_tails() {
    let tail = half_erfc(3.0 / std::f64::consts::SQRT_2);
    assert!((tail - 1.349898031630094526e-3).abs() < 1e-15 * 1.35e-3);
    assert!((erfc(6.0) - 2.151973671249891311e-17).abs() < 1e-14 * 2.15e-17);
    // the series agrees where 1 − erf keeps its digits
    for x in [0.2, 0.7, 1.3, 2.0] {
        assert!((erfc(x) - (1.0 - erf_series(x))).abs() < 1e-15);
    }
}

#[test]
fn figure_one_spot_value() {
    let cfg = DimensionlessConfig {
        z: -3.0,
        v: -0.5,
        eps: 0.5,
        r: 0.5,
        gamma: 0.0,
        theta: 1.0,
    };
    let c = closed_form_ratio(&cfg).unwrap();
    assert_eq!(c.radicand, 1.5625);
    assert_eq!(c.ratio, -1.2);
    let p = penetrability_dimensionless(&cfg).unwrap().value;
    let oracle = 0.5 * (1.0 - erf_series(1.2 / std::f64::consts::SQRT_2));
    assert!((p - oracle).abs() < 1e-15);
    assert!((p - 0.11506967022170827665).abs() < 1e-16);
    assert!((p - 0.1151).abs() < 5e-5);
}
