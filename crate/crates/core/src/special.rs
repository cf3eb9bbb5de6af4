//! Error function. Backed by `libm` (FreeBSD msun lineage), which switches
//! to the complementary branch for `|x| ≥ 0.84375`.

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `½(1 − erf(x))`, evaluated as `½ erfc(x)` so that deep tails keep
/// full relative precision.
pub fn half_erfc(x: f64) -> f64 {
    0.5 * libm::erfc(x)
}
