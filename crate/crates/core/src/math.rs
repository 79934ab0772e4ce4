//! Small special-function helpers used by the moment formulas and the
//! Gaussian jump measure.

use std::f64::consts::PI;

/// Gamma function.
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, via erf.
#[inline]
pub fn normal_cdf(y: f64) -> f64 {
    0.5 * (1.0 + libm::erf(y / std::f64::consts::SQRT_2))
}

/// n! as a float; n is small everywhere this is used.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
