//! Digamma, trigamma and log-gamma for positive real arguments.
//!
//! All three shift the argument upward with the standard recurrences until
//! it reaches [`ASYMPTOTIC_THRESHOLD`], then evaluate a truncated asymptotic
//! series in `1/x`. With seven correction terms the truncation error at the
//! threshold is below `1e-16`, so the accuracy budget of `1e-10` on
//! `[1e-3, 1e6]` is spent almost entirely on rounding.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// `B_{2k} / (2k)` for k = 1..7, used by the digamma series.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// `B_{2k}` for k = 1..7, used by the trigamma series.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// `B_{2k} / (2k (2k - 1))` for k = 1..7, used by the Stirling series.
const STIRLING_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
];

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { function, x })
    }
}

/// Digamma function `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_domain("digamma", x)?;
    Ok(digamma_unchecked(x))
}

/// Trigamma function `ψ'(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_domain("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_domain("log_gamma", x)?;
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut term = inv2;
    let mut series = 0.0;
    for c in DIGAMMA_SERIES {
        series += c * term;
        term *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

pub(crate) fn trigamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // ψ'(x) ~ 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}
    let mut term = inv2 * inv;
    let mut series = 0.0;
    for b in BERNOULLI_EVEN {
        series += b * term;
        term *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < ASYMPTOTIC_THRESHOLD {
        product *= shifted;
        shifted += 1.0;
    }
    let inv = 1.0 / shifted;
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = 0.0;
    for c in STIRLING_SERIES {
        series += c * term;
        term *= inv2;
    }
    let stirling = (shifted - 0.5) * shifted.ln() - shifted + 0.5 * (2.0 * PI).ln() + series;
    stirling - product.ln()
}
