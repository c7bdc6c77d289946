//! Trigamma function.

use crate::error::{Error, Result};

/// Shift the argument up to at least this value before using the series.
const ASYMPTOTIC_FROM: f64 = 12.0;

/// Bernoulli numbers `B_2, B_4, ..., B_10`; the series term for `B_2k` is
/// `B_2k / x^(2k+1)`.
const BERNOULLI: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];

/// `psi_1(x) = d^2/dx^2 ln Gamma(x)` for `x > 0`.
///
/// Applies `psi_1(x) = psi_1(x + 1) + 1/x^2` until the argument reaches 12,
/// then the asymptotic series
/// `1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1)` through the `x^-11` term.
/// The recurrence terms are added largest-last.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonpositiveArgument(x));
    }

    let mut shifted = x;
    let mut steps = 0usize;
    while shifted < ASYMPTOTIC_FROM {
        shifted += 1.0;
        steps += 1;
    }

    let inv = 1.0 / shifted;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv * inv2;
    let mut tail = [0.0; BERNOULLI.len()];
    for (t, b) in tail.iter_mut().zip(BERNOULLI) {
        *t = b * power;
        power *= inv2;
    }
    for t in tail.iter().rev() {
        series += t;
    }
    let mut value = series + 0.5 * inv2 + inv;

    for k in (0..steps).rev() {
        let z = x + k as f64;
        value += 1.0 / (z * z);
    }
    Ok(value)
}
