//! Confluent hypergeometric function M(a, b, x) = 1F1(a; b; x).

use crate::error::{Error, Result};

pub const KUMMER_DOMAIN: f64 = 400.0;
const MAX_TERMS: usize = 10_000;

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.floor()
}

/// M(a, b, x) for |x| <= 400, b not a non-positive integer.
pub fn kummer_m(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && x.is_finite()) {
        return Err(Error::domain("kummer_m: non-finite argument"));
    }
    if is_nonpositive_integer(b) {
        return Err(Error::domain(format!("kummer_m: b = {b} is a pole")));
    }
    if x.abs() > KUMMER_DOMAIN {
        return Err(Error::domain(format!("kummer_m: |x| = {} > 400", x.abs())));
    }
    if x < 0.0 && !is_nonpositive_integer(a) {
        // Kummer transformation keeps the series free of cancellation.
        return Ok(x.exp() * series(b - a, b, -x)?);
    }
    series(a, b, x)
}

pub(crate) fn series(a: f64, b: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    let terminating = is_nonpositive_integer(a);
    let past = a.abs() + 2.0;
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if terminating && term == 0.0 {
            return Ok(sum);
        }
        if kf > past && term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::numerical(format!("kummer_m({a}, {b}, {x}) series did not converge")))
}
