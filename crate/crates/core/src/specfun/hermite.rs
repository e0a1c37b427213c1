//! Hermite functions H_nu(x) of real degree.
//!
//! H_nu(x) = 2^nu sqrt(pi) [ M(-nu/2, 1/2, x^2) / Gamma((1-nu)/2)
//!                          - 2x M((1-nu)/2, 3/2, x^2) / Gamma(-nu/2) ]
//!
//! The gamma factors enter through 1/Gamma, which is entire, so integer
//! degrees need no special treatment in this form. For x > 2 the two terms
//! cancel to many digits; there w(x) = e^{-x^2/2} H_nu(x), which is recessive
//! at +inf, is integrated inward from its large-x asymptotic series.

use std::f64::consts::PI;

use super::gamma::rgamma;
use super::kummer;
use super::taylor;
use crate::error::{Error, Result};

pub const NU_MIN: f64 = -1.0;
pub const NU_MAX: f64 = 30.0;
pub const X_MAX: f64 = 15.0;

const SERIES_X_MAX: f64 = 2.0;
const STEP: f64 = 0.25;

fn check(nu: f64, x: f64) -> Result<()> {
    if !(nu.is_finite() && x.is_finite()) {
        return Err(Error::domain("hermite: non-finite argument"));
    }
    if !(NU_MIN..=NU_MAX).contains(&nu) {
        return Err(Error::domain(format!("hermite: degree {nu} outside [-1, 30]")));
    }
    if x.abs() > X_MAX {
        return Err(Error::domain(format!("hermite: |x| = {} > 15", x.abs())));
    }
    Ok(())
}

/// Hermite function of real degree `nu` in [-1, 30], |x| <= 15.
pub fn hermite_nu(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    raw(nu, x)
}

/// d/dx H_nu(x) = 2 nu H_{nu-1}(x).
pub fn hermite_nu_prime(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    if nu == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * nu * raw(nu - 1.0, x)?)
}

/// H_nu(x) without the public domain check (degree may go down to -2).
pub(crate) fn raw(nu: f64, x: f64) -> Result<f64> {
    if nu >= 0.0 && nu == nu.floor() {
        return Ok(polynomial(nu as usize, x));
    }
    if x <= SERIES_X_MAX {
        kummer_form(nu, x)
    } else {
        let (w, _) = weber_inward(nu, x)?;
        Ok(w * (0.5 * x * x).exp())
    }
}

/// (e^{-x^2/2} H_nu(x), d/dx of the same); the natural interior wavefunction.
pub(crate) fn weber(nu: f64, x: f64) -> Result<(f64, f64)> {
    if x > SERIES_X_MAX && !(nu >= 0.0 && nu == nu.floor()) {
        return weber_inward(nu, x);
    }
    let g = (-0.5 * x * x).exp();
    let h = raw(nu, x)?;
    let hp = if nu == 0.0 { 0.0 } else { 2.0 * nu * raw(nu - 1.0, x)? };
    Ok((g * h, g * (hp - x * h)))
}

fn polynomial(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn kummer_form(nu: f64, x: f64) -> Result<f64> {
    let z = x * x;
    let r1 = rgamma(0.5 * (1.0 - nu));
    let r2 = rgamma(-0.5 * nu);
    let mut acc = 0.0;
    if r1 != 0.0 {
        acc += kummer::series(-0.5 * nu, 0.5, z)? * r1;
    }
    if r2 != 0.0 {
        acc -= 2.0 * x * kummer::series(0.5 * (1.0 - nu), 1.5, z)? * r2;
    }
    Ok(2f64.powf(nu) * PI.sqrt() * acc)
}

// e^{-x^2/2} H_nu(x) from the asymptotic series, x large and positive.
fn weber_asymptotic(nu: f64, x: f64) -> f64 {
    let a = -0.5 * nu;
    let c = 0.5 * (1.0 - nu);
    let inv = 1.0 / (x * x);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    let growth_ok = 0.5 * nu.abs() + 2.0;
    for k in 0..500 {
        let kf = k as f64;
        term *= -(a + kf) * (c + kf) / (kf + 1.0) * inv;
        if term == 0.0 {
            break;
        }
        if kf > growth_ok && term.abs() > last {
            break;
        }
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && kf > growth_ok {
            break;
        }
        last = term.abs();
    }
    (nu * (2.0 * x).ln() - 0.5 * x * x).exp() * sum
}

fn weber_inward(nu: f64, x: f64) -> Result<(f64, f64)> {
    let start = x.max(6.0 + (2.0 * nu + 1.0).max(0.0).sqrt());
    let w = weber_asymptotic(nu, start);
    let wm = weber_asymptotic(nu - 1.0, start);
    // w' = e^{-x^2/2} (2 nu H_{nu-1} - x H_nu)
    let dw = 2.0 * nu * wm - start * w;
    if start == x {
        return Ok((w, dw));
    }
    let c = 2.0 * nu + 1.0;
    Ok(taylor::integrate(|t| [t * t - c, 2.0 * t, 1.0], start, x, w, dw, STEP))
}
