//! Gamma function family on the real line.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(pi x) with exact argument reduction, so zeros at the integers are exact.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

// Lanczos sum for x >= 0.5, returns ln Gamma(x).
fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// ln|Gamma(x)| together with the sign of Gamma(x).
///
/// At the poles (non-positive integers) returns `(inf, 1.0)`.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, 1.0);
    }
    if x >= 0.5 {
        (ln_gamma_lanczos(x), 1.0)
    } else {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s = sin_pi(x);
        let lg = PI.ln() - s.abs().ln() - ln_gamma_lanczos(1.0 - x);
        (lg, s.signum())
    }
}

pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    let (lg, sign) = ln_gamma(x);
    sign * lg.exp()
}

/// 1/Gamma(x); entire, exactly zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        (-ln_gamma_lanczos(x)).exp()
    } else {
        sin_pi(x) * ln_gamma_lanczos(1.0 - x).exp() / PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn factorials() {
        let mut fact = 1.0;
        for n in 1..20 {
            assert!(rel(gamma(n as f64), fact) < 1e-13, "n = {n}");
            fact *= n as f64;
        }
    }

    #[test]
    fn half_integers_and_reflection() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-1.5), 4.0 / 3.0 * PI.sqrt()) < 1e-14);
        // Gamma(2/3), Gamma(1/3) reference values
        assert!(rel(gamma(2.0 / 3.0), 1.354_117_939_426_400_4) < 1e-14);
        assert!(rel(gamma(1.0 / 3.0), 2.678_938_534_707_747_6) < 1e-14);
    }

    #[test]
    fn reciprocal_vanishes_at_poles() {
        for n in 0..20 {
            assert_eq!(rgamma(-(n as f64)), 0.0);
        }
        // near a pole 1/Gamma(-n + e) ~ (-1)^n n! e
        let e = 1e-9;
        assert!(rel(rgamma(-3.0 + e), -6.0 * e) < 1e-6);
    }

    #[test]
    fn sin_pi_exact_zeros() {
        for n in -10..10 {
            assert_eq!(sin_pi(n as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-10.25) + (PI / 4.0).sin()).abs() < 1e-15);
    }
}
