//! Taylor-series stepping for y'' = q(x) y with quadratic q.
//!
//! Both the Airy equation (q = s) and the Weber equation for
//! e^{-x^2/2} H_nu(x) (q = x^2 - 2nu - 1) are of this form, so the Taylor
//! coefficients obey a four-term recurrence and a single step is exact up to
//! rounding once the series has converged.

/// Advance (y, y') from x0 to x0 + h where y'' = (q0 + q1 t + q2 t^2) y, t = x - x0.
pub(crate) fn step(q: [f64; 3], y: f64, dy: f64, h: f64) -> (f64, f64) {
    // c_{n+2} (n+2)(n+1) = q0 c_n + q1 c_{n-1} + q2 c_{n-2}
    let mut c: Vec<f64> = Vec::with_capacity(64);
    c.push(y);
    c.push(dy);
    let mut val = y + dy * h;
    let mut der = dy;
    let mut hpow = h; // h^{m-1} for the term of order m
    let scale = y.abs().max(dy.abs() * h.abs()).max(f64::MIN_POSITIVE);
    let mut quiet = 0;
    for n in 0..MAX_TERMS {
        let mut rhs = q[0] * c[n];
        if n >= 1 {
            rhs += q[1] * c[n - 1];
        }
        if n >= 2 {
            rhs += q[2] * c[n - 2];
        }
        let m = n + 2;
        let cm = rhs / (m * (m - 1)) as f64;
        c.push(cm);
        der += m as f64 * cm * hpow;
        hpow *= h;
        let term = cm * hpow;
        val += term;
        if term.abs() <= 1e-18 * scale.max(val.abs()) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    (val, der)
}

const MAX_TERMS: usize = 400;

/// Integrate from x0 to x1 in steps no longer than `max_step`.
pub(crate) fn integrate(
    q_at: impl Fn(f64) -> [f64; 3],
    x0: f64,
    x1: f64,
    mut y: f64,
    mut dy: f64,
    max_step: f64,
) -> (f64, f64) {
    let span = x1 - x0;
    if span == 0.0 {
        return (y, dy);
    }
    let n = (span.abs() / max_step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    for i in 0..n {
        let x = x0 + h * i as f64;
        (y, dy) = step(q_at(x), y, dy, h);
    }
    (y, dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        // y'' = y, y = e^x
        let (y, dy) = step([1.0, 0.0, 0.0], 1.0, 1.0, 0.5);
        assert!((y - 0.5f64.exp()).abs() < 1e-15);
        assert!((dy - 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn oscillator() {
        // y'' = -y, y = cos x
        let (y, dy) = integrate(|_| [-1.0, 0.0, 0.0], 0.0, 10.0, 1.0, 0.0, 0.25);
        assert!((y - 10f64.cos()).abs() < 1e-13);
        assert!((dy + 10f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn gaussian_weber() {
        // y = e^{-x^2/2} solves y'' = (x^2 - 1) y
        let q = |x: f64| [x * x - 1.0, 2.0 * x, 1.0];
        let (y, dy) = integrate(q, 3.0, -1.0, (-4.5f64).exp(), -3.0 * (-4.5f64).exp(), 0.25);
        let exact = (-0.5f64).exp();
        assert!(((y - exact) / exact).abs() < 1e-12, "{y} vs {exact}");
        assert!(((dy - exact) / exact).abs() < 1e-12);
    }
}
