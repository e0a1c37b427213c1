//! Small numerical helpers shared by the pipelines.

use crate::error::{Error, Result};

/// Brent's method on a bracket with f(a) f(b) <= 0.
pub(crate) fn brent(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numerical("root not bracketed"));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() <= xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0 || (b - c).abs() < xtol
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0 || (c - d).abs() < xtol
        };
        if outside || slow {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() * fs.signum() < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Ordinary least-squares line y = slope x + intercept with its R^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::domain("line fit needs at least three paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::domain("line fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let m = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= m * p;
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Levenberg-Marquardt least squares for a model with N parameters.
///
/// `model(p, x)` returns the value and the gradient with respect to `p`.
/// Returns the parameters and the final sum of squared residuals.
pub(crate) fn levenberg_marquardt<const N: usize>(
    model: impl Fn(&[f64; N], f64) -> (f64, [f64; N]),
    xs: &[f64],
    ys: &[f64],
    p0: [f64; N],
) -> Result<([f64; N], f64)> {
    let cost = |p: &[f64; N]| -> f64 {
        xs.iter().zip(ys).map(|(&x, &y)| (y - model(p, x).0).powi(2)).sum()
    };
    let mut p = p0;
    let mut c = cost(&p);
    if !c.is_finite() {
        return Err(Error::numerical("non-finite initial residual in least squares"));
    }
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [[0.0; N]; N];
        let mut jtr = [0.0; N];
        for (&x, &y) in xs.iter().zip(ys) {
            let (v, g) = model(&p, x);
            let r = y - v;
            for i in 0..N {
                jtr[i] += g[i] * r;
                for j in 0..N {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve_dense(a, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for i in 0..N {
                trial[i] += step[i];
            }
            let ct = cost(&trial);
            if ct.is_finite() && ct <= c {
                let rel = (c - ct) / c.max(1e-300);
                let small = step.iter().zip(&p).all(|(s, v)| s.abs() <= 1e-14 * v.abs().max(1e-10));
                p = trial;
                c = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-15 || small {
                    return Ok((p, c));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            return Ok((p, c));
        }
    }
    Ok((p, c))
}

/// Fixed-format float used in every data file: 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = brent(f, 0.0, 2.0, -2.0, 6.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12).is_err());
    }

    #[test]
    fn line_fit_exact() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-13);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_solve() {
        let x = solve_dense([[0.0, 2.0], [3.0, 1.0]], [4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_dense([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }

    #[test]
    fn lm_recovers_exponential() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-0.7 * x).exp()).collect();
        let model = |p: &[f64; 2], x: f64| {
            let e = (-p[1] * x).exp();
            (p[0] * e, [e, -p[0] * x * e])
        };
        let (p, c) = levenberg_marquardt(model, &xs, &ys, [1.0, 0.2]).unwrap();
        assert!((p[0] - 2.5).abs() < 1e-10 && (p[1] - 0.7).abs() < 1e-10, "{p:?} {c}");
    }

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
    }
}
