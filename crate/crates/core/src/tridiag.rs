//! Symmetric tridiagonal eigenproblems by Sturm bisection and inverse iteration.

/// Symmetric tridiagonal matrix with diagonal `diag` and constant off-diagonal `off`.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl SymTridiag {
    fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d)) - r;
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)) + r;
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut q = 1.0;
        let mut count = 0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - x } else { d - x - e2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` lowest eigenvalues in ascending order, to full precision.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (lo0, hi0) = self.bounds();
        let mut out = Vec::with_capacity(k);
        let mut floor = lo0;
        for idx in 0..k.min(self.diag.len()) {
            let (mut lo, mut hi) = (floor, hi0);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > idx {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let v = 0.5 * (lo + hi);
            out.push(v);
            floor = lo;
        }
        out
    }

    fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solve (A - shift) y = b with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let eps = f64::EPSILON * self.bounds().1.abs().max(1.0);
        // rows become upper-triangular with up to two super-diagonals
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let mut cur = [self.diag[0] - shift, if n > 1 { self.off } else { 0.0 }, 0.0];
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if cur[0] == 0.0 { eps } else { cur[0] };
                break;
            }
            let next = [self.off, self.diag[i + 1] - shift, if i + 2 < n { self.off } else { 0.0 }];
            if cur[0].abs() >= next[0].abs() {
                let p = if cur[0] == 0.0 { eps } else { cur[0] };
                let m = next[0] / p;
                u0[i] = p;
                u1[i] = cur[1];
                u2[i] = cur[2];
                rhs[i + 1] -= m * rhs[i];
                cur = [next[1] - m * cur[1], next[2] - m * cur[2], 0.0];
            } else {
                let m = cur[0] / next[0];
                u0[i] = next[0];
                u1[i] = next[1];
                u2[i] = next[2];
                rhs.swap(i, i + 1);
                rhs[i + 1] -= m * rhs[i];
                cur = [cur[1] - m * next[1], cur[2] - m * next[2], 0.0];
            }
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u0[i];
        }
        y
    }

    /// Eigenvector for `lambda`, orthogonalised against `previous` (unit-norm in l2).
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let n = self.diag.len();
        // deterministic, non-symmetric start so both parities are seeded
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract()).collect();
        for _ in 0..4 {
            orthogonalise(&mut v, previous);
            normalise(&mut v);
            v = self.shifted_solve(lambda, &v);
            orthogonalise(&mut v, previous);
            normalise(&mut v);
            let av = self.mat_vec(&v);
            let res: f64 = av.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            if res < 1e-10 * lambda.abs().max(1.0) {
                break;
            }
        }
        // fix the sign: first sizeable lobe positive
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    }
}

fn normalise(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn orthogonalise(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}
