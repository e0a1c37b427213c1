//! Airy functions Ai, Bi and their derivatives for real argument.
//!
//! On |s| < 9 values come from a table of nodes (spacing 1/4) advanced by one
//! short Taylor step of the Airy equation y'' = s y. The table is seeded with
//! the closed-form values at s = 0; Ai on the positive axis is instead seeded
//! from the asymptotic expansion at s = 9 and integrated towards the origin,
//! the only stable direction for the recessive solution. Beyond |s| = 9 the
//! standard asymptotic expansions are summed to their smallest term, which is
//! below e^{-36} there.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use super::taylor;
use crate::error::{Error, Result};

/// Ai(0)
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// Ai'(0)
pub const AI0_PRIME: f64 = -0.258_819_403_792_806_8;
/// Bi(0)
pub const BI0: f64 = 0.614_926_627_446_000_7;
/// Bi'(0)
pub const BI0_PRIME: f64 = 0.448_288_357_353_826_36;

/// Domain of the unscaled evaluation.
pub const AIRY_DOMAIN: f64 = 200.0;

const NODE_STEP: f64 = 0.25;
const NODES_PER_SIDE: usize = 36;
const ASYMPTOTIC_FROM: f64 = NODE_STEP * NODES_PER_SIDE as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub bi: f64,
    pub ai_prime: f64,
    pub bi_prime: f64,
}

impl AiryPair {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Airy functions with the exponential behaviour on the positive axis divided out.
///
/// For s > 0 the fields hold Ai e^{zeta}, Ai' e^{zeta}, Bi e^{-zeta} and
/// Bi' e^{-zeta} with zeta = (2/3) s^{3/2}; for s <= 0, zeta = 0 and the
/// fields are the plain values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiry {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
    pub zeta: f64,
}

struct Table {
    // index i <-> s = (i - NODES_PER_SIDE) * NODE_STEP
    ai: Vec<(f64, f64)>,
    bi: Vec<(f64, f64)>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn build_table() -> Table {
    let n = 2 * NODES_PER_SIDE + 1;
    let mid = NODES_PER_SIDE;
    let mut ai = vec![(0.0, 0.0); n];
    let mut bi = vec![(0.0, 0.0); n];
    ai[mid] = (AI0, AI0_PRIME);
    bi[mid] = (BI0, BI0_PRIME);
    let node = |i: usize| (i as f64 - mid as f64) * NODE_STEP;

    for i in mid..n - 1 {
        let (y, dy) = bi[i];
        bi[i + 1] = taylor::step([node(i), 1.0, 0.0], y, dy, NODE_STEP);
    }
    for i in (1..=mid).rev() {
        let q = [node(i), 1.0, 0.0];
        let (y, dy) = ai[i];
        ai[i - 1] = taylor::step(q, y, dy, -NODE_STEP);
        let (y, dy) = bi[i];
        bi[i - 1] = taylor::step(q, y, dy, -NODE_STEP);
    }
    let far = asymptotic_positive(ASYMPTOTIC_FROM);
    let e = (-far.zeta).exp();
    ai[n - 1] = (far.ai * e, far.ai_prime * e);
    for i in (mid + 2..n).rev() {
        let (y, dy) = ai[i];
        ai[i - 1] = taylor::step([node(i), 1.0, 0.0], y, dy, -NODE_STEP);
    }
    Table { ai, bi }
}

fn from_table(s: f64) -> AiryPair {
    let t = table();
    let k = (s / NODE_STEP).round();
    let i = (k as i64 + NODES_PER_SIDE as i64) as usize;
    let s0 = k * NODE_STEP;
    let h = s - s0;
    let q = [s0, 1.0, 0.0];
    let (ai, ai_prime) = taylor::step(q, t.ai[i].0, t.ai[i].1, h);
    let (bi, bi_prime) = taylor::step(q, t.bi[i].0, t.bi[i].1, h);
    AiryPair { ai, bi, ai_prime, bi_prime }
}

/// Coefficients u_k, v_k of the asymptotic expansions, generated on demand.
fn uv(k: usize, u_prev: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 1.0);
    }
    let kf = k as f64;
    let u = u_prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
        / ((2.0 * kf - 1.0) * 216.0 * kf);
    let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
    (u, v)
}

// Sums of u_k/zeta^k and v_k/zeta^k, plain and alternating, truncated at the smallest term.
fn asymptotic_sums(zeta: f64) -> [f64; 4] {
    let mut sums = [0.0f64; 4];
    let mut u = 1.0;
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        let (uk, vk) = uv(k, u);
        u = uk;
        let tu = uk * zk;
        let tv = vk * zk;
        let mag = tu.abs().max(tv.abs());
        if k > 0 && mag > last {
            break;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sums[0] += tu;
        sums[1] += sign * tu;
        sums[2] += tv;
        sums[3] += sign * tv;
        if mag < 1e-17 {
            break;
        }
        last = mag;
        zk /= zeta;
    }
    sums
}

fn asymptotic_positive(s: f64) -> ScaledAiry {
    let zeta = 2.0 / 3.0 * s * s.sqrt();
    let [su, su_alt, sv, sv_alt] = asymptotic_sums(zeta);
    let q = s.sqrt().sqrt();
    let rpi = PI.sqrt();
    ScaledAiry {
        ai: su_alt / (2.0 * rpi * q),
        ai_prime: -q * sv_alt / (2.0 * rpi),
        bi: su / (rpi * q),
        bi_prime: q * sv / rpi,
        zeta,
    }
}

fn asymptotic_negative(s: f64) -> AiryPair {
    let x = -s;
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    // P and Q series in 1/zeta^2, split by parity
    let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
    let mut u = 1.0;
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        let (uk, vk) = uv(k, u);
        u = uk;
        let tu = uk * zk;
        let tv = vk * zk;
        let mag = tu.abs().max(tv.abs());
        if k > 0 && mag > last {
            break;
        }
        // (-1)^{floor(k/2)}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pu += sign * tu;
            pv += sign * tv;
        } else {
            qu += sign * tu;
            qv += sign * tv;
        }
        if mag < 1e-17 {
            break;
        }
        last = mag;
        zk /= zeta;
    }
    let theta = zeta + FRAC_PI_4;
    let (sn, cs) = theta.sin_cos();
    let q = x.sqrt().sqrt();
    let rpi = PI.sqrt();
    AiryPair {
        ai: (sn * pu - cs * qu) / (rpi * q),
        bi: (cs * pu + sn * qu) / (rpi * q),
        ai_prime: -q * (cs * pv + sn * qv) / rpi,
        bi_prime: q * (sn * pv - cs * qv) / rpi,
    }
}

/// Ai, Bi, Ai', Bi' at `s`, for |s| <= 200.
///
/// Past s ~ 104 Bi overflows and Ai underflows; use [`airy_scaled`] there.
pub fn airy(s: f64) -> Result<AiryPair> {
    if !s.is_finite() || s.abs() > AIRY_DOMAIN {
        return Err(Error::domain(format!("airy argument {s} outside [-200, 200]")));
    }
    Ok(airy_unchecked(s))
}

fn airy_unchecked(s: f64) -> AiryPair {
    if s.abs() < ASYMPTOTIC_FROM {
        from_table(s)
    } else if s > 0.0 {
        let a = asymptotic_positive(s);
        let (up, down) = (a.zeta.exp(), (-a.zeta).exp());
        AiryPair {
            ai: a.ai * down,
            ai_prime: a.ai_prime * down,
            bi: a.bi * up,
            bi_prime: a.bi_prime * up,
        }
    } else {
        asymptotic_negative(s)
    }
}

/// Exponentially scaled Airy functions; no upper limit on `s`, s >= -1e4.
pub fn airy_scaled(s: f64) -> Result<ScaledAiry> {
    if !s.is_finite() || s < -1e4 {
        return Err(Error::domain(format!("scaled airy argument {s} outside [-1e4, inf)")));
    }
    if s >= ASYMPTOTIC_FROM {
        return Ok(asymptotic_positive(s));
    }
    let p = airy_unchecked(s);
    if s > 0.0 {
        let zeta = 2.0 / 3.0 * s * s.sqrt();
        let (up, down) = (zeta.exp(), (-zeta).exp());
        Ok(ScaledAiry {
            ai: p.ai * up,
            ai_prime: p.ai_prime * up,
            bi: p.bi * down,
            bi_prime: p.bi_prime * down,
            zeta,
        })
    } else {
        Ok(ScaledAiry { ai: p.ai, ai_prime: p.ai_prime, bi: p.bi, bi_prime: p.bi_prime, zeta: 0.0 })
    }
}
