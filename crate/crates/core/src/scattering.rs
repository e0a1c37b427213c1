//! Stationary scattering states of the tilted truncated trap.
//!
//! Inside the parabola the decaying solution is e^{-u^2/2} H_nu(u) with
//! u = x + f and nu = E + f^2/2 - 1/2. Outside, on the linear ramp, the
//! solution is a real superposition alpha Ai(s) + beta Bi(s) with
//! s = (2f)^{1/3} (x - x_t). Matching value and slope at x = -z/2 fixes
//! the interior amplitude a(E); P(E) = a^2 with alpha^2 + beta^2 = 1.
//!
//! Deep traps push the Airy argument at the edge to several hundred, where
//! Bi overflows and Ai underflows. Everything here is therefore carried in
//! the exponentially scaled form: with zeta = (2/3) s_e^{3/2},
//!
//! ```text
//! alpha ~ e^{+zeta} X,   X = phi Bi~' - phi' Bi~ / sigma
//! beta  ~ e^{-zeta} Y,   Y = phi' Ai~ / sigma - phi Ai~'
//! ```
//!
//! where the tilded Airy values have e^{-+zeta} divided out. A resonance is a
//! zero of X: the phase atan2(beta, alpha) then rises by pi over a width
//! 2 e^{-2 zeta} |Y| / |dX/dE|.

use std::f64::consts::{FRAC_PI_8, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{brent, fmt_num};
use crate::potential::TrapSpec;
use crate::specfun::{airy_scaled, weber, NU_MAX, NU_MIN, HERMITE_X_MAX};

/// Smallest energy interval the adaptive scan will bisect.
pub const RESOLUTION_FLOOR: f64 = 1e-12;

/// Upper end of the matching window above the barrier top.
pub const WINDOW_ABOVE_BARRIER: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub energy: f64,
    /// |a(E)|; overflows to infinity on resonance in very deep traps, where
    /// `ln_p` stays finite.
    pub a_amp: f64,
    pub ln_p: f64,
    pub alpha: f64,
    pub beta: f64,
    /// atan2(beta, alpha), principal branch.
    pub phase: f64,
}

/// Scaled matching coefficients at one energy.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Matching {
    pub x: f64,
    pub y: f64,
    pub zeta: f64,
}

impl Matching {
    /// ln(X^2 + e^{-4 zeta} Y^2)
    fn ln_norm2(&self) -> f64 {
        let a = 2.0 * self.x.abs().ln();
        let b = 2.0 * self.y.abs().ln() - 4.0 * self.zeta;
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    }

    pub fn ln_p(&self) -> f64 {
        -2.0 * PI.ln() - 2.0 * self.zeta - self.ln_norm2()
    }

    pub fn phase(&self) -> f64 {
        ((-2.0 * self.zeta).exp() * self.y).atan2(self.x)
    }

    fn coefficients(&self) -> (f64, f64) {
        let half = 0.5 * self.ln_norm2();
        let alpha = self.x.signum() * (self.x.abs().ln() - half).exp();
        let beta = self.y.signum() * (self.y.abs().ln() - 2.0 * self.zeta - half).exp();
        (alpha, beta)
    }
}

/// Interior solution e^{-u^2/2} H_nu(u) and its x-derivative at the trap edge.
pub fn interior_wave(spec: &TrapSpec, energy: f64) -> Result<(f64, f64)> {
    let nu = energy + 0.5 * spec.f * spec.f - 0.5;
    let u = spec.edge() + spec.f;
    if !energy.is_finite() || !(NU_MIN..=NU_MAX).contains(&nu) {
        return Err(Error::domain(format!(
            "energy {energy} gives Hermite degree {nu} outside [{NU_MIN}, {NU_MAX}]"
        )));
    }
    if u.abs() > HERMITE_X_MAX {
        return Err(Error::domain(format!("trap edge argument |{u}| exceeds {HERMITE_X_MAX}")));
    }
    weber(nu, u)
}

fn check_window(spec: &TrapSpec, energy: f64) -> Result<()> {
    if spec.f <= 0.0 {
        return Err(Error::Unsupported("zero tilt leaves no open decay channel".into()));
    }
    let v_edge = spec.geometry()?.v_edge;
    if !(energy > 0.0 && energy < v_edge + WINDOW_ABOVE_BARRIER) {
        return Err(Error::domain(format!(
            "energy {energy} outside the matching window (0, {})",
            v_edge + WINDOW_ABOVE_BARRIER
        )));
    }
    Ok(())
}

pub(crate) fn matching(spec: &TrapSpec, energy: f64) -> Result<Matching> {
    check_window(spec, energy)?;
    let (phi, dphi) = interior_wave(spec, energy)?;
    let sigma = (2.0 * spec.f).cbrt();
    let v_edge = spec.z * spec.z / 8.0 - 0.5 * spec.f * spec.z;
    let s = sigma * (v_edge - energy) / spec.f;
    let a = airy_scaled(s)?;
    let x = phi * a.bi_prime - dphi * a.bi / sigma;
    let y = dphi * a.ai / sigma - phi * a.ai_prime;
    if !(x.is_finite() && y.is_finite()) || (x == 0.0 && y == 0.0) {
        return Err(Error::numerical(format!("singular matching system at E = {energy}")));
    }
    Ok(Matching { x, y, zeta: a.zeta })
}

/// Match the interior and exterior solutions at x = -z/2.
pub fn match_amplitude(spec: &TrapSpec, energy: f64) -> Result<MatchResult> {
    let m = matching(spec, energy)?;
    let ln_p = m.ln_p();
    let (alpha, beta) = m.coefficients();
    Ok(MatchResult {
        energy,
        a_amp: (0.5 * ln_p).exp(),
        ln_p,
        alpha,
        beta,
        phase: m.phase(),
    })
}

/// Full-line wavefunction a(E) psi_E(x) of the matched scattering state.
pub fn scattering_wave(spec: &TrapSpec, energy: f64, x: f64) -> Result<f64> {
    let r = match_amplitude(spec, energy)?;
    if x >= spec.edge() {
        let nu = energy + 0.5 * spec.f * spec.f - 0.5;
        let u = x + spec.f;
        if u.abs() > HERMITE_X_MAX {
            return Ok(0.0);
        }
        Ok(r.a_amp * weber(nu, u)?.0)
    } else {
        let sigma = (2.0 * spec.f).cbrt();
        let x_t = (energy - spec.z * spec.z / 8.0) / spec.f;
        let p = crate::specfun::airy(sigma * (x - x_t))?;
        Ok(r.alpha * p.ai + r.beta * p.bi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub energy: f64,
    /// P(E); may saturate to 0 or infinity in very deep traps.
    pub p_value: f64,
    pub ln_p: f64,
    /// Unwrapped matching phase.
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakStatus {
    Resolved,
    UnresolvedNarrow,
}

impl PeakStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PeakStatus::Resolved => "resolved",
            PeakStatus::UnresolvedNarrow => "unresolved-narrow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakKind {
    /// The matching phase passes pi/2 (mod pi) while rising.
    PhaseCrossing,
    /// A broad maximum of P(E) with rising phase but no quarter-turn crossing,
    /// typical of levels that sit above the barrier.
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Phase centre (zero of the scaled Bi-coefficient), or the P maximum for
    /// [`PeakKind::Maximum`].
    pub energy: f64,
    pub kind: PeakKind,
    /// 2 / (d phase / dE) at the centre.
    pub gamma_phase: f64,
    pub status: PeakStatus,
    /// Sample closest to the centre.
    pub sample_index: usize,
    /// Samples between the enclosing base-grid points (the refined local grid).
    pub local_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub trap: TrapSpec,
    pub e_min: f64,
    pub e_max: f64,
    pub base_points: usize,
    pub samples: Vec<SpectrumSample>,
    pub peaks: Vec<Peak>,
}

#[derive(Clone, Copy)]
struct Raw {
    energy: f64,
    m: Matching,
    base: bool,
    // the interval ending at this sample hit the floor without resolving
    unresolved_before: bool,
}

fn raw_at(spec: &TrapSpec, energy: f64, base: bool) -> Result<Raw> {
    Ok(Raw { energy, m: matching(spec, energy)?, base, unresolved_before: false })
}

fn wrap(d: f64) -> f64 {
    let r = (d + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

// Bisect (lo, hi) until adjacent principal phases differ by at most pi/8.
// Pushes interior samples and `hi` in order.
fn refine(spec: &TrapSpec, lo: Raw, hi: Raw, out: &mut Vec<Raw>) -> Result<()> {
    let jump = wrap(hi.m.phase() - lo.m.phase()).abs();
    if jump <= FRAC_PI_8 {
        out.push(hi);
        return Ok(());
    }
    if hi.energy - lo.energy <= RESOLUTION_FLOOR {
        out.push(Raw { unresolved_before: true, ..hi });
        return Ok(());
    }
    let mid_e = 0.5 * (lo.energy + hi.energy);
    let mid = raw_at(spec, mid_e, false)?;
    refine(spec, lo, mid, out)?;
    refine(spec, mid, hi, out)
}

fn d_x(spec: &TrapSpec, e: f64) -> Result<f64> {
    let h = 1e-6 * e.abs().max(1.0);
    let up = matching(spec, e + h)?;
    let dn = matching(spec, e - h)?;
    // both evaluations share the scaling convention, so X is smooth in E
    Ok((up.x - dn.x) / (2.0 * h))
}

/// Width estimate from the phase slope at a zero of X.
pub(crate) fn phase_width(spec: &TrapSpec, e: f64) -> Result<f64> {
    let m = matching(spec, e)?;
    let dx = d_x(spec, e)?;
    Ok(2.0 * (m.y.abs().ln() - 2.0 * m.zeta - dx.abs().ln()).exp())
}

/// Sample P(E) with phase-driven refinement and locate the resonances.
pub fn scan_spectrum(spec: &TrapSpec, e_min: f64, e_max: f64, base_points: usize) -> Result<Spectrum> {
    if !(e_min > 0.0 && e_min < e_max) {
        return Err(Error::domain(format!("scan window needs 0 < e_min < e_max, got [{e_min}, {e_max}]")));
    }
    if base_points < 2 {
        return Err(Error::domain("scan needs at least two base points"));
    }
    check_window(spec, e_min)?;
    check_window(spec, e_max)?;
    let n = base_points;
    let step = (e_max - e_min) / (n - 1) as f64;
    let base: Vec<Raw> = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = if i == n - 1 { e_max } else { e_min + step * i as f64 };
            raw_at(spec, e, true)
        })
        .collect::<Result<_>>()?;
    let pieces: Vec<Vec<Raw>> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            refine(spec, base[i], base[i + 1], &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut raws = Vec::with_capacity(n + pieces.iter().map(Vec::len).sum::<usize>());
    raws.push(base[0]);
    for p in pieces {
        raws.extend(p);
    }

    let mut samples = Vec::with_capacity(raws.len());
    let mut phase = raws[0].m.phase();
    for (i, r) in raws.iter().enumerate() {
        if i > 0 {
            let mut d = wrap(r.m.phase() - raws[i - 1].m.phase());
            if r.unresolved_before {
                // an unresolved jump is a resonance passage, which raises the phase
                d = d.rem_euclid(2.0 * PI);
            }
            phase += d;
        }
        let ln_p = r.m.ln_p();
        samples.push(SpectrumSample { energy: r.energy, p_value: ln_p.exp(), ln_p, phase });
    }

    let mut peaks = Vec::new();
    for i in 0..raws.len() - 1 {
        let (a, b) = (&raws[i], &raws[i + 1]);
        if a.m.x.signum() == b.m.x.signum() || samples[i + 1].phase <= samples[i].phase {
            continue;
        }
        let centre = brent(|e| Ok(matching(spec, e)?.x), a.energy, b.energy, a.m.x, b.m.x, 1e-15)?;
        let status = if b.unresolved_before { PeakStatus::UnresolvedNarrow } else { PeakStatus::Resolved };
        let gamma_phase = phase_width(spec, centre)?;
        let sample_index = if (centre - a.energy) <= (b.energy - centre) { i } else { i + 1 };
        let lo = (0..=i).rev().find(|&k| raws[k].base).unwrap_or(0);
        let hi = (i + 1..raws.len()).find(|&k| raws[k].base).unwrap_or(raws.len() - 1);
        peaks.push(Peak {
            energy: centre,
            kind: PeakKind::PhaseCrossing,
            gamma_phase,
            status,
            sample_index,
            local_range: (lo, hi),
        });
    }

    let crossings = peaks.clone();
    for i in 1..samples.len() - 1 {
        let (l, c, r) = (&samples[i - 1], &samples[i], &samples[i + 1]);
        if !(c.ln_p >= l.ln_p && c.ln_p > r.ln_p) || r.phase <= l.phase {
            continue;
        }
        let covered = crossings
            .iter()
            .any(|p| (p.energy - c.energy).abs() <= p.gamma_phase.max(r.energy - l.energy));
        if covered {
            continue;
        }
        let top = golden_max(|e| Ok(matching(spec, e)?.ln_p()), l.energy, r.energy)?;
        let h = 1e-6 * top.abs().max(1.0);
        let slope = wrap(matching(spec, top + h)?.phase() - matching(spec, top - h)?.phase()) / (2.0 * h);
        if slope <= 0.0 {
            continue;
        }
        let lo = (0..=i).rev().find(|&k| raws[k].base).unwrap_or(0);
        let hi = (i + 1..raws.len()).find(|&k| raws[k].base).unwrap_or(raws.len() - 1);
        peaks.push(Peak {
            energy: top,
            kind: PeakKind::Maximum,
            gamma_phase: 2.0 / slope,
            status: PeakStatus::Resolved,
            sample_index: i,
            local_range: (lo, hi),
        });
    }
    peaks.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    Ok(Spectrum { trap: *spec, e_min, e_max, base_points, samples, peaks })
}

// Golden-section search for the maximum of a unimodal function on [a, b].
fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-12 * (1.0 + a.abs()) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (a + b))
}

impl Spectrum {
    pub fn resolved_peaks(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.status == PeakStatus::Resolved)
    }

    /// ln P(E) at an arbitrary energy of this trap.
    pub fn ln_p_at(&self, energy: f64) -> Result<f64> {
        Ok(matching(&self.trap, energy)?.ln_p())
    }

    /// Largest |phase step| between neighbours, ignoring intervals at the floor.
    pub fn max_resolved_phase_step(&self) -> f64 {
        self.samples
            .windows(2)
            .filter(|w| w[1].energy - w[0].energy > RESOLUTION_FLOOR)
            .map(|w| (w[1].phase - w[0].phase).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "# energy [hbar*omega], p_value [arb], phase [rad], log10_p [arb], peak [flag]\n",
        );
        let mut flags = vec![""; self.samples.len()];
        for p in &self.peaks {
            flags[p.sample_index] = p.status.label();
        }
        for (smp, flag) in self.samples.iter().zip(flags) {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_num(smp.energy),
                fmt_num(smp.p_value),
                fmt_num(smp.phase),
                fmt_num(smp.ln_p / std::f64::consts::LN_10),
                flag
            ));
        }
        s
    }
}

/// Total phase gained between two energies, measured on a fresh dense scan.
pub fn phase_rise(spec: &TrapSpec, e_lo: f64, e_hi: f64) -> Result<f64> {
    let sp = scan_spectrum(spec, e_lo, e_hi, 64)?;
    Ok(sp.samples.last().map(|s| s.phase).unwrap_or(0.0) - sp.samples[0].phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::taylor;
    use std::f64::consts::FRAC_PI_2;

    fn fig() -> TrapSpec {
        TrapSpec::new(4.4, 0.5).unwrap()
    }

    #[test]
    fn ground_gaussian_at_edge() {
        for z in [3.0, 4.4, 8.0] {
            let t = TrapSpec::new(z, 0.0).unwrap();
            let (v, d) = interior_wave(&t, 0.5).unwrap();
            let x: f64 = -z / 2.0;
            let g = (-0.5 * x * x).exp();
            assert!((v - g).abs() < 1e-14 * g.max(1e-300) + 1e-300);
            assert!((d + x * g).abs() < 1e-13 * g);
        }
    }

    #[test]
    fn first_excited_at_edge() {
        let t = TrapSpec::new(4.4, 0.0).unwrap();
        let x: f64 = -2.2;
        let g = (-0.5 * x * x).exp();
        let (v, d) = interior_wave(&t, 1.5).unwrap();
        assert!((v - 2.0 * x * g).abs() < 1e-13);
        assert!((d - (2.0 - 2.0 * x * x) * g).abs() < 1e-13);
    }

    #[test]
    fn interior_matches_shooting() {
        let t = fig();
        let e = 0.366;
        let nu = e + 0.125 - 0.5;
        // y'' = ((x + f)^2 - 2 nu - 1) y, expanded about each step start
        let q_at = |x: f64| {
            let u = x + t.f;
            [u * u - 2.0 * nu - 1.0, 2.0 * u, 1.0]
        };
        let (y, dy) = taylor::integrate(q_at, 8.0, t.edge(), 1e-12, -8.5e-12, 0.05);
        let (v, d) = interior_wave(&t, e).unwrap();
        assert!((dy / y - d / v).abs() < 1e-8);
    }

    #[test]
    fn recomposed_wave_is_smooth_at_edge() {
        let t = fig();
        for e in [0.2, 0.366, 0.9, 1.29, 2.0] {
            let r = match_amplitude(&t, e).unwrap();
            assert!((r.alpha.hypot(r.beta) - 1.0).abs() < 1e-12);
            assert!(r.a_amp >= 0.0 && r.a_amp.is_finite());
            let x = t.edge();
            let h = 1e-5;
            let inner = scattering_wave(&t, e, x).unwrap();
            let outer = scattering_wave(&t, e, x - 1e-13).unwrap();
            let scale = inner.abs().max(1e-3);
            assert!((inner - outer).abs() < 1e-10 * scale.max(1.0), "value jump at E={e}");
            let d_in = (scattering_wave(&t, e, x + 2.0 * h).unwrap() - inner) / (2.0 * h);
            let d_out = (outer - scattering_wave(&t, e, x - 2.0 * h).unwrap()) / (2.0 * h);
            assert!((d_in - d_out).abs() < 1e-4 * (1.0 + d_in.abs()), "slope jump at E={e}");
        }
    }

    #[test]
    fn ground_peak_towers_over_off_resonance() {
        let t = fig();
        let on = match_amplitude(&t, 0.366).unwrap().ln_p;
        let off = match_amplitude(&t, 0.3).unwrap().ln_p;
        assert!(on - off >= 1e3f64.ln());
    }

    #[test]
    fn zero_tilt_has_no_channel() {
        let t = TrapSpec::new(4.4, 0.0).unwrap();
        assert!(matches!(match_amplitude(&t, 0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn window_checked() {
        let t = fig();
        assert!(match_amplitude(&t, 0.0).is_err());
        assert!(match_amplitude(&t, 1.32 + 5.0).is_err());
        assert!(scan_spectrum(&t, 0.5, 0.4, 10).is_err());
    }

    #[test]
    fn two_resolved_peaks_at_reference_trap() {
        let sp = scan_spectrum(&fig(), 0.05, 1.5, 400).unwrap();
        assert_eq!(sp.peaks.len(), 2);
        assert!(sp.peaks.iter().all(|p| p.status == PeakStatus::Resolved));
        assert!((sp.peaks[0].energy - 0.365_522_275_660_541).abs() < 1e-9);
        assert!((sp.peaks[1].energy - 1.333_643_576_956_261).abs() < 1e-9);
        assert!(((sp.peaks[0].gamma_phase - 1.636_335_853_450_6e-3) / 1.6363e-3).abs() < 1e-6);
        assert!(((sp.peaks[1].gamma_phase - 0.270_133_181_835_4) / 0.27).abs() < 1e-6);
        assert!(sp.max_resolved_phase_step() < FRAC_PI_2);
        for w in sp.samples.windows(2) {
            assert!(w[1].energy > w[0].energy);
        }
    }

    #[test]
    fn broad_level_above_barrier_is_a_maximum() {
        let t = TrapSpec::new(4.0, 0.5).unwrap();
        let sp = scan_spectrum(&t, 0.02, 2.0, 200).unwrap();
        assert_eq!(sp.peaks.len(), 2);
        assert_eq!(sp.peaks[0].kind, PeakKind::PhaseCrossing);
        assert_eq!(sp.peaks[1].kind, PeakKind::Maximum);
        assert!((sp.peaks[1].energy - 1.32).abs() < 0.05);
        assert!(sp.peaks[1].gamma_phase > 0.0);
    }

    #[test]
    fn empty_window_is_smooth() {
        let sp = scan_spectrum(&fig(), 0.6, 0.9, 50).unwrap();
        assert!(sp.peaks.is_empty());
        assert_eq!(sp.samples.len(), 50);
        assert!(sp.max_resolved_phase_step() < FRAC_PI_8);
    }

    #[test]
    fn deep_trap_levels_are_unresolved_but_located() {
        let t = TrapSpec::new(12.0, 0.01).unwrap();
        let sp = scan_spectrum(&t, 0.3, 3.0, 200).unwrap();
        assert_eq!(sp.peaks.len(), 3);
        for (p, want) in sp.peaks.iter().zip([0.5, 1.5, 2.5]) {
            assert!((p.energy - want).abs() < 1e-3);
            assert_eq!(p.status, PeakStatus::UnresolvedNarrow);
        }
        assert!(sp.samples.iter().all(|s| s.ln_p.is_finite()));
    }
}
