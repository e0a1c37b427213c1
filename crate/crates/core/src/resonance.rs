//! Resonance parameters from a scanned spectrum, and survival laws.
//!
//! A resolved peak is fitted with a Lorentzian plus constant background and,
//! for comparison, with a Gaussian of the same form. The phase-slope width
//! from the scan gives an independent estimate of the same FWHM.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fmt_num, levenberg_marquardt};
use crate::potential::TrapSpec;
use crate::scattering::{matching, PeakStatus, Spectrum, RESOLUTION_FLOOR, WINDOW_ABOVE_BARRIER};

/// Fit window half-width in units of the current width estimate.
pub const FIT_HALF_WINDOW: f64 = 5.0;
/// Samples taken across a fit window.
pub const FIT_SAMPLES: usize = 301;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthSource {
    /// FWHM from the Lorentzian fit.
    Fit,
    /// Peak narrower than the scan resolution; FWHM from the phase slope only.
    PhaseOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub e0: f64,
    pub gamma: f64,
    pub tau: f64,
    /// Peak height above background, relative to P at the phase centre.
    pub amplitude: f64,
    pub background: f64,
    pub fit_residual_lorentz: f64,
    pub fit_residual_gauss: f64,
    pub gamma_phase: f64,
    /// Energy where the matching phase passes pi/2.
    pub phase_centre: f64,
    pub width_source: WidthSource,
    pub window: (f64, f64),
}

impl Resonance {
    pub fn csv_header() -> &'static str {
        "# e0 [hbar*omega], gamma [hbar*omega], tau [1/omega], gamma_phase [hbar*omega], \
         fit_residual_lorentz [rel], fit_residual_gauss [rel], width_source"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            fmt_num(self.e0),
            fmt_num(self.gamma),
            fmt_num(self.tau),
            fmt_num(self.gamma_phase),
            fmt_num(self.fit_residual_lorentz),
            fmt_num(self.fit_residual_gauss),
            match self.width_source {
                WidthSource::Fit => "fit",
                WidthSource::PhaseOnly => "phase-only",
            }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lineshape {
    Lorentzian,
    Gaussian,
}

/// Parameters of A * shape((E - e0) / gamma) + B and the normalised RMS residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeFit {
    pub amplitude: f64,
    pub e0: f64,
    pub gamma: f64,
    pub background: f64,
    pub residual: f64,
}

const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;

fn lorentz(p: &[f64; 4], t: f64) -> (f64, [f64; 4]) {
    let [a, m, g, b] = *p;
    let h = 0.5 * g;
    let dt = t - m;
    let d = dt * dt + h * h;
    let shape = h * h / d;
    (
        a * shape + b,
        [shape, a * h * h * 2.0 * dt / (d * d), a * h * dt * dt / (d * d), 1.0],
    )
}

fn gauss(p: &[f64; 4], t: f64) -> (f64, [f64; 4]) {
    let [a, m, g, b] = *p;
    let dt = t - m;
    let e = (-FOUR_LN2 * dt * dt / (g * g)).exp();
    (
        a * e + b,
        [e, a * e * 2.0 * FOUR_LN2 * dt / (g * g), a * e * 2.0 * FOUR_LN2 * dt * dt / (g * g * g), 1.0],
    )
}

/// Least-squares fit of a single peak to tabulated samples.
///
/// `guess` is (amplitude, e0, gamma, background). Coordinates are shifted and
/// scaled by the guessed centre and width internally.
pub fn fit_lineshape(
    energies: &[f64],
    values: &[f64],
    shape: Lineshape,
    guess: (f64, f64, f64, f64),
) -> Result<LineshapeFit> {
    if energies.len() != values.len() || energies.len() < 5 {
        return Err(Error::domain("lineshape fit needs at least five paired samples"));
    }
    let (a0, c, s, b0) = guess;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("lineshape fit needs a positive width guess"));
    }
    let ts: Vec<f64> = energies.iter().map(|e| (e - c) / s).collect();
    let model = match shape {
        Lineshape::Lorentzian => lorentz,
        Lineshape::Gaussian => gauss,
    };
    let (p, cost) = levenberg_marquardt(model, &ts, values, [a0, 0.0, 1.0, b0])?;
    let [a, m, g, b] = p;
    if !(a.is_finite() && g.is_finite() && g != 0.0) {
        return Err(Error::numerical("lineshape fit diverged"));
    }
    let rms = (cost / ts.len() as f64).sqrt();
    Ok(LineshapeFit {
        amplitude: a,
        e0: c + m * s,
        gamma: g.abs() * s,
        background: b,
        residual: rms / a.abs(),
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn rel_p(trap: &TrapSpec, energies: &[f64], ln_ref: f64) -> Result<Vec<f64>> {
    energies.iter().map(|&e| Ok((matching(trap, e)?.ln_p() - ln_ref).exp())).collect()
}

// Energy on [from, to] where P first drops below half of p_ref, by sampling then bisection.
fn half_point(trap: &TrapSpec, from: f64, to: f64, ln_half: f64) -> Result<f64> {
    let n = 200;
    let mut prev = from;
    for i in 1..=n {
        let e = from + (to - from) * i as f64 / n as f64;
        if matching(trap, e)?.ln_p() < ln_half {
            let (mut a, mut b) = (prev, e);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if matching(trap, mid)?.ln_p() < ln_half {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = e;
    }
    Ok(to)
}

/// Lorentzian fit of one peak of a scanned spectrum.
pub fn fit_lorentzian(spectrum: &Spectrum, peak_index: usize) -> Result<Resonance> {
    let peak = *spectrum
        .peaks
        .get(peak_index)
        .ok_or_else(|| Error::domain(format!("no peak with index {peak_index}")))?;
    if peak.status == PeakStatus::UnresolvedNarrow {
        return Err(Error::WidthUnresolved { upper_bound: RESOLUTION_FLOOR });
    }
    let trap = &spectrum.trap;
    let top = trap.geometry()?.v_edge + WINDOW_ABOVE_BARRIER;
    let c = peak.energy;
    let gp = peak.gamma_phase;
    // neighbouring resonances bound every window
    let lim_lo = if peak_index > 0 {
        0.5 * (spectrum.peaks[peak_index - 1].energy + c)
    } else {
        (c - 50.0 * gp).max(1e-3 * c)
    };
    let lim_hi = match spectrum.peaks.get(peak_index + 1) {
        Some(next) => 0.5 * (c + next.energy),
        None => (c + 50.0 * gp).min(top - 1e-9),
    };

    // locate the maximum and the half-maximum points
    let lo = (c - 3.0 * gp).max(lim_lo);
    let hi = (c + 3.0 * gp).min(lim_hi);
    let grid = linspace(lo, hi, 401);
    let mut best = (f64::NEG_INFINITY, c);
    for &e in &grid {
        let lp = matching(trap, e)?.ln_p();
        if lp > best.0 {
            best = (lp, e);
        }
    }
    let (ln_max, e_max) = best;
    let ln_half = ln_max - std::f64::consts::LN_2;
    let left = half_point(trap, e_max, lim_lo, ln_half)?;
    let right = half_point(trap, e_max, lim_hi, ln_half)?;
    let mut centre = e_max;
    let mut width = (right - left).max(1e-3 * gp);

    let mut fit = None;
    let mut energies = Vec::new();
    let mut values = Vec::new();
    for _ in 0..2 {
        let w_lo = (centre - FIT_HALF_WINDOW * width).max(lim_lo);
        let w_hi = (centre + FIT_HALF_WINDOW * width).min(lim_hi);
        energies = linspace(w_lo, w_hi, FIT_SAMPLES);
        values = rel_p(trap, &energies, ln_max)?;
        let b0 = values[0].min(values[FIT_SAMPLES - 1]);
        let f = fit_lineshape(&energies, &values, Lineshape::Lorentzian, (1.0 - b0, centre, width, b0))?;
        centre = f.e0;
        width = f.gamma;
        fit = Some(f);
    }
    let fit = fit.expect("two fit passes ran");
    let g = fit_lineshape(
        &energies,
        &values,
        Lineshape::Gaussian,
        (fit.amplitude, fit.e0, fit.gamma, fit.background),
    )?;
    Ok(Resonance {
        e0: fit.e0,
        gamma: fit.gamma,
        tau: 1.0 / fit.gamma,
        amplitude: fit.amplitude,
        background: fit.background,
        fit_residual_lorentz: fit.residual,
        fit_residual_gauss: g.residual,
        gamma_phase: gp,
        phase_centre: c,
        width_source: WidthSource::Fit,
        window: (energies[0], energies[FIT_SAMPLES - 1]),
    })
}

/// Resonance for any peak: fitted when resolved, phase-slope width otherwise.
pub fn resonance_for_peak(spectrum: &Spectrum, peak_index: usize) -> Result<Resonance> {
    match fit_lorentzian(spectrum, peak_index) {
        Err(Error::WidthUnresolved { .. }) => {
            let p = spectrum.peaks[peak_index];
            if !(p.gamma_phase > 0.0) {
                return Err(Error::WidthUnresolved { upper_bound: RESOLUTION_FLOOR });
            }
            Ok(Resonance {
                e0: p.energy,
                gamma: p.gamma_phase,
                tau: 1.0 / p.gamma_phase,
                amplitude: f64::NAN,
                background: f64::NAN,
                fit_residual_lorentz: f64::NAN,
                fit_residual_gauss: f64::NAN,
                gamma_phase: p.gamma_phase,
                phase_centre: p.energy,
                width_source: WidthSource::PhaseOnly,
                window: (p.energy, p.energy),
            })
        }
        other => other,
    }
}

/// Exponential decay law exp(-gamma t).
pub fn survival_exponential(res: &Resonance, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("survival time must be non-negative, got {t}")));
    }
    Ok((-res.gamma * t).exp())
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> Result<Complex64>, a: f64, b: f64) -> Result<(Complex64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    Ok((k * h, ((k - g) * h).norm()))
}

/// Adaptive Gauss-Kronrod integration of a complex integrand on [a, b].
pub fn integrate_complex(
    mut f: impl FnMut(f64) -> Result<Complex64>,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    let (total, err) = gk15(&mut f, a, b)?;
    let mut parts = vec![(a, b, total, err)];
    for _ in 0..5000 {
        let sum: Complex64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let scale: f64 = parts.iter().map(|p| p.2.norm()).sum::<f64>().max(sum.norm());
        if err <= rel_tol * scale {
            return Ok(sum);
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap_or(0);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (l, el) = gk15(&mut f, lo, mid)?;
        let (r, er) = gk15(&mut f, mid, hi)?;
        parts.push((lo, mid, l, el));
        parts.push((mid, hi, r, er));
    }
    Err(Error::numerical("adaptive quadrature did not converge"))
}

/// |integral of P(E) e^{i E t} dE|^2 over [lo, hi], normalised to 1 at t = 0.
pub fn survival_from_lineshape(p: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("survival time must be non-negative, got {t}")));
    }
    let mid = 0.5 * (lo + hi);
    let norm = integrate_complex(|e| Ok(Complex64::new(p(e)?, 0.0)), lo, hi, 1e-12)?.re;
    if t == 0.0 {
        return Ok(1.0);
    }
    let amp = integrate_complex(|e| Ok(Complex64::from_polar(p(e)?, (e - mid) * t)), lo, hi, 1e-12)?;
    Ok(amp.norm_sqr() / (norm * norm))
}

/// Survival from the Fourier transform of the scanned lineshape around `res`.
///
/// The integration covers |E - e0| <= `half_width`, which must span at least
/// twenty widths in total. Truncating the Lorentzian tails at half-width W
/// biases the result by roughly 0.64 gamma / W relative.
pub fn survival_from_spectrum(spectrum: &Spectrum, res: &Resonance, half_width: f64, t: f64) -> Result<f64> {
    if !(2.0 * half_width >= 20.0 * res.gamma) {
        return Err(Error::domain(format!(
            "survival window 2 x {half_width} spans fewer than 20 widths (gamma = {})",
            res.gamma
        )));
    }
    let lo = res.e0 - half_width;
    let hi = res.e0 + half_width;
    if lo <= 0.0 {
        return Err(Error::domain("survival window extends below zero energy"));
    }
    let ln_ref = spectrum.ln_p_at(res.phase_centre)?;
    let trap = spectrum.trap;
    survival_from_lineshape(|e| Ok((matching(&trap, e)?.ln_p() - ln_ref).exp()), lo, hi, t)
}
