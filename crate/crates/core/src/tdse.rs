//! Crank-Nicolson propagation of the 1D Schrodinger equation.
//!
//! Space uses the same three-point stencil as the double-well eigensolver,
//! so a ground state from `splitting` is stationary here up to round-off.
//! Time stepping is the trapezoidal rule, which is unitary for any dt; the
//! dt <= 0.02 bound is an accuracy limit, keeping the phase error per step
//! of a level at energy E (about dt^3 E^3 / 12) negligible for E up to a few
//! tens, which covers every state the decay and splitting runs populate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fit_line, fmt_num, LineFit};
use crate::potential::{eval_double_well, TrapSpec};
use crate::resonance::Resonance;
use crate::specfun::weber;
use crate::splitting::{solve_on_grid, Grid, WALL_MARGIN};

pub const MAX_DT: f64 = 0.02;
pub const MIN_SURVIVAL_SAMPLES: usize = 100;
/// Allowed norm growth before a run is declared unstable.
pub const NORM_TOLERANCE: f64 = 1e-6;
pub const ABSORBER_FRACTION: f64 = 0.2;
/// Peak strength of the quadratic absorber; set by the reflection probe.
pub const ABSORBER_STRENGTH: f64 = 10.0;

/// Uniform grid with hard walls one spacing beyond each end point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    pub x0: f64,
    pub spacing: f64,
    pub len: usize,
}

impl SpaceGrid {
    /// Grid covering [lo, hi] with the given spacing (end points included).
    pub fn span(lo: f64, hi: f64, spacing: f64) -> Result<SpaceGrid> {
        if !(lo < hi && spacing > 0.0 && spacing < hi - lo) {
            return Err(Error::Config(format!("bad grid [{lo}, {hi}] with spacing {spacing}")));
        }
        let len = ((hi - lo) / spacing - 1e-9).ceil() as usize + 1;
        Ok(SpaceGrid { x0: lo, spacing, len })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    pub fn lo(&self) -> f64 {
        self.x0
    }

    pub fn hi(&self) -> f64 {
        self.x(self.len - 1)
    }
}

impl From<&Grid> for SpaceGrid {
    fn from(g: &Grid) -> Self {
        SpaceGrid { x0: g.points[0], spacing: g.spacing, len: g.points.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub grid: SpaceGrid,
    pub values: Vec<Complex64>,
    pub norm: f64,
}

fn grid_norm(h: f64, values: &[Complex64]) -> f64 {
    // the wall values are zero, so the trapezoid rule is h times the plain sum
    h * values.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

impl WavePacket {
    pub fn new(grid: SpaceGrid, values: Vec<Complex64>) -> Result<WavePacket> {
        if values.len() != grid.len {
            return Err(Error::Config("wave packet length does not match its grid".into()));
        }
        let norm = grid_norm(grid.spacing, &values);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("wave packet has zero or non-finite norm"));
        }
        Ok(WavePacket { grid, values, norm })
    }

    pub fn from_real(grid: SpaceGrid, values: &[f64]) -> Result<WavePacket> {
        WavePacket::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn normalized(mut self) -> WavePacket {
        let s = self.norm.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= s);
        self.norm = grid_norm(self.grid.spacing, &self.values);
        self
    }

    /// <self|other> with the grid quadrature.
    pub fn overlap(&self, other: &[Complex64]) -> Complex64 {
        self.grid.spacing * self.values.iter().zip(other).map(|(a, b)| a.conj() * b).sum::<Complex64>()
    }

    /// Probability inside [a, b].
    pub fn probability_in(&self, a: f64, b: f64) -> f64 {
        let h = self.grid.spacing;
        let tol = 1e-9 * h;
        h * self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let x = self.grid.x(*i);
                x >= a - tol && x <= b + tol
            })
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("# x [x0], re [x0^-1/2], im [x0^-1/2]\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", fmt_num(self.grid.x(i)), fmt_num(v.re), fmt_num(v.im)));
        }
        s
    }
}

/// The stationary interior solution at the resonance energy, cut to the trap
/// section [-z/2, z/2] and normalised.
pub fn truncated_resonance_state(spec: &TrapSpec, res: &Resonance, grid: &SpaceGrid) -> Result<WavePacket> {
    let half = 0.5 * spec.z;
    if grid.lo() > -half || grid.hi() < half {
        return Err(Error::Config(format!(
            "grid [{}, {}] does not cover the trap section [{}, {}]",
            grid.lo(),
            grid.hi(),
            -half,
            half
        )));
    }
    let nu = res.e0 + 0.5 * spec.f * spec.f - 0.5;
    let tol = 1e-9 * grid.spacing;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len];
    for (i, v) in values.iter_mut().enumerate() {
        let x = grid.x(i);
        if x >= -half - tol && x <= half + tol {
            *v = Complex64::new(weber(nu, x + spec.f)?.0, 0.0);
        }
    }
    Ok(WavePacket::new(grid.clone(), values)?.normalized())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorberSide {
    None,
    Left,
    Right,
}

/// Quadratic complex absorbing potential -i W(x) over the outer part of one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorberSpec {
    pub side: AbsorberSide,
    pub fraction: f64,
    pub strength: f64,
}

impl AbsorberSpec {
    pub fn none() -> Self {
        AbsorberSpec { side: AbsorberSide::None, fraction: ABSORBER_FRACTION, strength: 0.0 }
    }

    pub fn on(side: AbsorberSide) -> Self {
        AbsorberSpec { side, fraction: ABSORBER_FRACTION, strength: ABSORBER_STRENGTH }
    }

    /// For the open trap the escape channel runs toward negative x.
    pub fn downhill(spec: &TrapSpec) -> Self {
        AbsorberSpec::on(if spec.f >= 0.0 { AbsorberSide::Left } else { AbsorberSide::Right })
    }

    fn profile(&self, grid: &SpaceGrid) -> Result<Vec<f64>> {
        if self.side == AbsorberSide::None {
            return Ok(vec![0.0; grid.len]);
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0 && self.strength >= 0.0) {
            return Err(Error::Config(format!(
                "absorber fraction {} and strength {} out of range",
                self.fraction, self.strength
            )));
        }
        let width = self.fraction * (grid.hi() - grid.lo());
        Ok((0..grid.len)
            .map(|i| {
                let depth = match self.side {
                    AbsorberSide::Left => grid.lo() + width - grid.x(i),
                    AbsorberSide::Right => grid.x(i) - (grid.hi() - width),
                    AbsorberSide::None => 0.0,
                };
                if depth > 0.0 {
                    self.strength * (depth / width).powi(2)
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Piecewise-linear schedule of the double-well parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    /// (time, d, f) knots with non-decreasing time and d.
    pub knots: Vec<(f64, f64, f64)>,
}

impl Ramp {
    pub fn new(knots: Vec<(f64, f64, f64)>) -> Result<Ramp> {
        let Some(first) = knots.first() else {
            return Err(Error::domain("ramp needs at least one knot"));
        };
        if first.1.abs() > 1e-12 {
            return Err(Error::domain(format!("ramp must start at d = 0, starts at {}", first.1)));
        }
        if knots.iter().any(|k| !(k.0.is_finite() && k.1.is_finite() && k.2.is_finite())) {
            return Err(Error::domain("ramp knots must be finite"));
        }
        for w in knots.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::domain("ramp time and separation must be non-decreasing"));
            }
        }
        Ok(Ramp { knots })
    }

    pub fn duration(&self) -> f64 {
        self.knots.last().unwrap().0 - self.knots[0].0
    }

    pub fn start(&self) -> (f64, f64) {
        (self.knots[0].1, self.knots[0].2)
    }

    pub fn end(&self) -> (f64, f64) {
        let k = self.knots.last().unwrap();
        (k.1, k.2)
    }

    /// (d, f) at time t, clamped to the end knots.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 <= t);
        if i == 0 {
            return (k[0].1, k[0].2);
        }
        if i == k.len() {
            return self.end();
        }
        let (a, b) = (k[i - 1], k[i]);
        let s = if b.0 > a.0 { (t - a.0) / (b.0 - a.0) } else { 1.0 };
        (a.1 + s * (b.1 - a.1), a.2 + s * (b.2 - a.2))
    }
}

/// Time dependence of the real potential.
#[derive(Debug, Clone, PartialEq)]
pub enum TimePotential {
    /// Sampled once on the propagation grid.
    Static(Vec<f64>),
    /// Spliced double well following a ramp.
    DoubleWell(Ramp),
}

impl TimePotential {
    pub fn trap(spec: &TrapSpec, grid: &SpaceGrid) -> TimePotential {
        TimePotential::Static(grid.points().iter().map(|&x| spec.eval(x)).collect())
    }

    fn sample(&self, grid: &SpaceGrid, t: f64, out: &mut [f64]) {
        match self {
            TimePotential::Static(v) => out.copy_from_slice(v),
            TimePotential::DoubleWell(r) => {
                let (d, f) = r.at(t);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = eval_double_well(d, f, grid.x(i));
                }
            }
        }
    }

    fn is_static(&self) -> bool {
        matches!(self, TimePotential::Static(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub final_state: WavePacket,
}

impl PropagationResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# time [1/omega], survival [prob]\n");
        for (t, p) in self.times.iter().zip(&self.survival) {
            s.push_str(&format!("{},{}\n", fmt_num(*t), fmt_num(*p)));
        }
        s
    }

    /// Straight-line fit of ln(survival) over samples with t in [t_lo, t_hi].
    pub fn fit_decay(&self, t_lo: f64, t_hi: f64) -> Result<LineFit> {
        let (ts, ls): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.survival)
            .filter(|(t, p)| **t >= t_lo && **t <= t_hi && **p > 0.0)
            .map(|(t, p)| (*t, p.ln()))
            .unzip();
        fit_line(&ts, &ls)
    }
}

/// LU factors of the tridiagonal system with constant off-diagonal `c`.
struct Thomas {
    c: Complex64,
    // reciprocal pivots and the multipliers c / pivot
    inv_pivot: Vec<Complex64>,
}

impl Thomas {
    fn factor(diag: &[Complex64], c: Complex64) -> Result<Thomas> {
        let mut inv_pivot = Vec::with_capacity(diag.len());
        let mut prev = Complex64::new(0.0, 0.0);
        for (i, &d) in diag.iter().enumerate() {
            let p = if i == 0 { d } else { d - c * c * prev };
            if p.norm() == 0.0 || !p.is_finite() {
                return Err(Error::numerical("singular Crank-Nicolson system"));
            }
            prev = p.inv();
            inv_pivot.push(prev);
        }
        Ok(Thomas { c, inv_pivot })
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.c * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let m = self.c * self.inv_pivot[i];
            rhs[i] -= m * rhs[i + 1];
        }
    }
}

/// Crank-Nicolson propagation from t = 0 to `t_final`.
///
/// Survival is the probability inside `window`, sampled at every step when
/// the run is short and thinned otherwise, always at least
/// `MIN_SURVIVAL_SAMPLES + 1` samples including both end points.
pub fn propagate(
    psi0: &WavePacket,
    potential: &TimePotential,
    dt: f64,
    t_final: f64,
    absorber: &AbsorberSpec,
    window: (f64, f64),
) -> Result<PropagationResult> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::Config(format!("time step {dt} outside (0, {MAX_DT}]")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::domain(format!("final time must be non-negative, got {t_final}")));
    }
    if let TimePotential::Static(v) = potential {
        if v.len() != psi0.grid.len {
            return Err(Error::Config("potential length does not match the grid".into()));
        }
    }
    let grid = &psi0.grid;
    let n = grid.len;
    let steps = (t_final / dt).round() as usize;
    let dt = if steps > 0 { t_final / steps as f64 } else { dt };
    let stride = (steps / (2 * MIN_SURVIVAL_SAMPLES)).max(1);

    let k = 0.5 / (grid.spacing * grid.spacing);
    let w = absorber.profile(grid)?;
    let absorbing = w.iter().any(|&x| x > 0.0);
    let half = Complex64::new(0.0, 0.5 * dt);
    // A = 1 + i dt/2 H and B = 1 - i dt/2 H share the off-diagonal up to sign
    let off = half * (-k);
    let mut v = vec![0.0; n];
    let build = |v: &[f64]| -> Vec<Complex64> {
        v.iter().zip(&w).map(|(&vi, &wi)| half * Complex64::new(2.0 * k + vi, -wi)).collect()
    };

    let mut psi = psi0.values.clone();
    let norm0 = psi0.norm;
    let mut times = vec![0.0];
    let mut survival = vec![psi0.probability_in(window.0, window.1) / norm0];
    let mut fixed: Option<(Vec<Complex64>, Thomas)> = None;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let one = Complex64::new(1.0, 0.0);

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        if fixed.is_none() || !potential.is_static() {
            potential.sample(grid, t_mid, &mut v);
            let hd = build(&v);
            let diag: Vec<Complex64> = hd.iter().map(|&x| one + x).collect();
            fixed = Some((hd, Thomas::factor(&diag, off)?));
        }
        let (hd, lu) = fixed.as_ref().unwrap();
        for i in 0..n {
            let mut s = (one - hd[i]) * psi[i];
            if i > 0 {
                s -= off * psi[i - 1];
            }
            if i + 1 < n {
                s -= off * psi[i + 1];
            }
            rhs[i] = s;
        }
        lu.solve(&mut rhs);
        std::mem::swap(&mut psi, &mut rhs);

        let done = step + 1 == steps;
        if (step + 1) % stride == 0 || done {
            let norm = grid_norm(grid.spacing, &psi);
            let drift = norm / norm0 - 1.0;
            if !norm.is_finite() || drift > NORM_TOLERANCE || (!absorbing && drift.abs() > NORM_TOLERANCE) {
                return Err(Error::numerical(format!(
                    "norm drifted by {drift:e} at t = {}",
                    (step + 1) as f64 * dt
                )));
            }
            let pkt = WavePacket { grid: grid.clone(), values: psi.clone(), norm };
            times.push((step + 1) as f64 * dt);
            survival.push(pkt.probability_in(window.0, window.1) / norm0);
        }
    }
    let norm = grid_norm(grid.spacing, &psi);
    Ok(PropagationResult {
        times,
        survival,
        final_state: WavePacket { grid: grid.clone(), values: psi, norm },
    })
}

/// Decay run for a trap: truncated state, downhill absorber, survival in the trap section.
pub fn decay_run(
    spec: &TrapSpec,
    res: &Resonance,
    grid: &SpaceGrid,
    dt: f64,
    t_final: f64,
) -> Result<PropagationResult> {
    let psi0 = truncated_resonance_state(spec, res, grid)?;
    let pot = TimePotential::trap(spec, grid);
    let half = 0.5 * spec.z;
    propagate(&psi0, &pot, dt, t_final, &AbsorberSpec::downhill(spec), (-half, half))
}

/// Default grid for decay runs: room for the escaping flux to accelerate
/// before it reaches the absorber on the downhill side.
pub fn decay_grid(spec: &TrapSpec, spacing: f64) -> Result<SpaceGrid> {
    let half = 0.5 * spec.z;
    let uphill = half + spec.f.abs() + WALL_MARGIN;
    let downhill = half + 12.0 * half.max(5.0);
    if spec.f >= 0.0 {
        SpaceGrid::span(-downhill, uphill, spacing)
    } else {
        SpaceGrid::span(-uphill, downhill, spacing)
    }
}

/// Overlap of the evolved state with the target ground state after following `ramp`.
///
/// The start and target states are lowest eigenvectors of the same
/// discretised Hamiltonian the propagator uses, on `grid`.
pub fn split_fidelity(ramp: &Ramp, grid: &Grid, dt: f64) -> Result<f64> {
    let (d0, f0) = ramp.start();
    let (d1, f1) = ramp.end();
    if grid.half_width() < 0.5 * d1 + WALL_MARGIN - 1e-9 {
        return Err(Error::Config(format!(
            "grid half-width {} too small for d = {d1} (need {})",
            grid.half_width(),
            0.5 * d1 + WALL_MARGIN
        )));
    }
    let sg = SpaceGrid::from(grid);
    let start = solve_on_grid(d0, f0, 2, grid)?;
    let target = solve_on_grid(d1, f1, 2, grid)?;
    let psi0 = WavePacket::from_real(sg.clone(), &start.wavefunctions[0])?;
    let t0 = ramp.knots[0].0;
    let shifted = Ramp { knots: ramp.knots.iter().map(|&(t, d, f)| (t - t0, d, f)).collect() };
    let run = propagate(
        &psi0,
        &TimePotential::DoubleWell(shifted),
        dt,
        ramp.duration(),
        &AbsorberSpec::none(),
        (sg.lo(), sg.hi()),
    )?;
    let tgt: Vec<Complex64> = target.wavefunctions[0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(run.final_state.overlap(&tgt).norm_sqr())
}

fn smootherstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// Local-adiabatic schedule along a path of (d, f) waypoints.
///
/// Progress along the path advances at a rate proportional to gap^2 (gaps
/// given per waypoint, linear in between), and the progress itself follows a
/// smootherstep in time so the ramp starts and ends with zero velocity and
/// acceleration.
pub fn adiabatic_ramp(path: &[(f64, f64)], gaps: &[f64], duration: f64, knots: usize) -> Result<Ramp> {
    if path.is_empty() || path.len() != gaps.len() {
        return Err(Error::domain("path and gap lists must be non-empty and of equal length"));
    }
    if gaps.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::domain("gaps along the path must be positive"));
    }
    if !(duration >= 0.0) || knots < 2 {
        return Err(Error::domain("ramp needs a non-negative duration and at least two knots"));
    }
    if path.len() == 1 {
        let (d, f) = path[0];
        return Ramp::new(vec![(0.0, d, f), (duration, d, f)]);
    }
    // cost of each segment: length / gap^2, integrated with fine substeps
    let mut cum = vec![0.0];
    for i in 1..path.len() {
        let len = (path[i].0 - path[i - 1].0).hypot(path[i].1 - path[i - 1].1);
        let sub = 16;
        let mut c = 0.0;
        for s in 0..sub {
            let a = (s as f64 + 0.5) / sub as f64;
            let g = gaps[i - 1] + a * (gaps[i] - gaps[i - 1]);
            c += len / sub as f64 / (g * g);
        }
        cum.push(cum[i - 1] + c);
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(knots);
    for k in 0..knots {
        let s = k as f64 / (knots - 1) as f64;
        let target = smootherstep(s) * total;
        let i = cum.partition_point(|&c| c < target).clamp(1, path.len() - 1);
        let span = cum[i] - cum[i - 1];
        let a = if span > 0.0 { ((target - cum[i - 1]) / span).clamp(0.0, 1.0) } else { 1.0 };
        let d = path[i - 1].0 + a * (path[i].0 - path[i - 1].0);
        let f = path[i - 1].1 + a * (path[i].1 - path[i - 1].1);
        out.push((s * duration, d, f));
    }
    out[0].1 = path[0].0;
    Ramp::new(out)
}
