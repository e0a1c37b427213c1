//! Laser-culling pipeline: lifetimes of the two lowest quasi-bound states,
//! the holding time that empties the excited state to a residual target, and
//! the ground-state loss accumulated while holding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fmt_num;
use crate::potential::TrapSpec;
use crate::resonance::{resonance_for_peak, WidthSource};
use crate::scattering::{scan_spectrum, Spectrum, WINDOW_ABOVE_BARRIER};
use crate::units::UnitSystem;

pub const DEFAULT_RESIDUAL: f64 = 1e-5;
/// Base grid of the per-point spectrum scan.
pub const SCAN_BASE_POINTS: usize = 300;
/// Trap depth (in hbar omega) below which the adiabatic lowering stops being WKB-safe.
pub const WKB_DEPTH_LIMIT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CullingPoint {
    pub z: f64,
    pub f: f64,
    pub e0: f64,
    pub e1: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    /// tau0 / tau1 = gamma1 / gamma0.
    pub tau0_over_tau1: f64,
    pub t_hold: f64,
    /// 1 - exp(-gamma0 t_hold).
    pub ground_loss: f64,
    /// gamma0 t_hold, the leading term of `ground_loss`.
    pub first_order_loss: f64,
    pub log10_loss: f64,
    pub residual_target: f64,
    pub ground_width: WidthSource,
    pub excited_width: WidthSource,
    pub depth: f64,
}

impl CullingPoint {
    pub fn fidelity(&self) -> f64 {
        1.0 - self.ground_loss
    }
}

/// Energy window that holds the two lowest levels of the trap.
pub fn scan_window(spec: &TrapSpec) -> Result<(f64, f64)> {
    let g = spec.geometry()?;
    let excited = 1.5 - 0.5 * spec.f * spec.f;
    let hi = (g.v_edge.max(excited) + 0.6).min(g.v_edge + WINDOW_ABOVE_BARRIER - 1e-6);
    Ok((0.02, hi))
}

/// Culling figures from the two lowest resonance widths.
pub fn point_from_widths(
    spec: &TrapSpec,
    (e0, gamma0): (f64, f64),
    (e1, gamma1): (f64, f64),
    residual_target: f64,
) -> Result<CullingPoint> {
    check_residual(residual_target)?;
    if !(gamma0 > 0.0 && gamma1 > 0.0) {
        return Err(Error::domain("resonance widths must be positive"));
    }
    let g = spec.geometry()?;
    let ln_r = -residual_target.ln();
    let t_hold = ln_r / gamma1;
    let first_order_loss = gamma0 * t_hold;
    let ground_loss = -(-first_order_loss).exp_m1();
    Ok(CullingPoint {
        z: spec.z,
        f: spec.f,
        e0,
        e1,
        gamma0,
        gamma1,
        tau0_over_tau1: gamma1 / gamma0,
        t_hold,
        ground_loss,
        first_order_loss,
        log10_loss: ground_loss.log10(),
        residual_target,
        ground_width: WidthSource::Fit,
        excited_width: WidthSource::Fit,
        depth: g.depth,
    })
}

fn check_residual(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 0.1) {
        return Err(Error::domain(format!("residual target {r} outside (0, 0.1)")));
    }
    Ok(())
}

/// Culling point from an existing spectrum that contains both lowest levels.
pub fn point_from_spectrum(spectrum: &Spectrum, residual_target: f64) -> Result<CullingPoint> {
    if spectrum.peaks.len() < 2 {
        return Err(Error::Shape(format!(
            "found {} resonance(s) at z = {}, f = {}; need two",
            spectrum.peaks.len(),
            spectrum.trap.z,
            spectrum.trap.f
        )));
    }
    let r0 = resonance_for_peak(spectrum, 0)?;
    let r1 = resonance_for_peak(spectrum, 1)?;
    let mut p = point_from_widths(&spectrum.trap, (r0.e0, r0.gamma), (r1.e0, r1.gamma), residual_target)?;
    p.ground_width = r0.width_source;
    p.excited_width = r1.width_source;
    Ok(p)
}

pub fn culling_point(z: f64, f: f64, residual_target: f64) -> Result<CullingPoint> {
    check_residual(residual_target)?;
    let spec = TrapSpec::new(z, f)?;
    let (lo, hi) = scan_window(&spec)?;
    let sp = scan_spectrum(&spec, lo, hi, SCAN_BASE_POINTS)?;
    point_from_spectrum(&sp, residual_target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    /// The barrier sits below the harmonic estimate of the first excited level.
    OutOfRange,
    Failed,
}

impl CellStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::OutOfRange => "out-of-range",
            CellStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub z: f64,
    pub f: f64,
    pub status: CellStatus,
    pub point: Option<CullingPoint>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityMap {
    pub z_grid: Vec<f64>,
    pub f_grid: Vec<f64>,
    /// Row-major: `points[iz][jf]`.
    pub points: Vec<Vec<MapCell>>,
    pub residual_target: f64,
}

pub(crate) fn grid(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|i| if i == n - 1 { range.1 } else { range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64 })
        .collect()
}

pub(crate) fn check_range(name: &str, r: (f64, f64), n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(format!("{name} grid needs at least one point")));
    }
    if !(r.0.is_finite() && r.1.is_finite() && r.0 <= r.1) {
        return Err(Error::domain(format!("{name} range [{}, {}] is not ordered", r.0, r.1)));
    }
    Ok(())
}

fn cell(z: f64, f: f64, residual_target: f64) -> MapCell {
    let harmonic_excited = 1.5 - 0.5 * f * f;
    let out_of_range = TrapSpec::new(z, f)
        .and_then(|s| s.geometry())
        .map(|g| g.v_edge < harmonic_excited)
        .unwrap_or(true);
    match culling_point(z, f, residual_target) {
        Ok(p) => MapCell {
            z,
            f,
            status: if out_of_range { CellStatus::OutOfRange } else { CellStatus::Ok },
            point: Some(p),
            error: None,
        },
        Err(e) => MapCell {
            z,
            f,
            status: if out_of_range { CellStatus::OutOfRange } else { CellStatus::Failed },
            point: None,
            error: Some(e.to_string()),
        },
    }
}

/// Culling points over a (z, f) grid; per-point failures are kept in the map.
pub fn fidelity_map(
    z_range: (f64, f64),
    f_range: (f64, f64),
    nz: usize,
    nf: usize,
    residual_target: f64,
) -> Result<FidelityMap> {
    check_range("z", z_range, nz)?;
    check_range("f", f_range, nf)?;
    check_residual(residual_target)?;
    if z_range.0 <= 0.0 || f_range.0 < 0.0 {
        return Err(Error::domain("fidelity map needs z > 0 and f >= 0"));
    }
    let z_grid = grid(z_range, nz);
    let f_grid = grid(f_range, nf);
    let flat: Vec<MapCell> = (0..nz * nf)
        .into_par_iter()
        .map(|k| cell(z_grid[k / nf], f_grid[k % nf], residual_target))
        .collect();
    let mut rows = Vec::with_capacity(nz);
    let mut it = flat.into_iter();
    for _ in 0..nz {
        rows.push(it.by_ref().take(nf).collect());
    }
    Ok(FidelityMap { z_grid, f_grid, points: rows, residual_target })
}

impl FidelityMap {
    pub fn cells(&self) -> impl Iterator<Item = &MapCell> {
        self.points.iter().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "# z [x0], f [hbar*omega/x0], gamma0 [hbar*omega], gamma1 [hbar*omega], ratio [1], \
             t_hold [1/omega], log10_loss [1], status\n",
        );
        for c in self.cells() {
            let nan = f64::NAN;
            let (g0, g1, ratio, th, ll) = c
                .point
                .map(|p| (p.gamma0, p.gamma1, p.tau0_over_tau1, p.t_hold, p.log10_loss))
                .unwrap_or((nan, nan, nan, nan, nan));
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_num(c.z),
                fmt_num(c.f),
                fmt_num(g0),
                fmt_num(g1),
                fmt_num(ratio),
                fmt_num(th),
                fmt_num(ll),
                c.status.label()
            ));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::numerical(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldReport {
    pub t_hold_s: f64,
    pub tau0_s: f64,
    pub tau1_s: f64,
    pub ground_loss: f64,
    pub fidelity: f64,
    pub depth: f64,
    /// Depth at least 3/2 hbar omega, where lowering is still WKB-adiabatic.
    pub wkb_depth_ok: bool,
    pub restore_note: String,
}

pub fn hold_and_restore_report(point: &CullingPoint, units: &UnitSystem) -> Result<HoldReport> {
    Ok(HoldReport {
        t_hold_s: units.time_to_si(point.t_hold)?,
        tau0_s: units.time_to_si(1.0 / point.gamma0)?,
        tau1_s: units.time_to_si(1.0 / point.gamma1)?,
        ground_loss: point.ground_loss,
        fidelity: point.fidelity(),
        depth: point.depth,
        wkb_depth_ok: point.depth >= WKB_DEPTH_LIMIT,
        restore_note: "after the hold the trap is raised adiabatically; the raise is not simulated".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{UnitSystem, HBAR, LI6_MASS};

    fn synthetic(ratio: f64) -> CullingPoint {
        let spec = TrapSpec::new(4.4, 0.5).unwrap();
        point_from_widths(&spec, (0.36, 1e-3 / ratio), (1.3, 1e-3), DEFAULT_RESIDUAL).unwrap()
    }

    #[test]
    fn headline_numbers_hang_together() {
        let p = synthetic(7.53e5);
        let want = 1e5f64.ln() / 7.53e5;
        assert!(((p.first_order_loss - want) / want).abs() < 1e-12);
        assert!((p.ground_loss - 1.529e-5).abs() < 1e-8);
        assert!(p.fidelity() > 0.99998);
        assert!((p.fidelity() - 0.999985).abs() < 1e-6);
        assert!(((p.first_order_loss * p.tau0_over_tau1 - 1e5f64.ln()) / 1e5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn vanishing_ground_width() {
        let mut prev = 1.0;
        for k in 1..13 {
            let p = synthetic(10f64.powi(k));
            assert!(p.ground_loss < prev);
            prev = p.ground_loss;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn hold_time_definition() {
        let p = synthetic(1e4);
        assert!((p.t_hold - 1e5f64.ln() / 1e-3).abs() < 1e-12 * p.t_hold);
        assert!(p.ground_loss >= 0.0 && p.ground_loss <= 1.0);
        assert!(point_from_widths(&TrapSpec::new(4.4, 0.5).unwrap(), (0.3, 1e-6), (1.3, 1e-3), 0.2).is_err());
    }

    #[test]
    fn report_in_milliseconds() {
        let spec = TrapSpec::new(4.4, 0.5).unwrap();
        let gamma1 = 1e5f64.ln() / 1370.0;
        let p = point_from_widths(&spec, (0.36, gamma1 / 7.53e5), (1.3, gamma1), DEFAULT_RESIDUAL).unwrap();
        let u = UnitSystem::new(LI6_MASS, 2.0 * std::f64::consts::PI * 1000.0).unwrap();
        let r = hold_and_restore_report(&p, &u).unwrap();
        assert!((r.t_hold_s - 0.218).abs() < 5e-4);
        assert!((r.tau1_s - 0.0189).abs() < 1e-4);
        assert!(!r.wkb_depth_ok || p.depth >= 1.5);
        let id = UnitSystem::new(HBAR, 1.0).unwrap();
        let r = hold_and_restore_report(&p, &id).unwrap();
        assert_eq!(r.t_hold_s, p.t_hold);
    }

    #[test]
    fn reference_trap_point() {
        let p = culling_point(4.4, 0.5, DEFAULT_RESIDUAL).unwrap();
        assert!(p.tau0_over_tau1 > 1.0);
        assert!((p.e0 - 0.3655).abs() < 1e-3);
        assert_eq!(p.ground_width, WidthSource::Fit);
        assert!((p.t_hold - 1e5f64.ln() / p.gamma1).abs() < 1e-12 * p.t_hold);
    }

    #[test]
    fn shallow_trap_is_shape_error() {
        assert!(matches!(culling_point(2.0, 0.5, 1e-5), Err(Error::Shape(_))));
    }

    #[test]
    fn single_cell_map_matches_point() {
        let m = fidelity_map((4.6, 4.6), (0.4, 0.4), 1, 1, DEFAULT_RESIDUAL).unwrap();
        let p = culling_point(4.6, 0.4, DEFAULT_RESIDUAL).unwrap();
        assert_eq!(m.points[0][0].point, Some(p));
    }

    #[test]
    fn map_shape_and_csv() {
        let m = fidelity_map((4.0, 5.2), (0.3, 0.7), 2, 3, DEFAULT_RESIDUAL).unwrap();
        assert_eq!(m.points.len(), 2);
        assert!(m.points.iter().all(|r| r.len() == 3));
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("# z"));
        assert!(fidelity_map((5.0, 4.0), (0.3, 0.7), 2, 2, 1e-5).is_err());
    }

    #[test]
    fn degenerate_cells_are_recorded() {
        let m = fidelity_map((1.0, 1.0), (0.6, 0.6), 1, 1, DEFAULT_RESIDUAL).unwrap();
        assert_eq!(m.points[0][0].status, CellStatus::OutOfRange);
        assert!(m.points[0][0].error.is_some());
    }
}
