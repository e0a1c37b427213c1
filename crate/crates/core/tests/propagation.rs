//! Time-domain and double-well checks that cross module boundaries.

use num_complex::Complex64;

use fermicull::culling::scan_window;
use fermicull::potential::TrapSpec;
use fermicull::resonance::{resonance_for_peak, Resonance, WidthSource};
use fermicull::scattering::{scan_spectrum, scattering_wave, Spectrum};
use fermicull::splitting::{gap_map, plan_split_path, GridSpec};
use fermicull::tdse::{decay_grid, decay_run, truncated_resonance_state, SpaceGrid};

fn level(z: f64, f: f64, k: usize) -> (TrapSpec, Spectrum, Resonance) {
    let spec = TrapSpec::new(z, f).unwrap();
    let (lo, hi) = scan_window(&spec).unwrap();
    let s = scan_spectrum(&spec, lo, hi, 300).unwrap();
    let r = resonance_for_peak(&s, k).unwrap();
    (spec, s, r)
}

#[test]
fn ground_levels_decay_exponentially_at_the_fitted_rate() {
    for (z, f) in [(4.0, 0.5), (4.4, 0.6), (4.4, 0.5)] {
        let (spec, _, r) = level(z, f, 0);
        let grid = decay_grid(&spec, 0.02).unwrap();
        let run = decay_run(&spec, &r, &grid, 0.01, 2.0 * r.tau).unwrap();
        assert!((run.survival[0] - 1.0).abs() < 1e-10);
        assert!(run.survival.len() > 100 && run.survival.iter().all(|&p| p >= 0.0));
        let fit = run.fit_decay(0.1 * r.tau, 2.0 * r.tau).unwrap();
        let rel = (-fit.slope - r.gamma).abs() / r.gamma;
        assert!(fit.r_squared >= 0.999, "(z={z}, f={f}) R^2 {}", fit.r_squared);
        assert!(rel <= 0.05, "(z={z}, f={f}) rate {} vs gamma {}", -fit.slope, r.gamma);
    }
}

#[test]
fn survival_is_converged_in_the_time_step() {
    let (spec, _, r) = level(4.4, 0.5, 1);
    let grid = decay_grid(&spec, 0.02).unwrap();
    let a = decay_run(&spec, &r, &grid, 0.01, 2.0 * r.tau).unwrap();
    let b = decay_run(&spec, &r, &grid, 0.005, 2.0 * r.tau).unwrap();
    let (pa, pb) = (*a.survival.last().unwrap(), *b.survival.last().unwrap());
    assert!((pa - pb).abs() <= 1e-6, "{pa} vs {pb}");
}

// Deep, nearly flat trap: widths underflow, so the states are built at the detected peak energies.
fn deep_level(e0: f64) -> Resonance {
    Resonance {
        e0,
        gamma: 0.0,
        tau: f64::INFINITY,
        amplitude: 1.0,
        background: 0.0,
        fit_residual_lorentz: 0.0,
        fit_residual_gauss: 0.0,
        gamma_phase: 0.0,
        phase_centre: e0,
        width_source: WidthSource::PhaseOnly,
        window: (e0, e0),
    }
}

#[test]
fn truncated_states_are_nearly_orthogonal() {
    let spec = TrapSpec::new(12.0, 0.01).unwrap();
    let s = scan_spectrum(&spec, 0.3, 3.0, 300).unwrap();
    assert!(s.peaks.len() >= 2);
    let grid = SpaceGrid::span(-10.0, 10.0, 0.005).unwrap();
    let a = truncated_resonance_state(&spec, &deep_level(s.peaks[0].energy), &grid).unwrap();
    let b = truncated_resonance_state(&spec, &deep_level(s.peaks[1].energy), &grid).unwrap();
    assert!((a.overlap(&a.values).norm() - 1.0).abs() < 1e-12);
    let o = a.overlap(&b.values).norm_sqr();
    assert!(o <= 1e-3, "overlap {o}");
}

#[test]
fn off_resonance_scattering_states_barely_overlap_the_truncated_state() {
    let (spec, _, r) = level(4.4, 0.5, 0);
    let grid = SpaceGrid::span(-spec.z / 2.0, spec.z / 2.0, 0.002).unwrap();
    let psi = truncated_resonance_state(&spec, &r, &grid).unwrap();
    let project = |e: f64| -> f64 {
        let w: Vec<Complex64> =
            grid.points().iter().map(|&x| Complex64::new(scattering_wave(&spec, e, x).unwrap(), 0.0)).collect();
        psi.overlap(&w).norm_sqr()
    };
    let on = project(r.e0);
    for k in [-10.0, 10.0] {
        let off = project(r.e0 + k * r.gamma);
        assert!(off / on <= 0.05, "relative overlap {} at {k} gamma", off / on);
    }
}

#[test]
fn untilted_column_keeps_unit_gap() {
    let m = gap_map((0.0, 0.0), (0.0, 0.3), 1, 11, &GridSpec::default()).unwrap();
    for c in &m.cells[0] {
        assert!((c.gap - 1.0).abs() <= 1e-6, "f = {}: gap {}", c.f, c.gap);
    }
}

#[test]
fn splitting_path_exists_on_the_default_map() {
    let m = gap_map((0.0, 8.0), (0.0, 0.3), 17, 11, &GridSpec { half_width: None, spacing: 0.01 }).unwrap();
    for i in 1..17 {
        assert!(m.cells[i][0].gap <= m.cells[i - 1][0].gap + 1e-12);
    }
    let path = plan_split_path(&m, 4.82, 0.05, 0.12).unwrap();
    let (d_end, f_end) = *path.last().unwrap();
    assert!(d_end >= 4.82 && (f_end - 0.12).abs() < 1e-12);
    assert!(path.iter().all(|&(d, f)| m.interpolate_gap(d, f) >= 0.05));
}
