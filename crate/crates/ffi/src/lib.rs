//! C ABI over the fermicull library.
//!
//! Every function returns an `FcStatus`; results go through out-pointers.
//! Heavy results (spectra, fidelity maps) live behind opaque handles that the
//! caller releases with the matching `_free` function. After a failure,
//! `fc_last_error` copies a description of the most recent error on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fermicull::culling::{culling_point, fidelity_map, FidelityMap};
use fermicull::dfg::{pairing_gap, thermal_ground_occupation};
use fermicull::potential::TrapSpec;
use fermicull::resonance::resonance_for_peak;
use fermicull::scattering::{scan_spectrum, Spectrum};
use fermicull::splitting::{solve_double_well, GridSpec};
use fermicull::units::UnitSystem;
use fermicull::Error;

/// Outcome of a call. Validation and numerical codes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    Validation = 2,
    Numerical = 3,
    NullPointer = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Opaque scanned spectrum.
pub struct FcSpectrum {
    inner: Spectrum,
}

/// Opaque fidelity map.
pub struct FcFidelityMap {
    inner: FidelityMap,
    csv: String,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FcTrapGeometry {
    pub x_min: f64,
    pub v_min: f64,
    pub edge: f64,
    pub v_edge: f64,
    pub depth: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FcResonance {
    pub e0: f64,
    pub gamma: f64,
    pub tau: f64,
    pub gamma_phase: f64,
    pub fit_residual_lorentz: f64,
    pub fit_residual_gauss: f64,
    /// 1 when the width comes from the Lorentzian fit, 0 when only the phase slope resolved it.
    pub width_from_fit: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FcCullingPoint {
    pub z: f64,
    pub f: f64,
    pub e0: f64,
    pub e1: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub lifetime_ratio: f64,
    pub t_hold: f64,
    pub ground_loss: f64,
    pub log10_loss: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FcUnits {
    pub mass: f64,
    pub omega: f64,
    pub x0: f64,
    pub e0: f64,
    pub t0: f64,
    pub f0: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FcStatus {
    if e.is_validation() {
        FcStatus::Validation
    } else {
        FcStatus::Numerical
    }
}

// Run `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), FcStatus>) -> FcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            FcStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, FcStatus>;
}

impl<T> OrStatus<T> for fermicull::Result<T> {
    fn or_status(self) -> Result<T, FcStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn null(what: &str) -> FcStatus {
    set_error(format!("null pointer: {what}"));
    FcStatus::NullPointer
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, FcStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    V.as_ptr()
}

/// Copy the last error message (NUL-terminated, truncated to `len`) into `buf`.
/// Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `geometry` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_trap_geometry(z: f64, f: f64, geometry: *mut FcTrapGeometry) -> FcStatus {
    guard(|| {
        let o = out(geometry, "geometry")?;
        let g = TrapSpec::new(z, f).and_then(|s| s.geometry()).or_status()?;
        *o = FcTrapGeometry { x_min: g.x_min, v_min: g.v_min, edge: g.edge, v_edge: g.v_edge, depth: g.depth };
        Ok(())
    })
}

/// Scan P(E) on [e_min, e_max] and detect resonances.
///
/// # Safety
/// `spectrum` must be null or valid for writes; on success it receives a
/// handle to release with `fc_spectrum_free`.
#[no_mangle]
pub unsafe extern "C" fn fc_spectrum_scan(
    z: f64,
    f: f64,
    e_min: f64,
    e_max: f64,
    base_points: usize,
    spectrum: *mut *mut FcSpectrum,
) -> FcStatus {
    guard(|| {
        let o = out(spectrum, "spectrum")?;
        let spec = TrapSpec::new(z, f).or_status()?;
        let inner = scan_spectrum(&spec, e_min, e_max, base_points).or_status()?;
        *o = Box::into_raw(Box::new(FcSpectrum { inner }));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a handle from `fc_spectrum_scan` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_spectrum_free(spectrum: *mut FcSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// # Safety
/// `spectrum` must be a live handle; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_spectrum_sample_count(spectrum: *const FcSpectrum, count: *mut usize) -> FcStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        *out(count, "count")? = s.inner.samples.len();
        Ok(())
    })
}

/// Energy, ln P and matching phase of sample `index`.
///
/// # Safety
/// `spectrum` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_spectrum_sample(
    spectrum: *const FcSpectrum,
    index: usize,
    energy: *mut f64,
    ln_p: *mut f64,
    phase: *mut f64,
) -> FcStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let (e, l, p) = (out(energy, "energy")?, out(ln_p, "ln_p")?, out(phase, "phase")?);
        let Some(smp) = s.inner.samples.get(index) else {
            set_error(format!("sample {index} out of range"));
            return Err(FcStatus::OutOfRange);
        };
        *e = smp.energy;
        *l = smp.ln_p;
        *p = smp.phase;
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_spectrum_peak_count(spectrum: *const FcSpectrum, count: *mut usize) -> FcStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        *out(count, "count")? = s.inner.peaks.len();
        Ok(())
    })
}

/// Fitted resonance for peak `index`.
///
/// # Safety
/// `spectrum` must be a live handle; `resonance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_spectrum_resonance(
    spectrum: *const FcSpectrum,
    index: usize,
    resonance: *mut FcResonance,
) -> FcStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let o = out(resonance, "resonance")?;
        if index >= s.inner.peaks.len() {
            set_error(format!("peak {index} out of range"));
            return Err(FcStatus::OutOfRange);
        }
        let r = resonance_for_peak(&s.inner, index).or_status()?;
        *o = FcResonance {
            e0: r.e0,
            gamma: r.gamma,
            tau: r.tau,
            gamma_phase: r.gamma_phase,
            fit_residual_lorentz: r.fit_residual_lorentz,
            fit_residual_gauss: r.fit_residual_gauss,
            width_from_fit: i32::from(r.width_source == fermicull::resonance::WidthSource::Fit),
        };
        Ok(())
    })
}

/// # Safety
/// `point` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_culling_point(z: f64, f: f64, residual: f64, point: *mut FcCullingPoint) -> FcStatus {
    guard(|| {
        let o = out(point, "point")?;
        let p = culling_point(z, f, residual).or_status()?;
        *o = FcCullingPoint {
            z: p.z,
            f: p.f,
            e0: p.e0,
            e1: p.e1,
            gamma0: p.gamma0,
            gamma1: p.gamma1,
            lifetime_ratio: p.tau0_over_tau1,
            t_hold: p.t_hold,
            ground_loss: p.ground_loss,
            log10_loss: p.log10_loss,
        };
        Ok(())
    })
}

/// # Safety
/// `map` must be valid for writes; release the handle with `fc_fidelity_map_free`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fc_fidelity_map(
    z_min: f64,
    z_max: f64,
    f_min: f64,
    f_max: f64,
    nz: usize,
    nf: usize,
    residual: f64,
    map: *mut *mut FcFidelityMap,
) -> FcStatus {
    guard(|| {
        let o = out(map, "map")?;
        let inner = fidelity_map((z_min, z_max), (f_min, f_max), nz, nf, residual).or_status()?;
        let csv = inner.to_csv();
        *o = Box::into_raw(Box::new(FcFidelityMap { inner, csv }));
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle from `fc_fidelity_map` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_fidelity_map_free(map: *mut FcFidelityMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Culling point at grid cell (iz, jf); cells whose computation failed report `Numerical`.
///
/// # Safety
/// `map` must be a live handle; `point` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_fidelity_map_cell(
    map: *const FcFidelityMap,
    iz: usize,
    jf: usize,
    point: *mut FcCullingPoint,
) -> FcStatus {
    guard(|| {
        let m = map.as_ref().ok_or_else(|| null("map"))?;
        let o = out(point, "point")?;
        let Some(cell) = m.inner.points.get(iz).and_then(|row| row.get(jf)) else {
            set_error(format!("cell ({iz}, {jf}) out of range"));
            return Err(FcStatus::OutOfRange);
        };
        let Some(p) = cell.point else {
            set_error(cell.error.clone().unwrap_or_default());
            return Err(FcStatus::Numerical);
        };
        *o = FcCullingPoint {
            z: p.z,
            f: p.f,
            e0: p.e0,
            e1: p.e1,
            gamma0: p.gamma0,
            gamma1: p.gamma1,
            lifetime_ratio: p.tau0_over_tau1,
            t_hold: p.t_hold,
            ground_loss: p.ground_loss,
            log10_loss: p.log10_loss,
        };
        Ok(())
    })
}

/// Copy the map's CSV rendering into `buf` (NUL-terminated, truncated to `len`).
/// `needed` receives the full length excluding the terminator.
///
/// # Safety
/// `map` must be a live handle; `buf` null or valid for `len` bytes; `needed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_fidelity_map_csv(
    map: *const FcFidelityMap,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> FcStatus {
    guard(|| {
        let m = map.as_ref().ok_or_else(|| null("map"))?;
        *out(needed, "needed")? = m.csv.len();
        if !buf.is_null() && len > 0 {
            let n = m.csv.len().min(len - 1);
            ptr::copy_nonoverlapping(m.csv.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        Ok(())
    })
}

/// Lowest two double-well levels at grid spacing `spacing` (walls at d/2 + 8).
///
/// # Safety
/// Out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_double_well(
    d: f64,
    f: f64,
    spacing: f64,
    e0: *mut f64,
    e1: *mut f64,
    ground_centroid: *mut f64,
) -> FcStatus {
    guard(|| {
        let (a, b, c) = (out(e0, "e0")?, out(e1, "e1")?, out(ground_centroid, "ground_centroid")?);
        let w = solve_double_well(d, f, 2, &GridSpec { half_width: None, spacing }).or_status()?;
        *a = w.energies[0];
        *b = w.energies[1];
        *c = w.ground_centroid;
        Ok(())
    })
}

/// Pairing gap and thermal k = 0 occupation of the Fermi gas.
///
/// # Safety
/// Out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_dfg(kf_a: f64, t_over_tf: f64, gap: *mut f64, occupation: *mut f64) -> FcStatus {
    guard(|| {
        let (g, n) = (out(gap, "gap")?, out(occupation, "occupation")?);
        *g = pairing_gap(kf_a).or_status()?;
        *n = thermal_ground_occupation(t_over_tf).or_status()?;
        Ok(())
    })
}

/// Oscillator units for 6Li at trap frequency `freq_hz`.
///
/// # Safety
/// `units` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fc_units_lithium6(freq_hz: f64, units: *mut FcUnits) -> FcStatus {
    guard(|| {
        let o = out(units, "units")?;
        let u = UnitSystem::lithium6(freq_hz).or_status()?;
        *o = FcUnits { mass: u.mass, omega: u.omega, x0: u.x0, e0: u.e0, t0: u.t0, f0: u.f0 };
        Ok(())
    })
}
