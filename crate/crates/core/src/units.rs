//! Harmonic-oscillator unit system of a trap with frequency omega.
//!
//! Length x0 = sqrt(hbar / (m omega)), energy hbar omega, time 1/omega and
//! force hbar omega / x0. All culling and splitting calculations run in these
//! units; this module converts to and from SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of 6Li in atomic mass units.
pub const LI6_MASS_U: f64 = 6.015_122_8;
/// Mass of 6Li, kg.
pub const LI6_MASS: f64 = LI6_MASS_U * ATOMIC_MASS_UNIT;

/// Gauss per centimetre expressed in tesla per metre.
pub const GAUSS_PER_CM: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub mass: f64,
    pub omega: f64,
    pub x0: f64,
    pub e0: f64,
    pub t0: f64,
    pub f0: f64,
}

impl UnitSystem {
    pub fn new(mass: f64, omega: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::domain(format!("mass must be positive, got {mass}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::domain(format!("omega must be positive, got {omega}")));
        }
        let x0 = (HBAR / (mass * omega)).sqrt();
        let e0 = HBAR * omega;
        Ok(UnitSystem { mass, omega, x0, e0, t0: 1.0 / omega, f0: e0 / x0 })
    }

    /// 6Li in a trap of frequency `freq_hz` (cycles per second).
    pub fn lithium6(freq_hz: f64) -> Result<Self> {
        Self::new(LI6_MASS, 2.0 * std::f64::consts::PI * freq_hz)
    }

    pub fn length_to_dimensionless(&self, metres: f64) -> Result<f64> {
        finite(metres).map(|v| v / self.x0)
    }

    pub fn length_to_si(&self, length: f64) -> Result<f64> {
        finite(length).map(|v| v * self.x0)
    }

    pub fn time_to_dimensionless(&self, seconds: f64) -> Result<f64> {
        finite(seconds).map(|v| v / self.t0)
    }

    pub fn time_to_si(&self, time: f64) -> Result<f64> {
        finite(time).map(|v| v * self.t0)
    }

    pub fn energy_to_dimensionless(&self, joules: f64) -> Result<f64> {
        finite(joules).map(|v| v / self.e0)
    }

    pub fn energy_to_si(&self, energy: f64) -> Result<f64> {
        finite(energy).map(|v| v * self.e0)
    }

    pub fn force_to_dimensionless(&self, newtons: f64) -> Result<f64> {
        finite(newtons).map(|v| v / self.f0)
    }

    pub fn force_to_si(&self, force: f64) -> Result<f64> {
        finite(force).map(|v| v * self.f0)
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain("non-finite quantity"))
    }
}

pub fn make_unit_system(mass: f64, omega: f64) -> Result<UnitSystem> {
    UnitSystem::new(mass, omega)
}

/// Dimensionless tilt from a field gradient (T/m) acting on a magnetic moment (J/T).
///
/// The moment of the trapped state is not fixed by the model; pass
/// [`BOHR_MAGNETON`] for a fully polarised electron spin.
pub fn force_from_gradient(gradient: f64, moment: f64, units: &UnitSystem) -> Result<f64> {
    if !(moment.is_finite() && moment > 0.0) {
        return Err(Error::domain(format!("magnetic moment must be positive, got {moment}")));
    }
    if !(gradient.is_finite() && gradient >= 0.0) {
        return Err(Error::domain(format!("gradient must be non-negative, got {gradient}")));
    }
    Ok(moment * gradient / units.f0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn li6() -> UnitSystem {
        UnitSystem::new(LI6_MASS, 2.0 * PI * 1000.0).unwrap()
    }

    #[test]
    fn lithium_scales() {
        let u = li6();
        assert!((LI6_MASS - 9.988_346_4e-27).abs() < 1e-33);
        assert!((u.x0 - 1.296_287_5e-6).abs() < 1e-12);
        assert!((u.t0 - 1.591_549_4e-4).abs() < 1e-10);
        assert!(((u.f0 - u.e0 / u.x0) / u.f0).abs() < 1e-15);
    }

    #[test]
    fn unit_mass_collapses() {
        let u = UnitSystem::new(HBAR, 1.0).unwrap();
        assert!((u.x0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -1.0).is_err());
        assert!(force_from_gradient(1.0, 0.0, &li6()).is_err());
        assert!(li6().length_to_dimensionless(f64::NAN).is_err());
    }

    #[test]
    fn gradient_to_tilt() {
        let u = li6();
        assert_eq!(force_from_gradient(0.0, BOHR_MAGNETON, &u).unwrap(), 0.0);
        let f = force_from_gradient(0.66 * GAUSS_PER_CM, BOHR_MAGNETON, &u).unwrap();
        // mu_B * 6.6e-3 T/m / f0 evaluated with 30-digit arithmetic
        assert!((f - 0.119_744_842_857).abs() < 1e-9);
        let half = force_from_gradient(0.66 * GAUSS_PER_CM, BOHR_MAGNETON / 2.0, &u).unwrap();
        assert!((half - f / 2.0).abs() < 1e-15);
    }

    #[test]
    fn lengths_and_times() {
        let u = li6();
        assert!((u.length_to_dimensionless(8.8e-6).unwrap() - 6.788_617_254_7).abs() < 1e-8);
        assert!((u.length_to_dimensionless(u.x0).unwrap() - 1.0).abs() < 1e-15);
        assert!((u.time_to_dimensionless(0.218).unwrap() - 1_369.734_396_965).abs() < 1e-6);
    }

    #[test]
    fn omega_scaling() {
        let a = li6();
        let b = UnitSystem::new(LI6_MASS, 2.0 * a.omega).unwrap();
        assert!((b.t0 / a.t0 - 0.5).abs() < 1e-15);
        assert!((b.e0 / a.e0 - 2.0).abs() < 1e-15);
        assert!((b.x0 / a.x0 - 0.5f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trips(v in -1e3f64..1e3, freq in 10.0f64..1e5) {
            let u = UnitSystem::lithium6(freq).unwrap();
            let tol = 1e-12 * v.abs().max(1e-300);
            prop_assert!((u.length_to_dimensionless(u.length_to_si(v).unwrap()).unwrap() - v).abs() <= tol);
            prop_assert!((u.time_to_dimensionless(u.time_to_si(v).unwrap()).unwrap() - v).abs() <= tol);
            prop_assert!((u.energy_to_dimensionless(u.energy_to_si(v).unwrap()).unwrap() - v).abs() <= tol);
            prop_assert!((u.force_to_dimensionless(u.force_to_si(v).unwrap()).unwrap() - v).abs() <= tol);
        }
    }
}
