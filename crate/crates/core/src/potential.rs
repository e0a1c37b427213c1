//! Model potentials in oscillator units.
//!
//! The culling trap is a parabola x^2/2 cut off at x = -z/2 and continued as
//! a straight line, with a global tilt f x. For f > 0 the left side slopes
//! downhill to -inf, which is where ionised atoms escape. The interior
//! minimum sits at x = -f; completing the square gives
//! V = (x + f)^2 / 2 - f^2 / 2 inside the parabola.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// Length of the parabolic section.
    pub z: f64,
    /// Slope of the linear section (tilt).
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapGeometry {
    pub x_min: f64,
    pub v_min: f64,
    pub edge: f64,
    /// Barrier height: potential at the truncation point.
    pub v_edge: f64,
    pub depth: f64,
}

impl TrapSpec {
    pub fn new(z: f64, f: f64) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::domain(format!("trap size must be positive, got {z}")));
        }
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::domain(format!("tilt must be non-negative, got {f}")));
        }
        if f >= 0.5 * z {
            return Err(Error::DegenerateTrap { f, half_z: 0.5 * z });
        }
        Ok(TrapSpec { z, f })
    }

    pub fn edge(&self) -> f64 {
        -0.5 * self.z
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_trap(self, x)
    }

    pub fn geometry(&self) -> Result<TrapGeometry> {
        trap_geometry(self)
    }
}

pub fn eval_trap(spec: &TrapSpec, x: f64) -> f64 {
    let edge = -0.5 * spec.z;
    if x >= edge {
        0.5 * x * x + spec.f * x
    } else {
        spec.z * spec.z / 8.0 + spec.f * x
    }
}

pub fn trap_geometry(spec: &TrapSpec) -> Result<TrapGeometry> {
    let TrapSpec { z, f } = *spec;
    if f >= 0.5 * z {
        return Err(Error::DegenerateTrap { f, half_z: 0.5 * z });
    }
    let v_edge = z * z / 8.0 - 0.5 * f * z;
    let v_min = -0.5 * f * f;
    let half = 0.5 * z - f;
    Ok(TrapGeometry { x_min: -f, v_min, edge: -0.5 * z, v_edge, depth: 0.5 * half * half })
}

/// Two spliced parabolas with minima at -d/2 and d/2 (before tilt), joined at x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWell {
    pub d: f64,
    pub f: f64,
}

impl DoubleWell {
    pub fn new(d: f64, f: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::domain(format!("separation must be non-negative, got {d}")));
        }
        if !f.is_finite() {
            return Err(Error::domain("tilt must be finite"));
        }
        Ok(DoubleWell { d, f })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_double_well(self.d, self.f, x)
    }
}

pub fn eval_double_well(d: f64, f: f64, x: f64) -> f64 {
    let c = if x < 0.0 { x + 0.5 * d } else { x - 0.5 * d };
    0.5 * c * c + f * x
}
