//! Occupation estimates for the degenerate Fermi gas before culling.
//!
//! Energies are in units of the Fermi energy, temperatures in units of T_F.
//! Only the lowest single-particle state (k = 0) is considered, with the
//! chemical potential set to E_F.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfgParams {
    /// k_F a_s; negative for attraction.
    pub kf_a: f64,
    pub t_over_tf: f64,
}

/// Weak-coupling pairing gap Delta / E_F = 0.5 exp(pi / (2 k_F a)).
pub fn pairing_gap(kf_a: f64) -> Result<f64> {
    if !(kf_a.is_finite() && kf_a < 0.0) {
        return Err(Error::domain(format!("pairing gap needs attractive k_F a < 0, got {kf_a}")));
    }
    Ok(0.5 * (PI / (2.0 * kf_a)).exp())
}

/// BCS occupation (1 - eta/eps)/2 of the k = 0 state, eta = -E_F.
pub fn bcs_ground_occupation(gap_ratio: f64) -> Result<f64> {
    if !(gap_ratio.is_finite() && gap_ratio >= 0.0) {
        return Err(Error::domain(format!("gap ratio must be non-negative, got {gap_ratio}")));
    }
    let eps = gap_ratio.hypot(1.0);
    Ok(0.5 * (1.0 + 1.0 / eps))
}

/// 1 - bcs_ground_occupation, computed without cancellation.
pub fn bcs_ground_vacancy(gap_ratio: f64) -> Result<f64> {
    bcs_ground_occupation(gap_ratio)?;
    let eps = gap_ratio.hypot(1.0);
    // (1 - 1/eps)/2 = d^2 / (2 eps (eps + 1))
    Ok(gap_ratio * gap_ratio / (2.0 * eps * (eps + 1.0)))
}

/// Fermi-Dirac occupation 1/(exp(-E_F/k_B T) + 1) of the bottom of the band.
/// Returns exactly 1 at zero temperature.
pub fn thermal_ground_occupation(t_over_tf: f64) -> Result<f64> {
    if !(t_over_tf.is_finite() && t_over_tf >= 0.0) {
        return Err(Error::domain(format!("temperature ratio must be non-negative, got {t_over_tf}")));
    }
    if t_over_tf == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / ((-1.0 / t_over_tf).exp() + 1.0))
}

/// 1 - thermal_ground_occupation without cancellation.
pub fn thermal_ground_vacancy(t_over_tf: f64) -> Result<f64> {
    thermal_ground_occupation(t_over_tf)?;
    if t_over_tf == 0.0 {
        return Ok(0.0);
    }
    let e = (-1.0 / t_over_tf).exp();
    Ok(e / (1.0 + e))
}

/// A commonly quoted rounded figure next to what the formulas give.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedNote {
    pub quantity: String,
    pub quoted: f64,
    pub computed: f64,
    pub note: String,
}

/// Two quoted Step-I vacancies do not follow from the formulas above. They are
/// reported side by side and left unreconciled.
pub fn recorded_notes() -> Vec<RecordedNote> {
    let gap = 0.5 * (PI / (2.0 * -0.3f64)).exp();
    let eps = gap.hypot(1.0);
    let bcs_vacancy = gap * gap / (2.0 * eps * (eps + 1.0));
    let e20 = (-20.0f64).exp();
    vec![
        RecordedNote {
            quantity: "1 - n(0) at T = 0.05 T_F".into(),
            quoted: 4e-5,
            computed: e20 / (1.0 + e20),
            note: "the quoted 4e-5 is the formula's value at T = 0.1 T_F".into(),
        },
        RecordedNote {
            quantity: "BCS 1 - n(k=0) at k_F a = -0.3".into(),
            quoted: 4e-6,
            computed: bcs_vacancy,
            note: "the quoted 4e-6 needs Delta/E_F near 0.004 rather than 0.00266".into(),
        },
    ]
}

/// Labelled rows for the report table: (label, value).
pub fn estimates(params: &DfgParams) -> Result<Vec<(String, f64)>> {
    let gap = pairing_gap(params.kf_a)?;
    Ok(vec![
        ("k_F a".into(), params.kf_a),
        ("pairing gap Delta/E_F".into(), gap),
        ("BCS n(k=0)".into(), bcs_ground_occupation(gap)?),
        ("BCS 1 - n(k=0)".into(), bcs_ground_vacancy(gap)?),
        ("T/T_F".into(), params.t_over_tf),
        ("thermal n(0)".into(), thermal_ground_occupation(params.t_over_tf)?),
        ("thermal 1 - n(0)".into(), thermal_ground_vacancy(params.t_over_tf)?),
    ])
}
