//! Special functions for the stationary scattering solution.

mod airy;
mod gamma;
mod hermite;
mod kummer;
pub(crate) mod taylor;

pub use airy::{airy, airy_scaled, AiryPair, ScaledAiry, AIRY_DOMAIN};
pub use gamma::{gamma, ln_gamma, rgamma, sin_pi};
pub use hermite::{hermite_nu, hermite_nu_prime, NU_MAX, NU_MIN, X_MAX as HERMITE_X_MAX};
pub use kummer::kummer_m;

pub(crate) use hermite::weber;

