//! Attenuation law, path gains and tap-delay channel responses.
//!
//! Frequencies are in MHz, distances in metres and attenuation coefficients
//! in Np/m throughout this module.

mod cir;

pub use cir::{
    calibrate_exponential_profile, delay_stats, synth_impulse_response, ChannelImpulseResponse,
    DelayStats, ExponentialProfile, Tap, COHERENCE_FACTOR,
};

use crate::tissue::MediumParams;

/// Decibels per neper for amplitude ratios, 20·log10(e).
pub const DB_PER_NEPER: f64 = 8.685_889_638_065_036;

/// Reference mean excess delay of the layered arm channel, seconds.
pub const ARM_TAU_M: f64 = 1.2779e-5;
/// Reference RMS delay spread of the layered arm channel, seconds.
pub const ARM_TAU_RMS: f64 = 2.6883e-5;

/// Amplitude attenuation coefficient α = a·fᵇ in Np/m.
pub fn attenuation_coefficient(f_mhz: f64, medium: &MediumParams) -> f64 {
    debug_assert!(f_mhz > 0.0);
    medium.a * f_mhz.powf(medium.b)
}

/// Pressure amplitude ratio P(d)/P₀ = e^(−αd).
pub fn pressure_ratio(d: f64, alpha: f64) -> f64 {
    (-alpha * d).exp()
}

/// Attenuation in dB of an amplitude ratio.
pub fn attenuation_db(ratio: f64) -> f64 {
    -20.0 * ratio.log10()
}

/// Largest frequency (MHz) whose attenuation over `d` stays within `budget_db`.
///
/// Inverts `20·log10(e^(a·fᵇ·d)) = budget` in closed form. Returns infinity
/// when the medium is lossless or the distance is zero.
pub fn max_frequency_for_budget(d: f64, medium: &MediumParams, budget_db: f64) -> f64 {
    debug_assert!(budget_db > 0.0);
    let budget_np = budget_db / DB_PER_NEPER;
    if medium.a == 0.0 || d == 0.0 {
        return f64::INFINITY;
    }
    if medium.b == 0.0 {
        // attenuation independent of frequency
        return if medium.a * d <= budget_np { f64::INFINITY } else { 0.0 };
    }
    (budget_np / (medium.a * d)).powf(1.0 / medium.b)
}

/// Geometric spreading applied on top of the absorption loss.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Spreading {
    #[default]
    None,
    /// Power falls as (reference/d)² beyond `reference_m`.
    Spherical { reference_m: f64 },
}

/// Power-domain path gain e^(−2αd), the square of [`pressure_ratio`].
pub fn path_gain(d: f64, f_mhz: f64, medium: &MediumParams) -> f64 {
    path_gain_with(d, f_mhz, medium, Spreading::None)
}

pub fn path_gain_with(d: f64, f_mhz: f64, medium: &MediumParams, spreading: Spreading) -> f64 {
    let amp = pressure_ratio(d, attenuation_coefficient(f_mhz, medium));
    let absorption = amp * amp;
    match spreading {
        Spreading::None => absorption,
        Spreading::Spherical { reference_m } => {
            let r = (reference_m / d).min(1.0);
            absorption * r * r
        }
    }
}
