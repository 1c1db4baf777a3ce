use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.8542e-12;

/// Ultrasound intensity limit for tissue, W/m².
pub const INTENSITY_LIMIT: f64 = 1.0e4;

/// RMS pressure at which the acoustic intensity equals `intensity`.
pub fn max_safe_pressure(intensity: f64, rho: f64, c: f64) -> f64 {
    (intensity * rho * c).sqrt()
}

/// Static capacitance of a disc transducer of area `area`, relative
/// permittivity `k_rel` and thickness `thickness`.
pub fn static_capacitance(area: f64, k_rel: f64, thickness: f64) -> f64 {
    area * EPSILON_0 * k_rel / thickness
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiezoParams {
    /// Explicit capacitance; derived from the disc geometry when absent.
    pub c0: Option<f64>,
    pub area: f64,
    pub k_rel: f64,
    pub thickness: f64,
    pub g33: f64,
    /// Output pressure, Pa.
    pub pressure: f64,
    pub rho: f64,
    pub c: f64,
    pub intensity_limit: f64,
}

impl Default for PiezoParams {
    /// A 1 mm PZT disc, 0.1 mm thick, driven at the muscle intensity limit
    /// with the bundled muscle parameters.
    fn default() -> Self {
        let muscle = crate::tissue::TissueTable::bundled().muscle;
        let (rho, c) = (muscle.rho, muscle.c);
        PiezoParams {
            c0: None,
            area: std::f64::consts::PI * 0.5e-3 * 0.5e-3,
            k_rel: 1800.0,
            thickness: 0.1e-3,
            g33: 24.8e-3,
            pressure: max_safe_pressure(INTENSITY_LIMIT, rho, c),
            rho,
            c,
            intensity_limit: INTENSITY_LIMIT,
        }
    }
}

impl PiezoParams {
    pub fn capacitance(&self) -> f64 {
        self.c0
            .unwrap_or_else(|| static_capacitance(self.area, self.k_rel, self.thickness))
    }

    pub fn drive_voltage(&self) -> f64 {
        self.g33 * self.pressure * self.thickness
    }

    pub fn max_voltage(&self) -> f64 {
        self.g33 * max_safe_pressure(self.intensity_limit, self.rho, self.c) * self.thickness
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area", self.area),
            ("k_rel", self.k_rel),
            ("thickness", self.thickness),
            ("g33", self.g33),
            ("pressure", self.pressure),
            ("rho", self.rho),
            ("c", self.c),
            ("intensity_limit", self.intensity_limit),
            ("c0", self.c0.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("piezo {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Energy drawn to emit one pulse, `C0·V²` with `V = g33·P·t_h`.
pub fn pulse_energy(piezo: &PiezoParams) -> Result<f64> {
    piezo.validate()?;
    let (voltage, max) = (piezo.drive_voltage(), piezo.max_voltage());
    if voltage > max * (1.0 + 1e-12) {
        return Err(Error::SafetyCap { voltage, max });
    }
    Ok(piezo.capacitance() * voltage * voltage)
}

/// Energy per bit `E_p·N_s` (J) and per second `E_p/(Tc·N_h)` (W).
pub fn energy_metrics(e_p: f64, n_h: u32, n_s: u32, tc: f64) -> (f64, f64) {
    (e_p * n_s as f64, e_p / (tc * n_h as f64))
}
