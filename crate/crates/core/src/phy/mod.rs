//! Bit-level ultrasonic wideband transceiver.
//!
//! Pulses are second-derivative-of-Gaussian shapes placed one per frame of
//! `N_h` chips, at a pseudo-random chip chosen by the hopping sequence, with
//! a PPM shift of `delta` carrying information. Each bit is spread over
//! `N_s` frames. Two spreading schemes are supported: code chips as pulse
//! polarity (coherent detection) or code chips XOR-ed into the PPM shift
//! (energy detection).

mod chiplevel;
mod hopping;
mod link;
mod montecarlo;
mod pulse;
mod sinr;
mod table;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chiplevel::{chip_level_ber, ChipLevelEstimate};
pub use hopping::{derive_hopping_plan, HoppingPlan, COMMON_CHANNEL_ID};
pub use link::{apply_channel, demodulate_coherent, demodulate_noncoherent, modulate, superpose, ChannelKnowledge};
pub use montecarlo::{estimate_ber, wilson_interval, BerEstimate, LinkModel};
pub use pulse::{pulse_template, pulse_waveform};
pub use sinr::{sinr, LinkConfig};
pub use table::{build_ber_table, BerEntry, BerKey, BerTable, TableEstimator, TableGrid};

/// Spreading / detection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Polarity-spread chips, coherent correlation receiver.
    #[serde(rename = "ppm-bpsk-spread")]
    PpmBpsk,
    /// PPM-spread chips, non-coherent energy detector.
    #[serde(rename = "ppm-ppm-spread")]
    PpmPpm,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::PpmBpsk, Scheme::PpmPpm];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::PpmBpsk => "ppm-bpsk-spread",
            Scheme::PpmPpm => "ppm-ppm-spread",
        }
    }

    pub fn coherent(self) -> bool {
        matches!(self, Scheme::PpmBpsk)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppm-bpsk-spread" | "ppm-bpsk" | "coherent" => Ok(Scheme::PpmBpsk),
            "ppm-ppm-spread" | "ppm-ppm" | "noncoherent" => Ok(Scheme::PpmPpm),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Pulse and chip timing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhyParams {
    /// Chip duration, s.
    pub tc: f64,
    /// PPM shift, s. Must be shorter than `tc`.
    pub delta: f64,
    /// Pulse support (±4σ of the Gaussian), s.
    pub pulse_width: f64,
    pub samples_per_chip: usize,
}

impl Default for PhyParams {
    fn default() -> Self {
        let tc = 0.5e-6;
        PhyParams {
            tc,
            delta: tc / 2.0,
            pulse_width: tc / 4.0,
            samples_per_chip: 32,
        }
    }
}

impl PhyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tc > 0.0) {
            return Err(Error::invalid("tc must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < self.tc) {
            return Err(Error::invalid("PPM shift must satisfy 0 < delta < tc"));
        }
        if !(self.pulse_width > 0.0) {
            return Err(Error::invalid("pulse width must be positive"));
        }
        if self.samples_per_chip < 8 {
            return Err(Error::invalid("samples_per_chip must be at least 8"));
        }
        if 2 * self.delta_samples() > self.samples_per_chip {
            return Err(Error::invalid("two PPM positions must fit inside one chip"));
        }
        if self.pulse_samples() > self.delta_samples() {
            return Err(Error::invalid("pulse must fit inside one PPM half-window"));
        }
        Ok(())
    }

    pub fn sample_period(&self) -> f64 {
        self.tc / self.samples_per_chip as f64
    }

    pub fn delta_samples(&self) -> usize {
        (self.delta / self.sample_period()).round() as usize
    }

    /// Number of template samples (support plus one).
    pub fn pulse_samples(&self) -> usize {
        (self.pulse_width / self.sample_period()).round() as usize + 1
    }

    /// Gaussian width σ_p; zero crossings of the pulse sit at ±σ_p.
    pub fn sigma_p(&self) -> f64 {
        self.pulse_width / 8.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_valid() {
        let p = PhyParams::default();
        p.validate().unwrap();
        assert_eq!(p.delta_samples(), 16);
        assert_eq!(p.pulse_samples(), 9);
    }

    #[test]
    fn delta_equal_to_chip_rejected() {
        let p = PhyParams {
            delta: 0.5e-6,
            ..PhyParams::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("delta < tc"));
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
    }
}
