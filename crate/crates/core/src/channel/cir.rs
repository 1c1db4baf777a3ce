use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, tag};

/// Coherence bandwidth = `COHERENCE_FACTOR / tau_rms`.
pub const COHERENCE_FACTOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Delay in seconds.
    pub delay: f64,
    pub amplitude: Complex64,
}

/// Complex low-pass tap-delay line.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImpulseResponse {
    taps: Vec<Tap>,
    /// Transmitter–receiver distance the response was measured at, metres.
    pub reference_distance: f64,
}

impl ChannelImpulseResponse {
    pub fn new(taps: Vec<Tap>, reference_distance: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptyResponse);
        }
        for w in taps.windows(2) {
            if !(w[1].delay > w[0].delay) {
                return Err(Error::invalid("tap delays must be strictly increasing"));
            }
        }
        if taps
            .iter()
            .any(|t| !t.delay.is_finite() || !t.amplitude.re.is_finite() || !t.amplitude.im.is_finite())
        {
            return Err(Error::invalid("tap delays and amplitudes must be finite"));
        }
        Ok(ChannelImpulseResponse {
            taps,
            reference_distance,
        })
    }

    /// Single unit tap at zero delay.
    pub fn identity() -> Self {
        ChannelImpulseResponse {
            taps: vec![Tap {
                delay: 0.0,
                amplitude: Complex64::new(1.0, 0.0),
            }],
            reference_distance: 0.0,
        }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    /// Index of the tap with the largest magnitude (earliest on ties).
    pub fn strongest_tap(&self) -> usize {
        let mut best = 0;
        for (i, t) in self.taps.iter().enumerate() {
            if t.amplitude.norm_sqr() > self.taps[best].amplitude.norm_sqr() {
                best = i;
            }
        }
        best
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        ChannelImpulseResponse {
            taps: self
                .taps
                .iter()
                .map(|t| Tap {
                    delay: t.delay,
                    amplitude: t.amplitude * factor,
                })
                .collect(),
            reference_distance: self.reference_distance,
        }
    }

    /// Copy with the strongest tap scaled to unit magnitude.
    pub fn normalized_to_strongest(&self) -> Self {
        let peak = self.taps[self.strongest_tap()].amplitude.norm();
        self.scaled(Complex64::new(1.0 / peak, 0.0))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delay_s", "re", "im"])?;
        for t in &self.taps {
            w.write_record([
                t.delay.to_string(),
                t.amplitude.re.to_string(),
                t.amplitude.im.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, reference_distance: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            delay_s: f64,
            re: f64,
            im: f64,
        }
        let mut taps = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let row: Row = row?;
            taps.push(Tap {
                delay: row.delay_s,
                amplitude: Complex64::new(row.re, row.im),
            });
        }
        Self::new(taps, reference_distance)
    }
}

/// Delay-spread statistics of a power-delay profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayStats {
    /// Mean excess delay relative to the first arrival, s.
    pub tau_m: f64,
    /// RMS delay spread, s.
    pub tau_rms: f64,
    /// `COHERENCE_FACTOR / tau_rms`, Hz (infinite for a single-path channel).
    pub coherence_bandwidth: f64,
}

/// Power-weighted first and second central moments of the tap delays.
pub fn delay_stats(cir: &ChannelImpulseResponse) -> DelayStats {
    let taps = cir.taps();
    let t0 = taps[0].delay;
    let total = cir.total_power();
    let (mut m1, mut m2) = (0.0, 0.0);
    for t in taps {
        let p = t.amplitude.norm_sqr() / total;
        let x = t.delay - t0;
        m1 += p * x;
        m2 += p * x * x;
    }
    let tau_rms = (m2 - m1 * m1).max(0.0).sqrt();
    DelayStats {
        tau_m: m1,
        tau_rms,
        coherence_bandwidth: if tau_rms > 0.0 {
            COHERENCE_FACTOR / tau_rms
        } else {
            f64::INFINITY
        },
    }
}

/// Exponentially decaying profile: tap `k` has power ∝ e^(−k·spacing/decay).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialProfile {
    pub n_taps: usize,
    pub tap_spacing: f64,
    pub decay_constant: f64,
}

impl ExponentialProfile {
    pub fn synthesize(&self, seed: u64) -> ChannelImpulseResponse {
        synth_impulse_response(self.n_taps, self.tap_spacing, self.decay_constant, seed)
    }
}

/// Unit-power exponential power-delay profile with uniform random tap phases.
pub fn synth_impulse_response(
    n_taps: usize,
    tap_spacing: f64,
    decay_constant: f64,
    seed: u64,
) -> ChannelImpulseResponse {
    assert!(n_taps >= 1, "n_taps must be at least 1");
    let mut rng = substream(seed, tag::CHANNEL, 0);
    let ratio = (-tap_spacing / decay_constant).exp();
    let weights: Vec<f64> = (0..n_taps).map(|k| ratio.powi(k as i32)).collect();
    let norm: f64 = weights.iter().sum();
    let taps = weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            Tap {
                delay: k as f64 * tap_spacing,
                amplitude: Complex64::from_polar((w / norm).sqrt(), phase),
            }
        })
        .collect();
    ChannelImpulseResponse {
        taps,
        reference_distance: 0.0,
    }
}

/// Moments of a geometric profile with ratio `q` and unit spacing.
fn geometric_moments(n_taps: usize, q: f64) -> (f64, f64) {
    let (mut w, mut s0, mut s1, mut s2) = (1.0, 0.0, 0.0, 0.0);
    for k in 0..n_taps {
        let x = k as f64;
        s0 += w;
        s1 += w * x;
        s2 += w * x * x;
        w *= q;
    }
    let m = s1 / s0;
    (m, (s2 / s0 - m * m).max(0.0).sqrt())
}

/// Fit an exponential profile with `n_taps` taps to target delay moments.
///
/// The ratio `tau_m / tau_rms` fixes the per-tap power ratio; the spacing
/// then scales both moments linearly.
pub fn calibrate_exponential_profile(
    n_taps: usize,
    tau_m: f64,
    tau_rms: f64,
) -> Result<ExponentialProfile> {
    if n_taps < 2 || !(tau_m > 0.0 && tau_rms > 0.0) {
        return Err(Error::invalid("calibration needs n_taps >= 2 and positive targets"));
    }
    let target = tau_m / tau_rms;
    let ratio_at = |q: f64| {
        let (m, s) = geometric_moments(n_taps, q);
        m / s
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    if !(ratio_at(lo) < target && target < ratio_at(hi)) {
        return Err(Error::invalid(format!(
            "tau_m/tau_rms = {target:.4} not reachable with {n_taps} taps"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let (_, s_unit) = geometric_moments(n_taps, q);
    let tap_spacing = tau_rms / s_unit;
    Ok(ExponentialProfile {
        n_taps,
        tap_spacing,
        decay_constant: -tap_spacing / q.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ARM_TAU_M, ARM_TAU_RMS};
    use proptest::prelude::*;

    fn tap(delay: f64, re: f64) -> Tap {
        Tap {
            delay,
            amplitude: Complex64::new(re, 0.0),
        }
    }

    #[test]
    fn rejects_bad_tap_lists() {
        assert!(ChannelImpulseResponse::new(vec![], 0.0).is_err());
        assert!(ChannelImpulseResponse::new(vec![tap(1.0, 1.0), tap(1.0, 0.5)], 0.0).is_err());
        assert!(ChannelImpulseResponse::new(vec![tap(0.0, f64::NAN)], 0.0).is_err());
    }

    #[test]
    fn single_tap_has_no_spread() {
        let s = delay_stats(&synth_impulse_response(1, 1e-6, 1e-6, 3));
        assert_eq!(s.tau_m, 0.0);
        assert_eq!(s.tau_rms, 0.0);
        assert!(s.coherence_bandwidth.is_infinite());
    }

    #[test]
    fn two_equal_taps() {
        let d = 4e-6;
        let cir = ChannelImpulseResponse::new(vec![tap(1e-3, 1.0), tap(1e-3 + d, -1.0)], 0.2).unwrap();
        let s = delay_stats(&cir);
        assert!((s.tau_m - d / 2.0).abs() < 1e-18);
        assert!((s.tau_rms - d / 2.0).abs() < 1e-15);
    }

    #[test]
    fn arm_spread_coherence_bandwidth() {
        let bw = COHERENCE_FACTOR / ARM_TAU_RMS;
        assert!((bw - 7439.6).abs() < 1.0, "{bw}");
    }

    #[test]
    fn calibration_hits_reference_moments() {
        for n in [4, 6, 10] {
            let prof = calibrate_exponential_profile(n, ARM_TAU_M, ARM_TAU_RMS).unwrap();
            let s = delay_stats(&prof.synthesize(11));
            assert!((s.tau_rms / ARM_TAU_RMS - 1.0).abs() < 1e-9);
            assert!((s.tau_m / ARM_TAU_M - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let a = synth_impulse_response(5, 2e-6, 4e-6, 42);
        let b = synth_impulse_response(5, 2e-6, 4e-6, 42);
        assert_eq!(a, b);
        assert_ne!(a, synth_impulse_response(5, 2e-6, 4e-6, 43));
        assert!((a.total_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let cir = synth_impulse_response(4, 1.5e-6, 3e-6, 9);
        let mut buf = Vec::new();
        cir.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("delay_s,re,im\n"));
        let back = ChannelImpulseResponse::read_csv(buf.as_slice(), 0.0).unwrap();
        assert_eq!(back, cir);
    }

    proptest! {
        #[test]
        fn stats_invariant_under_scaling(seed in 0u64..1000, n in 1usize..12, scale in 1e-3f64..1e3, phase in 0.0f64..6.28) {
            let cir = synth_impulse_response(n, 1e-6, 3e-6, seed);
            let a = delay_stats(&cir);
            let b = delay_stats(&cir.scaled(Complex64::from_polar(scale, phase)));
            prop_assert!((a.tau_m - b.tau_m).abs() <= 1e-12 * a.tau_m.max(1e-18));
            prop_assert!((a.tau_rms - b.tau_rms).abs() <= 1e-9 * a.tau_rms.max(1e-18));
        }
    }
}
