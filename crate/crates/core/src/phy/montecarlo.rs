use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::link::{frame_samples, pulse_start};
use super::window::{
    add_noise, coherent_statistic, energy_margin, energy_pair, Emitter, FramePulse, Memo, Renderer,
};
use super::{derive_hopping_plan, pulse_template, HoppingPlan, PhyParams, Scheme};
use crate::channel::{calibrate_exponential_profile, ChannelImpulseResponse, ARM_TAU_M, ARM_TAU_RMS};
use crate::error::{Error, Result};
use crate::rng::{substream, tag, SimRng};

/// Taps in the default arm channel.
pub const ARM_CHANNEL_TAPS: usize = 6;
/// Seed of the default arm channel's tap phases.
pub const ARM_CHANNEL_SEED: u64 = 2024;

/// Everything the BER estimators need besides the scheme and frame pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub phy: PhyParams,
    /// Desired-link channel, normalised so its strongest tap has unit gain.
    pub channel: ChannelImpulseResponse,
    /// Noise energy relative to a unit-gain received pulse.
    pub eta: f64,
    /// Power of every interferer's channel relative to the desired one.
    pub interferer_gain: f64,
}

impl LinkModel {
    /// Noise energy of the default model (received pulse SNR of 11.4 dB).
    pub const DEFAULT_ETA: f64 = 0.072_443_596_007_499_01;
    /// Interferer-to-desired channel power ratio of the default model.
    pub const DEFAULT_INTERFERER_GAIN: f64 = 0.95;

    /// Arm channel calibrated to the measured delay statistics, default
    /// noise level and equal-power interferers.
    pub fn arm_default() -> Self {
        let profile = calibrate_exponential_profile(ARM_CHANNEL_TAPS, ARM_TAU_M, ARM_TAU_RMS)
            .expect("arm delay statistics are reachable");
        LinkModel {
            phy: PhyParams::default(),
            channel: profile.synthesize(ARM_CHANNEL_SEED).normalized_to_strongest(),
            eta: Self::DEFAULT_ETA,
            interferer_gain: Self::DEFAULT_INTERFERER_GAIN,
        }
    }

    /// Single unit tap, no noise.
    pub fn ideal() -> Self {
        LinkModel {
            phy: PhyParams::default(),
            channel: ChannelImpulseResponse::identity(),
            eta: 0.0,
            interferer_gain: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phy.validate()?;
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("noise energy must be finite and non-negative"));
        }
        if !(self.interferer_gain >= 0.0 && self.interferer_gain.is_finite()) {
            return Err(Error::invalid("interferer gain must be finite and non-negative"));
        }
        Ok(())
    }

    pub(crate) fn tap_samples(&self) -> Vec<(i64, Complex64)> {
        let dt = self.phy.sample_period();
        self.channel
            .taps()
            .iter()
            .map(|t| ((t.delay / dt).round() as i64, t.amplitude))
            .collect()
    }

    pub(crate) fn strongest(&self) -> (i64, Complex64) {
        let t = self.channel.taps()[self.channel.strongest_tap()];
        ((t.delay / self.phy.sample_period()).round() as i64, t.amplitude)
    }

    pub(crate) fn renderer(&self) -> Renderer {
        Renderer {
            template: pulse_template(&self.phy),
            spc: self.phy.samples_per_chip as i64,
            ds: self.phy.delta_samples() as i64,
        }
    }

    /// Receiver window length for `scheme`.
    pub(crate) fn window_len(&self, scheme: Scheme) -> usize {
        let ds = self.phy.delta_samples();
        match scheme {
            Scheme::PpmBpsk => ds + self.phy.pulse_samples(),
            Scheme::PpmPpm => 2 * ds,
        }
    }

    /// Interferer channels share the desired delay profile, scaled by the
    /// interferer gain and rotated by a random common phase.
    pub(crate) fn interferer_rotation<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        Complex64::from_polar(self.interferer_gain.sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub ber: f64,
    /// Half-width of the 95% confidence interval.
    pub half_width: f64,
    pub trials: u64,
    pub errors: f64,
}

/// Wilson score interval for `errors` out of `n` at normal quantile `z`.
pub fn wilson_interval(errors: f64, n: f64, z: f64) -> (f64, f64) {
    if n <= 0.0 {
        return (0.0, 1.0);
    }
    let p = (errors / n).clamp(0.0, 1.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors <= 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors >= n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub(crate) const Z95: f64 = 1.959_963_984_540_054;

struct PlannedSource<'a> {
    plan: &'a HoppingPlan,
    bits: Memo<u8>,
}

impl PlannedSource<'_> {
    fn pulse<R: Rng + ?Sized>(&mut self, f: i64, rng: &mut R) -> FramePulse {
        let n_s = self.plan.n_s as i64;
        let (b, j) = (f.div_euclid(n_s), f.rem_euclid(n_s) as usize);
        let bit = self.bits.get_or(b, || rng.gen_range(0..2u8));
        FramePulse {
            chip: self.plan.th[j],
            pos: self.plan.position(j, bit),
            polarity: self.plan.polarity(j),
        }
    }
}

/// Decide one bit sent by a random node among `k` asynchronous interferers.
/// Returns the number of bit errors (0 or 1).
fn bit_trial(model: &LinkModel, rend: &Renderer, scheme: Scheme, n_h: u32, n_s: u32, k: u32, rng: &mut SimRng) -> u32 {
    let mut ids: Vec<u64> = Vec::with_capacity(k as usize + 1);
    while ids.len() < k as usize + 1 {
        let id: u64 = rng.gen();
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let plans: Vec<HoppingPlan> = ids.iter().map(|&id| derive_hopping_plan(id, n_h, n_s, scheme)).collect();
    let sent: u8 = rng.gen_range(0..2);

    let fs = frame_samples(&plans[0], &model.phy) as i64;
    let bit_samples = fs * n_s as i64;
    let taps = model.tap_samples();
    let mut emitters = vec![Emitter {
        offset: 0,
        frame_samples: fs,
        taps: taps.clone(),
        rot: Complex64::new(1.0, 0.0),
    }];
    for _ in 0..k {
        let rot = model.interferer_rotation(rng);
        emitters.push(Emitter {
            offset: rng.gen_range(0..bit_samples),
            frame_samples: fs,
            taps: taps.clone(),
            rot,
        });
    }
    let mut sources: Vec<PlannedSource> = plans
        .iter()
        .map(|p| PlannedSource {
            plan: p,
            bits: Memo::default(),
        })
        .collect();
    sources[0].bits.insert(0, sent);

    let (d_strong, h_strong) = model.strongest();
    let ds = model.phy.delta_samples();
    let len = model.window_len(scheme);
    let mut w = vec![Complex64::new(0.0, 0.0); len];
    let mut decision = 0.0;
    for j in 0..n_s as usize {
        let w0 = pulse_start(&plans[0], &model.phy, 0, j, 0) as i64 + d_strong;
        w.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (em, src) in emitters.iter().zip(sources.iter_mut()) {
            rend.add(&mut w, w0, em, |f| src.pulse(f, rng));
        }
        add_noise(&mut w, model.eta, rng);
        match scheme {
            Scheme::PpmBpsk => {
                decision += plans[0].code[j] as f64 * coherent_statistic(&w, &rend.template, ds, h_strong)
            }
            Scheme::PpmPpm => {
                let (e0, e1) = energy_pair(&w, ds);
                decision += energy_margin(e0, e1, plans[0].code[j] as u8);
            }
        }
    }
    ((decision > 0.0) as u8 != sent) as u32
}

/// Bit-counting Monte Carlo BER for one `(scheme, N_h, N_s, K)` point.
///
/// Each trial draws fresh node ids for the desired link and `k`
/// interferers, random data, and a uniform sample-level offset per
/// interferer, then renders the received signal inside the desired
/// receiver's windows only. Trials use independent substreams of `seed`,
/// so the result does not depend on thread scheduling.
pub fn estimate_ber(
    model: &LinkModel,
    scheme: Scheme,
    n_h: u32,
    n_s: u32,
    k: u32,
    trials: u64,
    seed: u64,
) -> Result<BerEstimate> {
    model.validate()?;
    if trials < 100 {
        return Err(Error::invalid("estimate_ber needs at least 100 trials"));
    }
    if n_h < 1 || n_s < 1 {
        return Err(Error::invalid("N_h and N_s must be at least 1"));
    }
    let rend = model.renderer();
    let key = point_key(scheme, n_h, n_s, k);
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed ^ key, tag::BER_TRIAL, t);
            bit_trial(model, &rend, scheme, n_h, n_s, k, &mut rng) as u64
        })
        .sum();
    let (lo, hi) = wilson_interval(errors as f64, trials as f64, Z95);
    Ok(BerEstimate {
        ber: errors as f64 / trials as f64,
        half_width: 0.5 * (hi - lo),
        trials,
        errors: errors as f64,
    })
}

/// Mix a grid point into a seed so neighbouring points use unrelated streams.
pub(crate) fn point_key(scheme: Scheme, n_h: u32, n_s: u32, k: u32) -> u64 {
    let s = match scheme {
        Scheme::PpmBpsk => 1u64,
        Scheme::PpmPpm => 2u64,
    };
    (s << 56 | (k as u64) << 40 | (n_h as u64) << 20 | n_s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_zero_errors() {
        let (lo, hi) = wilson_interval(0.0, 1e4, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 3.0e-4 && hi < 4.0e-4);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30.0, 100.0, Z95);
        assert!(lo < 0.3 && 0.3 < hi);
    }

    #[test]
    fn ideal_link_is_error_free() {
        for scheme in Scheme::ALL {
            let e = estimate_ber(&LinkModel::ideal(), scheme, 3, 4, 0, 500, 1).unwrap();
            assert_eq!(e.errors, 0.0);
        }
    }

    #[test]
    fn too_few_trials() {
        assert!(estimate_ber(&LinkModel::ideal(), Scheme::PpmPpm, 1, 1, 0, 99, 1).is_err());
    }
}
