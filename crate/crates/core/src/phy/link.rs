use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::window::{coherent_statistic, energy_margin, energy_pair};
use super::{pulse_template, HoppingPlan, PhyParams, Scheme};
use crate::channel::ChannelImpulseResponse;
use crate::error::{Error, Result};

/// What a receiver knows about its channel: where the strongest path lands
/// (in samples) and, for coherent detection, its complex gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelKnowledge {
    pub delay_samples: usize,
    pub gain: Complex64,
}

impl ChannelKnowledge {
    pub fn from_cir(cir: &ChannelImpulseResponse, params: &PhyParams) -> Self {
        let t = cir.taps()[cir.strongest_tap()];
        ChannelKnowledge {
            delay_samples: (t.delay / params.sample_period()).round() as usize,
            gain: t.amplitude,
        }
    }
}

/// Samples per frame and per bit for `plan`.
pub(crate) fn frame_samples(plan: &HoppingPlan, params: &PhyParams) -> usize {
    plan.n_h as usize * params.samples_per_chip
}

/// Start sample of the pulse for chip `j` of bit `i`.
pub(crate) fn pulse_start(plan: &HoppingPlan, params: &PhyParams, i: usize, j: usize, pos: u8) -> usize {
    let frame = i * plan.n_s as usize + j;
    frame * frame_samples(plan, params)
        + plan.th[j] as usize * params.samples_per_chip
        + pos as usize * params.delta_samples()
}

/// Baseband pulse train for `bits`; bit `i`, chip `j` occupies frame
/// `i·N_s + j`.
pub fn modulate(bits: &[u8], plan: &HoppingPlan, params: &PhyParams, scheme: Scheme) -> Result<Vec<f64>> {
    if plan.scheme != scheme {
        return Err(Error::SchemeMismatch {
            plan: plan.scheme.name(),
            requested: scheme.name(),
        });
    }
    params.validate()?;
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::InvalidBit(b));
    }
    let template = pulse_template(params);
    let bit_len = plan.n_s as usize * frame_samples(plan, params);
    let mut out = vec![0.0; bits.len() * bit_len];
    for (i, &bit) in bits.iter().enumerate() {
        for j in 0..plan.n_s as usize {
            let start = pulse_start(plan, params, i, j, plan.position(j, bit));
            let pol = plan.polarity(j);
            for (k, p) in template.iter().enumerate() {
                out[start + k] += pol * p;
            }
        }
    }
    Ok(out)
}

/// Tap-delay convolution plus complex white Gaussian noise.
///
/// Tap delays are rounded to the nearest sample. With the pulse template
/// at unit discrete energy, a per-sample noise variance `E|n|² = η` gives a
/// matched-filter output noise variance of `η`, so `η` is the noise energy
/// relative to a unit-gain received pulse. The output is longer than the
/// input by the largest tap delay.
pub fn apply_channel<R: Rng + ?Sized>(
    stream: &[f64],
    cir: &ChannelImpulseResponse,
    eta: f64,
    params: &PhyParams,
    rng: &mut R,
) -> Vec<Complex64> {
    let dt = params.sample_period();
    let taps: Vec<(usize, Complex64)> = cir
        .taps()
        .iter()
        .map(|t| ((t.delay / dt).round().max(0.0) as usize, t.amplitude))
        .collect();
    let tail = taps.iter().map(|t| t.0).max().unwrap_or(0);
    let mut out = vec![Complex64::new(0.0, 0.0); stream.len() + tail];
    for (d, h) in &taps {
        for (n, &x) in stream.iter().enumerate() {
            if x != 0.0 {
                out[n + d] += h * x;
            }
        }
    }
    if eta > 0.0 {
        let s = (eta / 2.0).sqrt();
        for v in out.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * s, im * s);
        }
    }
    out
}

/// Add `other` into `acc` starting at sample `offset`, growing `acc` as
/// needed.
pub fn superpose(acc: &mut Vec<Complex64>, other: &[Complex64], offset: usize) {
    if acc.len() < offset + other.len() {
        acc.resize(offset + other.len(), Complex64::new(0.0, 0.0));
    }
    for (a, b) in acc[offset..].iter_mut().zip(other) {
        *a += b;
    }
}

fn window<'a>(stream: &'a [Complex64], start: usize, len: usize) -> std::borrow::Cow<'a, [Complex64]> {
    if start + len <= stream.len() {
        std::borrow::Cow::Borrowed(&stream[start..start + len])
    } else {
        let mut w = vec![Complex64::new(0.0, 0.0); len];
        if start < stream.len() {
            w[..stream.len() - start].copy_from_slice(&stream[start..]);
        }
        std::borrow::Cow::Owned(w)
    }
}

/// Correlation receiver for [`Scheme::PpmBpsk`] using the strongest path.
pub fn demodulate_coherent(
    stream: &[Complex64],
    plan: &HoppingPlan,
    params: &PhyParams,
    knowledge: &ChannelKnowledge,
    n_bits: usize,
) -> Result<Vec<u8>> {
    if plan.scheme != Scheme::PpmBpsk {
        return Err(Error::SchemeMismatch {
            plan: plan.scheme.name(),
            requested: Scheme::PpmBpsk.name(),
        });
    }
    let template = pulse_template(params);
    let len = params.delta_samples() + template.len();
    Ok((0..n_bits)
        .map(|i| {
            let s: f64 = (0..plan.n_s as usize)
                .map(|j| {
                    let start = pulse_start(plan, params, i, j, 0) + knowledge.delay_samples;
                    let w = window(stream, start, len);
                    plan.code[j] as f64 * coherent_statistic(&w, &template, params.delta_samples(), knowledge.gain)
                })
                .sum();
            (s > 0.0) as u8
        })
        .collect())
}

/// Energy-detector receiver for [`Scheme::PpmPpm`]; needs frame timing only.
pub fn demodulate_noncoherent(
    stream: &[Complex64],
    plan: &HoppingPlan,
    params: &PhyParams,
    knowledge: &ChannelKnowledge,
    n_bits: usize,
) -> Result<Vec<u8>> {
    if plan.scheme != Scheme::PpmPpm {
        return Err(Error::SchemeMismatch {
            plan: plan.scheme.name(),
            requested: Scheme::PpmPpm.name(),
        });
    }
    let ds = params.delta_samples();
    Ok((0..n_bits)
        .map(|i| {
            let s: f64 = (0..plan.n_s as usize)
                .map(|j| {
                    let start = pulse_start(plan, params, i, j, 0) + knowledge.delay_samples;
                    let (e0, e1) = energy_pair(&window(stream, start, 2 * ds), ds);
                    energy_margin(e0, e1, plan.code[j] as u8)
                })
                .sum();
            (s > 0.0) as u8
        })
        .collect())
}
