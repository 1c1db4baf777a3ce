//! Per-chip decision statistics and a windowed renderer that evaluates the
//! received signal only inside receiver windows.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// `Re(conj(h)·⟨r, p⟩)` at PPM offset δ minus the same at offset 0.
/// Positive favours position 1.
pub(crate) fn coherent_statistic(w: &[Complex64], template: &[f64], ds: usize, h: Complex64) -> f64 {
    let corr = |off: usize| -> Complex64 { template.iter().zip(&w[off..]).map(|(p, r)| r * p).sum() };
    (h.conj() * (corr(ds) - corr(0))).re
}

/// Energies in `[0, δ)` and `[δ, 2δ)`.
pub(crate) fn energy_pair(w: &[Complex64], ds: usize) -> (f64, f64) {
    let e = |s: &[Complex64]| s.iter().map(|v| v.norm_sqr()).sum::<f64>();
    (e(&w[..ds]), e(&w[ds..2 * ds]))
}

/// Signed energy difference between the two PPM slots, positive for "bit 1"
/// once the code chip is removed. Summed over a bit's chips it is the
/// energy-detector decision statistic.
pub(crate) fn energy_margin(e0: f64, e1: f64, code: u8) -> f64 {
    if code == 0 {
        e1 - e0
    } else {
        e0 - e1
    }
}

/// Pulse emitted in one frame: chip index, PPM position, polarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FramePulse {
    pub chip: u32,
    pub pos: u8,
    pub polarity: f64,
}

/// A transmitter as seen by the receiver: its frame grid offset and its
/// channel taps, both in samples.
#[derive(Debug, Clone)]
pub(crate) struct Emitter {
    pub offset: i64,
    pub frame_samples: i64,
    pub taps: Vec<(i64, Complex64)>,
    /// Common complex factor applied to every tap.
    pub rot: Complex64,
}

/// Receiver-side geometry shared by all emitters.
#[derive(Debug, Clone)]
pub(crate) struct Renderer {
    pub template: Vec<f64>,
    pub spc: i64,
    pub ds: i64,
}

impl Renderer {
    /// Add every pulse of `em` that overlaps `[w0, w0 + out.len())`.
    pub(crate) fn add<F>(&self, out: &mut [Complex64], w0: i64, em: &Emitter, mut pulse_at: F)
    where
        F: FnMut(i64) -> FramePulse,
    {
        let l = self.template.len() as i64;
        let len = out.len() as i64;
        for &(d, h) in &em.taps {
            let base = em.offset + d;
            let f_lo = (w0 - l + 1 - base - em.frame_samples).div_euclid(em.frame_samples);
            let f_hi = (w0 + len - base).div_euclid(em.frame_samples);
            for f in f_lo..=f_hi {
                let start = base + f * em.frame_samples;
                if start + em.frame_samples <= w0 - l || start >= w0 + len {
                    continue;
                }
                let p = pulse_at(f);
                let s = start + p.chip as i64 * self.spc + p.pos as i64 * self.ds - w0;
                if s + l <= 0 || s >= len {
                    continue;
                }
                let g = h * em.rot * p.polarity;
                for (k, v) in self.template.iter().enumerate() {
                    let idx = s + k as i64;
                    if (0..len).contains(&idx) {
                        out[idx as usize] += g * v;
                    }
                }
            }
        }
    }
}

pub(crate) fn add_noise<R: Rng + ?Sized>(out: &mut [Complex64], eta: f64, rng: &mut R) {
    if eta <= 0.0 {
        return;
    }
    let s = (eta / 2.0).sqrt();
    for v in out.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(re * s, im * s);
    }
}

/// Small insertion-ordered memo keyed by frame or bit index.
#[derive(Debug, Clone)]
pub(crate) struct Memo<T: Copy> {
    items: Vec<(i64, T)>,
}

impl<T: Copy> Default for Memo<T> {
    fn default() -> Self {
        Memo { items: Vec::new() }
    }
}

impl<T: Copy> Memo<T> {
    pub(crate) fn get_or(&mut self, key: i64, make: impl FnOnce() -> T) -> T {
        if let Some((_, v)) = self.items.iter().find(|(k, _)| *k == key) {
            return *v;
        }
        let v = make();
        self.items.push((key, v));
        v
    }

    pub(crate) fn clear(&mut self) {
        self.items.clear();
    }

    pub(crate) fn insert(&mut self, key: i64, v: T) {
        self.items.retain(|(k, _)| *k != key);
        self.items.push((key, v));
    }
}
