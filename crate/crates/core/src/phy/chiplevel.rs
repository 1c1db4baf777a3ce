//! Semi-analytic BER: simulate single chips, then extend to any spreading
//! length analytically.
//!
//! Per chip the received window holds the desired pulse, echoes of the
//! desired link's other pulses, and the pulses (and echoes) of `K`
//! asynchronous interferers whose hopping chips, PPM positions and
//! polarities are drawn independently per frame. Treating chips of one bit
//! as independent turns the bit decision into a sum of i.i.d. chip margins:
//!
//! * coherent: the noise-free despread margin of each chip is histogrammed;
//!   the `N_s`-fold convolution gives the margin of a bit, and the Gaussian
//!   correlator noise of variance `N_s·|h|²·η` is integrated exactly;
//! * non-coherent: each chip's signed energy margin is recorded with noise
//!   simulated at sample level (energy detection is non-linear), and the
//!   `N_s`-fold convolution of their histogram gives the bit error directly.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use super::montecarlo::{point_key, LinkModel, Z95};
use super::window::{add_noise, coherent_statistic, energy_pair, Emitter, FramePulse, Memo, Renderer};
use super::Scheme;
use crate::error::{Error, Result};
use crate::rng::{substream, tag};

const CHUNK: u64 = 4096;
const BATCHES: usize = 10;
/// Histogram bins per unit of chip margin.
const BINS_PER_UNIT: f64 = 32.0;

/// Chip-level statistics for one `(scheme, N_h, K)`, valid for every `N_s`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChipLevelEstimate {
    Coherent {
        /// Noise-free despread chip margins (desired pulse alone gives 1).
        margins: Vec<f64>,
        /// Correlator noise variance per chip.
        noise_var: f64,
    },
    NonCoherent {
        /// Signed chip energy margins; positive when the chip decision is
        /// correct.
        margins: Vec<f64>,
    },
}

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Probability that the sum of `n` chip margins plus Gaussian noise of
/// variance `n·noise_var` is negative, for `n = 1..=n_max`. Exact zero sums
/// count half.
fn coherent_curve(margins: &[f64], noise_var: f64, n_max: u32) -> Vec<f64> {
    if margins.is_empty() {
        return vec![f64::NAN; n_max as usize];
    }
    let w = 1.0 / BINS_PER_UNIT;
    // bins centred on 1 + i·w so the interference-free margin is exact
    let idx = |m: f64| ((m - 1.0) / w).round() as i64;
    let lo = margins.iter().map(|&m| idx(m)).min().unwrap();
    let hi = margins.iter().map(|&m| idx(m)).max().unwrap();
    let mut pmf = vec![0.0; (hi - lo + 1) as usize];
    for &m in margins {
        pmf[(idx(m) - lo) as usize] += 1.0;
    }
    let total = margins.len() as f64;
    pmf.iter_mut().for_each(|v| *v /= total);
    let support: Vec<(usize, f64)> = pmf.iter().copied().enumerate().filter(|(_, p)| *p > 0.0).collect();

    let mut curve = Vec::with_capacity(n_max as usize);
    let mut sum = vec![1.0];
    for n in 1..=n_max {
        let mut next = vec![0.0; sum.len() + pmf.len() - 1];
        for (a, &pa) in sum.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for &(b, pb) in &support {
                next[a + b] += pa * pb;
            }
        }
        sum = next;
        // value of bin i of the n-fold sum: n·(1 + lo·w) + i·w
        let base = n as f64 * (1.0 + lo as f64 * w);
        let sigma = (n as f64 * noise_var).sqrt();
        let pe: f64 = sum
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| {
                let s = base + i as f64 * w;
                let e = if sigma > 0.0 {
                    q_function(s / sigma)
                } else if s.abs() < 0.5 * w {
                    0.5
                } else if s > 0.0 {
                    0.0
                } else {
                    1.0
                };
                p * e
            })
            .sum();
        curve.push(pe.clamp(0.0, 1.0));
    }
    curve
}

impl ChipLevelEstimate {
    pub fn chips(&self) -> u64 {
        match self {
            ChipLevelEstimate::Coherent { margins, .. } => margins.len() as u64,
            ChipLevelEstimate::NonCoherent { margins } => margins.len() as u64,
        }
    }

    /// Bit error rate with `n_s` chips per bit.
    pub fn ber(&self, n_s: u32) -> f64 {
        self.ber_curve(n_s)[n_s as usize - 1]
    }

    /// Bit error rates for `N_s = 1..=n_max`.
    pub fn ber_curve(&self, n_max: u32) -> Vec<f64> {
        match self {
            ChipLevelEstimate::Coherent { margins, noise_var } => coherent_curve(margins, *noise_var, n_max),
            ChipLevelEstimate::NonCoherent { margins } => coherent_curve(margins, 0.0, n_max),
        }
    }

    /// Half-widths of approximate 95% intervals on [`Self::ber_curve`], from
    /// batch means over disjoint slices of the chip sample.
    pub fn half_width_curve(&self, n_max: u32) -> Vec<f64> {
        let margins = match self {
            ChipLevelEstimate::Coherent { margins, .. } | ChipLevelEstimate::NonCoherent { margins } => margins,
        };
        let size = margins.len() / BATCHES;
        if size < 2 {
            return vec![0.5; n_max as usize];
        }
        let curves: Vec<Vec<f64>> = (0..BATCHES)
            .into_par_iter()
            .map(|b| {
                let slice = margins[b * size..(b + 1) * size].to_vec();
                match self {
                    ChipLevelEstimate::Coherent { noise_var, .. } => coherent_curve(&slice, *noise_var, n_max),
                    ChipLevelEstimate::NonCoherent { .. } => coherent_curve(&slice, 0.0, n_max),
                }
            })
            .collect();
        (0..n_max as usize)
            .map(|i| {
                let mean = curves.iter().map(|c| c[i]).sum::<f64>() / BATCHES as f64;
                let var = curves.iter().map(|c| (c[i] - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
                Z95 * (var / BATCHES as f64).sqrt()
            })
            .collect()
    }
}

fn random_pulse<R: Rng + ?Sized>(scheme: Scheme, n_h: u32, rng: &mut R) -> FramePulse {
    let chip = rng.gen_range(0..n_h);
    match scheme {
        Scheme::PpmBpsk => FramePulse {
            chip,
            pos: rng.gen_range(0..2),
            polarity: if rng.gen() { 1.0 } else { -1.0 },
        },
        Scheme::PpmPpm => FramePulse {
            chip,
            pos: rng.gen_range(0..2),
            polarity: 1.0,
        },
    }
}

/// Simulate `chips` chip windows of the desired link among `k` interferers.
pub fn chip_level_ber(
    model: &LinkModel,
    scheme: Scheme,
    n_h: u32,
    k: u32,
    chips: u64,
    seed: u64,
) -> Result<ChipLevelEstimate> {
    model.validate()?;
    if n_h < 1 {
        return Err(Error::invalid("N_h must be at least 1"));
    }
    if chips < 100 {
        return Err(Error::invalid("chip-level estimation needs at least 100 chips"));
    }
    let rend: Renderer = model.renderer();
    let (d_strong, h_strong) = model.strongest();
    let ds = model.phy.delta_samples();
    let len = model.window_len(scheme);
    let fs = n_h as i64 * model.phy.samples_per_chip as i64;
    let key = point_key(scheme, n_h, 0, k);
    let n_chunks = chips.div_ceil(CHUNK);
    let own_taps = model.tap_samples();

    let per_chunk: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed ^ key, tag::CHIP_TRIAL, c);
            let count = CHUNK.min(chips - c * CHUNK);
            let mut margins = Vec::with_capacity(count as usize);
            let mut w = vec![Complex64::new(0.0, 0.0); len];
            let mut emitters: Vec<Emitter> = (0..=k)
                .map(|_| Emitter {
                    offset: 0,
                    frame_samples: fs,
                    taps: own_taps.clone(),
                    rot: Complex64::new(1.0, 0.0),
                })
                .collect();
            let mut memo: Memo<FramePulse> = Memo::default();
            for _ in 0..count {
                let own = random_pulse(scheme, n_h, &mut rng);
                for em in emitters.iter_mut().skip(1) {
                    em.rot = model.interferer_rotation(&mut rng);
                    em.offset = rng.gen_range(0..fs);
                }
                let w0 = own.chip as i64 * rend.spc + d_strong;
                w.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for (e, em) in emitters.iter().enumerate() {
                    memo.clear();
                    if e == 0 {
                        memo.insert(0, own);
                    }
                    rend.add(&mut w, w0, em, |f| memo.get_or(f, || random_pulse(scheme, n_h, &mut rng)));
                }
                match scheme {
                    Scheme::PpmBpsk => {
                        let stat = coherent_statistic(&w, &rend.template, ds, h_strong);
                        let sign = if own.pos == 1 { 1.0 } else { -1.0 };
                        margins.push(sign * own.polarity * stat);
                    }
                    Scheme::PpmPpm => {
                        add_noise(&mut w, model.eta, &mut rng);
                        let (e0, e1) = energy_pair(&w, ds);
                        margins.push(if own.pos == 1 { e1 - e0 } else { e0 - e1 });
                    }
                }
            }
            margins
        })
        .collect();
    let margins: Vec<f64> = per_chunk.into_iter().flatten().collect();

    Ok(match scheme {
        Scheme::PpmBpsk => ChipLevelEstimate::Coherent {
            margins,
            noise_var: h_strong.norm_sqr() * model.eta,
        },
        Scheme::PpmPpm => ChipLevelEstimate::NonCoherent { margins },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `P(X > n/2) + ½·P(X = n/2)` for `X ~ Binomial(n, p)`.
    fn majority_error(n: u32, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let mut total = 0.0;
        let mut coeff = 1.0f64;
        for x in 0..=n {
            if x > 0 {
                coeff *= (n - x + 1) as f64 / x as f64;
            }
            let term = coeff * p.powi(x as i32) * (1.0 - p).powi((n - x) as i32);
            if 2 * x > n {
                total += term;
            } else if 2 * x == n {
                total += 0.5 * term;
            }
        }
        total.min(1.0)
    }

    #[test]
    fn majority_tail_by_hand() {
        // n = 3: 3p²(1-p) + p³
        let p: f64 = 0.1;
        assert!((majority_error(3, p) - (3.0 * p * p * (1.0 - p) + p.powi(3))).abs() < 1e-15);
        // n = 2: p² + ½·2p(1-p) = p
        assert!((majority_error(2, 0.3) - 0.3).abs() < 1e-15);
        assert_eq!(majority_error(1, 0.25), 0.25);
    }

    #[test]
    fn single_atom_margin_is_gaussian_tail() {
        // all chips at margin 1: BER = Q(n_s / sqrt(n_s·v)) = Q(sqrt(n_s/v))
        let est = ChipLevelEstimate::Coherent {
            margins: vec![1.0; 1000],
            noise_var: 0.5,
        };
        for n_s in [1u32, 4, 9] {
            let expect = q_function((n_s as f64 / 0.5).sqrt());
            assert!((est.ber(n_s) - expect).abs() < 1e-15 * expect.max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn unit_margins_reduce_to_majority_vote() {
        let mut m = vec![1.0; 900];
        m.extend(vec![-1.0; 100]);
        let c = ChipLevelEstimate::NonCoherent { margins: m }.ber_curve(6);
        for n in 1..=6u32 {
            assert!((c[n as usize - 1] - majority_error(n, 0.1)).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn noncoherent_sums_energy_margins() {
        // right chips carry margin 2, wrong chips margin -1: two chips err
        // only when both are wrong, three chips when at least two are
        let mut m = vec![2.0; 800];
        m.extend(vec![-1.0; 200]);
        let est = ChipLevelEstimate::NonCoherent { margins: m };
        let c = est.ber_curve(3);
        assert!((c[0] - 0.2).abs() < 1e-12);
        assert!((c[1] - 0.04).abs() < 1e-12);
        // 2-1 split sums to 0 and counts half
        assert!((c[2] - (0.008 + 0.5 * 3.0 * 0.8 * 0.04)).abs() < 1e-12);
    }

    #[test]
    fn two_point_margin_distribution() {
        // margins 1 and -1 with equal mass, no noise, n_s = 2: sum is 2, 0, -2
        let est = ChipLevelEstimate::Coherent {
            margins: vec![1.0, -1.0],
            noise_var: 0.0,
        };
        assert!((est.ber(2) - (0.25 + 0.5 * 0.5)).abs() < 1e-12);
        assert_eq!(est.ber_curve(2)[0], 0.5);
    }
}
