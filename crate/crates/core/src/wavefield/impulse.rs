use num_complex::Complex64;

use crate::channel::{delay_stats, ChannelImpulseResponse, DelayStats, Tap};
use crate::error::{Error, Result};

/// Fraction of the series energy kept when converting to taps.
pub const ENERGY_FRACTION: f64 = 0.999;

/// Convert a sampled sink series into a sparse tap-delay response.
///
/// Samples are normalised to unit peak. The strongest samples are kept
/// until they hold [`ENERGY_FRACTION`] of the energy; leading silence is
/// dropped. Tap delays stay referenced to the start of the series.
pub fn extract_impulse_response(series: &[f64], dt: f64) -> Result<ChannelImpulseResponse> {
    let peak = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if series.is_empty() || peak == 0.0 {
        return Err(Error::EmptyResponse);
    }
    let total: f64 = series.iter().map(|v| (v / peak).powi(2)).sum();
    let mut order: Vec<usize> = (0..series.len()).filter(|&n| series[n] != 0.0).collect();
    order.sort_by(|&a, &b| series[b].abs().total_cmp(&series[a].abs()).then(a.cmp(&b)));

    let mut kept = Vec::new();
    let mut acc = 0.0;
    for n in order {
        if acc >= ENERGY_FRACTION * total {
            break;
        }
        acc += (series[n] / peak).powi(2);
        kept.push(n);
    }
    kept.sort_unstable();
    let taps = kept
        .into_iter()
        .map(|n| Tap {
            delay: n as f64 * dt,
            amplitude: Complex64::new(series[n] / peak, 0.0),
        })
        .collect();
    ChannelImpulseResponse::new(taps, 0.0)
}

/// Delay statistics of the raw series, every non-zero sample treated as a tap.
pub fn series_delay_stats(series: &[f64], dt: f64) -> Result<DelayStats> {
    let taps: Vec<Tap> = series
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(n, v)| Tap {
            delay: n as f64 * dt,
            amplitude: Complex64::new(*v, 0.0),
        })
        .collect();
    Ok(delay_stats(&ChannelImpulseResponse::new(taps, 0.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_impulse() {
        let mut s = vec![0.0; 20];
        s[7] = -3.0;
        let cir = extract_impulse_response(&s, 1e-7).unwrap();
        assert_eq!(cir.taps().len(), 1);
        assert!((cir.taps()[0].delay - 7e-7).abs() < 1e-20);
        assert_eq!(cir.taps()[0].amplitude.norm(), 1.0);
    }

    #[test]
    fn two_impulses_keep_relative_amplitude() {
        let mut s = vec![0.0; 20];
        s[3] = 2.0;
        s[9] = 1.0;
        let cir = extract_impulse_response(&s, 1.0).unwrap();
        assert_eq!(cir.taps().len(), 2);
        let r = cir.taps()[1].amplitude.re / cir.taps()[0].amplitude.re;
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn silent_series_is_an_error() {
        assert!(matches!(extract_impulse_response(&[0.0; 5], 1.0), Err(Error::EmptyResponse)));
        assert!(matches!(extract_impulse_response(&[], 1.0), Err(Error::EmptyResponse)));
    }
}
