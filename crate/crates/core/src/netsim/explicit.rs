use serde::{Deserialize, Serialize};

use crate::adapt::{q_inverse, AdaptConstraints, InterferenceReport, OwnSinr};
use crate::error::{Error, Result};
use crate::phy::{BerTable, Scheme};

/// Closed-form SINR parameters with unit transmit power: a link with pair
/// `(N_h, N_s)` and interferers `k` sees
/// `N_s·N_h·Tc / (η + σ²·Tc·Σ g_k·N_h/N_h,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinrModel {
    pub eta: f64,
    pub sigma2: f64,
}

/// Least-squares fit of `N_s·N_h/Q⁻¹(BER)² = η/Tc + σ²·K` over table points
/// whose BER lies in `[ber_lo, ber_hi]`.
pub fn calibrate_sinr_model(table: &BerTable, scheme: Scheme, tc: f64, ber_lo: f64, ber_hi: f64) -> Result<SinrModel> {
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|(k, e)| k.scheme == scheme && e.ber >= ber_lo && e.ber <= ber_hi)
        .map(|(k, e)| (k.k as f64, (k.n_h * k.n_s) as f64 / q_inverse(e.ber).powi(2)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid("too few table points to calibrate the SINR model"));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("calibration points span a single interferer count"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !(slope > 0.0 && intercept > 0.0) {
        return Err(Error::invalid(format!(
            "SINR calibration gave non-physical intercept {intercept} / slope {slope}"
        )));
    }
    Ok(SinrModel {
        eta: intercept * tc,
        sigma2: slope,
    })
}

/// What a receiver broadcasts after adapting: its link's pair and the
/// interferers it hears with their frame lengths and gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub link: usize,
    pub n_h: u32,
    pub n_s: u32,
    pub interferers: Vec<(usize, u32, f64)>,
}

impl SinrModel {
    /// Own-constraint terms for a receiver hearing `interferers`
    /// (`(N_h,k, gain)` pairs).
    pub fn own(&self, tc: f64, interferers: &[(u32, f64)]) -> OwnSinr {
        OwnSinr {
            alpha: tc,
            beta_sum: interferers
                .iter()
                .map(|&(n_h, g)| self.sigma2 * tc * g / n_h as f64)
                .sum(),
            eta: self.eta,
        }
    }

    /// Tolerable-interference terms of `report` with respect to the
    /// transmitter of link `r`, whose gain towards the reporting receiver is
    /// `gain`. `None` if that transmitter does not reach the receiver.
    pub fn report_terms(&self, tc: f64, report: &LinkReport, r: usize, gain: f64) -> Option<InterferenceReport> {
        if gain <= 0.0 {
            return None;
        }
        let n_h = report.n_h as f64;
        let delta = report
            .interferers
            .iter()
            .filter(|(k, _, _)| *k != r)
            .map(|&(_, n_h_k, g)| self.sigma2 * tc * g * n_h / n_h_k as f64)
            .sum();
        Some(InterferenceReport {
            link: report.link,
            gamma: tc * n_h * report.n_s as f64,
            delta,
            epsilon: self.sigma2 * tc * gain * n_h,
        })
    }

    pub fn sinr(&self, tc: f64, n_h: u32, n_s: u32, interferers: &[(u32, f64)]) -> f64 {
        self.own(tc, interferers).sinr(crate::adapt::FramePair::new(n_h, n_s))
    }

    /// SINR threshold matching `constraints.ber_max` under this model.
    pub fn threshold(constraints: &AdaptConstraints) -> f64 {
        q_inverse(constraints.ber_max).powi(2)
    }
}
