use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::FramePair;
use crate::error::{Error, Result};
use crate::phy::{sinr, BerTable, LinkConfig, Scheme};

/// Decides whether a candidate pair meets the link-quality constraint.
pub trait FeasibilityOracle {
    fn feasible(&self, pair: FramePair) -> bool;
}

impl<F: Fn(FramePair) -> bool> FeasibilityOracle for F {
    fn feasible(&self, pair: FramePair) -> bool {
        self(pair)
    }
}

/// Inverse of the Gaussian tail function `Q`.
pub fn q_inverse(p: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    -n.inverse_cdf(p)
}

/// SINR at which `Q(√SINR)` equals `ber`.
pub fn sinr_threshold_for_ber(ber: f64) -> f64 {
    q_inverse(ber).powi(2)
}

/// Feasible iff the tabulated BER at the oracle's interferer count is at
/// most `ber_max`, with all interferers assumed to use the candidate pair.
#[derive(Debug, Clone, Copy)]
pub struct TableOracle<'a> {
    pub table: &'a BerTable,
    pub scheme: Scheme,
    pub k: u32,
    pub ber_max: f64,
}

impl<'a> TableOracle<'a> {
    /// Fails with a table-gap error unless every pair up to the maxima is
    /// tabulated for `k`.
    pub fn new(table: &'a BerTable, scheme: Scheme, k: u32, ber_max: f64, n_h_max: u32, n_s_max: u32) -> Result<Self> {
        for h in 1..=n_h_max {
            for s in 1..=n_s_max {
                table.get(scheme, k, h, s)?;
            }
        }
        Ok(TableOracle {
            table,
            scheme,
            k,
            ber_max,
        })
    }
}

impl FeasibilityOracle for TableOracle<'_> {
    fn feasible(&self, pair: FramePair) -> bool {
        self.table
            .ber(self.scheme, self.k, pair.n_h, pair.n_s)
            .map(|b| b <= self.ber_max)
            .unwrap_or(false)
    }
}

/// Closed-form SINR test with `k` interferers all at the candidate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrOracle {
    /// Received power of the desired link per pulse period, `P·g` (W).
    pub signal_power: f64,
    /// Received power of each interferer, `P_k·g_k` (W).
    pub interferer_power: f64,
    pub k: u32,
    pub eta: f64,
    pub sigma2: f64,
    pub tc: f64,
    pub sinr_min: f64,
}

impl SinrOracle {
    pub fn sinr(&self, pair: FramePair) -> Result<f64> {
        let n = self.k as usize + 1;
        let links: Vec<LinkConfig> = (0..n)
            .map(|i| LinkConfig {
                id: i,
                n_h: pair.n_h,
                n_s: pair.n_s,
                power: if i == 0 { self.signal_power } else { self.interferer_power },
                gains: (0..n).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
            })
            .collect();
        sinr(0, &links, self.eta, self.sigma2, self.tc)
    }
}

impl FeasibilityOracle for SinrOracle {
    fn feasible(&self, pair: FramePair) -> bool {
        self.sinr(pair).map(|v| v >= self.sinr_min).unwrap_or(false)
    }
}

/// Receiver-side terms of the own SINR constraint
/// `η/(N_s·N_h) + Σβ/N_s ≤ α/SINR_min`, with `α = P_r·g_rr·Tc` and
/// `β_k = σ²·Tc·P_k·g_kr/N_h,k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OwnSinr {
    pub alpha: f64,
    pub beta_sum: f64,
    pub eta: f64,
}

impl OwnSinr {
    pub fn sinr(&self, pair: FramePair) -> f64 {
        let (h, s) = (pair.n_h as f64, pair.n_s as f64);
        self.alpha * h * s / (self.eta + h * self.beta_sum)
    }

    pub fn feasible(&self, pair: FramePair, sinr_min: f64) -> bool {
        let (h, s) = (pair.n_h as f64, pair.n_s as f64);
        self.eta / (s * h) + self.beta_sum / s <= self.alpha / sinr_min * (1.0 + 1e-12)
    }
}

/// Tolerable-interference terms published by the receiver of link `link`:
/// its SINR is `γ / (η + δ + ε/N_h,r)` where `N_h,r` is the frame length of
/// the transmitter being constrained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceReport {
    pub link: usize,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl InterferenceReport {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::MalformedReport {
            link: self.link,
            reason: reason.to_string(),
        };
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(bad("gamma must be positive and finite"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(bad("delta must be non-negative and finite"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(bad("epsilon must be non-negative and finite"));
        }
        Ok(())
    }

    /// Smallest admissible `N_h,r` (real-valued), or `None` when the
    /// reporting receiver tolerates no further interference.
    pub fn n_h_lower_bound(&self, eta: f64, sinr_min: f64) -> Option<f64> {
        let denom = self.gamma / sinr_min - eta - self.delta;
        if denom <= 0.0 {
            None
        } else {
            Some(self.epsilon / denom)
        }
    }
}

/// Own SINR constraint plus the per-interferer frame-length bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitOracle {
    pub own: OwnSinr,
    pub sinr_min: f64,
    /// Largest lower bound on `N_h` over all reports.
    pub n_h_bound: f64,
}

impl ExplicitOracle {
    /// Errors with `Infeasible` if some report leaves no room at all.
    pub fn new(own: OwnSinr, reports: &[InterferenceReport], sinr_min: f64) -> Result<Self> {
        let mut n_h_bound = 1.0f64;
        for r in reports {
            r.validate()?;
            match r.n_h_lower_bound(own.eta, sinr_min) {
                Some(b) => n_h_bound = n_h_bound.max(b),
                None => return Err(Error::Infeasible),
            }
        }
        Ok(ExplicitOracle {
            own,
            sinr_min,
            n_h_bound,
        })
    }
}

impl FeasibilityOracle for ExplicitOracle {
    fn feasible(&self, pair: FramePair) -> bool {
        pair.n_h as f64 >= self.n_h_bound * (1.0 - 1e-12) && self.own.feasible(pair, self.sinr_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_inverse_known_points() {
        assert!(q_inverse(0.5).abs() < 1e-12);
        assert!((q_inverse(1e-6) - 4.753_424_308_8).abs() < 1e-6);
        assert!((sinr_threshold_for_ber(1e-6) - 22.595_042).abs() < 1e-4);
    }

    #[test]
    fn sinr_oracle_matches_closed_form() {
        let o = SinrOracle {
            signal_power: 2.0,
            interferer_power: 0.5,
            k: 3,
            eta: 1e-7,
            sigma2: 1.5,
            tc: 0.5e-6,
            sinr_min: 10.0,
        };
        let p = FramePair::new(4, 6);
        let expect = 6.0 * 2.0 * 4.0 * 0.5e-6 / (1e-7 + 1.5 * 0.5e-6 * 3.0 * 0.5);
        assert!((o.sinr(p).unwrap() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn frame_length_lower_bound() {
        let r = InterferenceReport { link: 0, gamma: 10.0, delta: 1.0, epsilon: 6.0 };
        // 6 / (10/2 - 1 - 1) = 2
        assert_eq!(r.n_h_lower_bound(1.0, 2.0), Some(2.0));
        let tight = InterferenceReport { delta: 4.0, ..r };
        assert_eq!(tight.n_h_lower_bound(1.0, 2.0), None);
    }

    #[test]
    fn malformed_report() {
        let r = InterferenceReport { link: 3, gamma: 0.0, delta: 0.0, epsilon: 1.0 };
        assert!(matches!(
            ExplicitOracle::new(OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 1.0 }, &[r], 1.0),
            Err(Error::MalformedReport { link: 3, .. })
        ));
    }
}
