use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Information rate `1 / (N_s·N_h·Tc)` in bit/s.
pub fn rate(n_h: u32, n_s: u32, tc: f64) -> f64 {
    1.0 / (n_s as f64 * n_h as f64 * tc)
}

/// Frame length `N_h` (chips per frame) and spreading length `N_s`
/// (chips per bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FramePair {
    pub n_h: u32,
    pub n_s: u32,
}

impl FramePair {
    pub const fn new(n_h: u32, n_s: u32) -> Self {
        FramePair { n_h, n_s }
    }

    pub fn rate(&self, tc: f64) -> f64 {
        rate(self.n_h, self.n_s, tc)
    }

    /// Chips per bit, `N_h·N_s`.
    pub fn chips_per_bit(&self) -> u64 {
        self.n_h as u64 * self.n_s as u64
    }
}

impl std::fmt::Display for FramePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.n_h, self.n_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConstraints {
    /// Minimum information rate, bit/s.
    pub r_min: f64,
    pub sinr_min: f64,
    pub ber_max: f64,
    pub n_h_max: u32,
    pub n_s_max: u32,
    /// Chip duration, s.
    pub tc: f64,
}

impl Default for AdaptConstraints {
    fn default() -> Self {
        AdaptConstraints {
            r_min: 1000.0,
            sinr_min: super::sinr_threshold_for_ber(1e-6),
            ber_max: 1e-6,
            n_h_max: 15,
            n_s_max: 20,
            tc: 0.5e-6,
        }
    }
}

impl AdaptConstraints {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return Err(Error::invalid("r_min must be finite and non-negative"));
        }
        if !(self.sinr_min > 0.0) {
            return Err(Error::invalid("sinr_min must be positive"));
        }
        if !(self.ber_max > 0.0 && self.ber_max < 1.0) {
            return Err(Error::invalid("ber_max must lie in (0, 1)"));
        }
        if self.n_h_max < 1 || self.n_s_max < 1 {
            return Err(Error::invalid("N_h,max and N_s,max must be at least 1"));
        }
        if !(self.tc > 0.0) {
            return Err(Error::invalid("tc must be positive"));
        }
        Ok(())
    }

    /// Conservative pair used before any adaptation.
    pub fn max_pair(&self) -> FramePair {
        FramePair::new(self.n_h_max, self.n_s_max)
    }

    pub fn meets_rate(&self, pair: FramePair) -> bool {
        pair.rate(self.tc) >= self.r_min * (1.0 - 1e-12)
    }

    /// Every pair of the grid, `N_h` outer.
    pub fn grid(&self) -> impl Iterator<Item = FramePair> {
        let n_s_max = self.n_s_max;
        (1..=self.n_h_max).flat_map(move |h| (1..=n_s_max).map(move |s| FramePair::new(h, s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_values() {
        assert_eq!(rate(1, 1, 0.5e-6), 2.0e6);
        assert!((rate(15, 20, 0.5e-6) - 6666.666_666_7).abs() < 1e-6);
        assert_eq!(rate(2, 3, 0.5e-6), rate(3, 2, 0.5e-6));
    }
}
