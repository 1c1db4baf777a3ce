use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One transmitter–receiver link as seen by the SINR model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub id: usize,
    pub n_h: u32,
    pub n_s: u32,
    /// Average power per pulse period, W.
    pub power: f64,
    /// Power gain from this link's transmitter to the receiver of link `j`,
    /// indexed by position in the link list. Zero means out of range.
    pub gains: Vec<f64>,
}

/// SINR at the receiver of link `i`:
///
/// `N_s,i·P_i·g_ii·N_h,i·Tc / (η + σ²·Tc·Σ_k (N_h,i/N_h,k)·P_k·g_ki)`
///
/// summed over every other link whose gain towards receiver `i` is
/// positive.
pub fn sinr(i: usize, links: &[LinkConfig], eta: f64, sigma2: f64, tc: f64) -> Result<f64> {
    let me = links
        .get(i)
        .ok_or_else(|| Error::invalid(format!("link index {i} out of range")))?;
    for l in links {
        if l.n_h < 1 || l.n_s < 1 {
            return Err(Error::invalid(format!("link {} has N_h or N_s below 1", l.id)));
        }
        if l.gains.len() != links.len() || l.gains.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::invalid(format!(
                "link {} needs {} non-negative gains",
                l.id,
                links.len()
            )));
        }
    }
    let signal = me.n_s as f64 * me.power * me.gains[i] * me.n_h as f64 * tc;
    let interference: f64 = links
        .iter()
        .enumerate()
        .filter(|(k, l)| *k != i && l.gains[i] > 0.0)
        .map(|(_, l)| me.n_h as f64 / l.n_h as f64 * l.power * l.gains[i])
        .sum();
    let denom = eta + sigma2 * tc * interference;
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(signal / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(id: usize, n_h: u32, n_s: u32, gains: Vec<f64>) -> LinkConfig {
        LinkConfig {
            id,
            n_h,
            n_s,
            power: 1.0,
            gains,
        }
    }

    #[test]
    fn noise_only() {
        let l = vec![link(0, 4, 5, vec![0.5])];
        let tc = 0.5e-6;
        let v = sinr(0, &l, 1e-7, 1.0, tc).unwrap();
        assert!((v - 5.0 * 0.5 * 4.0 * tc / 1e-7).abs() < 1e-12);
    }

    #[test]
    fn interference_limited_limit() {
        let tc = 0.5e-6;
        let l = vec![link(0, 6, 7, vec![1.0, 1.0]), link(1, 6, 7, vec![1.0, 1.0])];
        let v = sinr(0, &l, 1e-300, 2.0, tc).unwrap();
        assert!((v - 6.0 * 7.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_denominator() {
        let l = vec![link(0, 1, 1, vec![1.0])];
        assert!(matches!(sinr(0, &l, 0.0, 1.0, 1e-6), Err(Error::ZeroDenominator)));
    }
}
