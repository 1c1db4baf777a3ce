#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};
use uswb::phy::{BerEntry, BerKey, BerTable, Scheme};

/// Closed-form table `Q(√(N_h·N_s/(e + s2·K)))`, with the non-coherent
/// scheme paying `nc_penalty` in SINR.
pub fn synthetic_table(k_max: u32, e: f64, s2: f64, nc_penalty: f64) -> BerTable {
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut t = BerTable::new();
    for scheme in Scheme::ALL {
        for k in 0..=k_max {
            for h in 1..=15 {
                for s in 1..=20 {
                    let mut sinr = (h * s) as f64 / (e + s2 * k as f64);
                    if scheme == Scheme::PpmPpm {
                        sinr /= nc_penalty;
                    }
                    let ber = (1.0 - n.cdf(sinr.sqrt())).max(1e-300);
                    t.insert(BerKey::new(scheme, k, h, s), BerEntry { ber, trials: 1, ci_half_width: 0.0 })
                        .unwrap();
                }
            }
        }
    }
    t
}
