use rand::Rng;

use super::Scheme;
use crate::rng::{substream, tag};

/// Node id reserved for the shared control channel's sequence and code.
pub const COMMON_CHANNEL_ID: u64 = u64::MAX;

/// Time-hopping sequence and spreading code of one node.
///
/// Chip `j` of every bit is sent in chip `th[j]` of its frame; the code is
/// ±1 for [`Scheme::PpmBpsk`] and 0/1 for [`Scheme::PpmPpm`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoppingPlan {
    pub node_id: u64,
    pub scheme: Scheme,
    pub n_h: u32,
    pub n_s: u32,
    pub th: Vec<u32>,
    pub code: Vec<i8>,
}

impl HoppingPlan {
    /// Plan with explicit sequences, e.g. for hand-built examples.
    pub fn from_sequences(node_id: u64, scheme: Scheme, n_h: u32, th: Vec<u32>, code: Vec<i8>) -> Self {
        assert_eq!(th.len(), code.len());
        assert!(th.iter().all(|&c| c < n_h));
        HoppingPlan {
            node_id,
            scheme,
            n_h,
            n_s: th.len() as u32,
            th,
            code,
        }
    }

    /// Transmitted polarity of chip `j` for data bit `bit`.
    pub fn polarity(&self, j: usize) -> f64 {
        match self.scheme {
            Scheme::PpmBpsk => self.code[j] as f64,
            Scheme::PpmPpm => 1.0,
        }
    }

    /// PPM position (0 or 1) of chip `j` for data bit `bit`.
    pub fn position(&self, j: usize, bit: u8) -> u8 {
        match self.scheme {
            Scheme::PpmBpsk => bit,
            Scheme::PpmPpm => (self.code[j] as u8) ^ bit,
        }
    }
}

/// Hopping plan drawn from a ChaCha8 stream keyed by `node_id`.
pub fn derive_hopping_plan(node_id: u64, n_h: u32, n_s: u32, scheme: Scheme) -> HoppingPlan {
    assert!(n_h >= 1 && n_s >= 1);
    let mut rng = substream(node_id, tag::HOPPING, 0);
    let th = (0..n_s).map(|_| rng.gen_range(0..n_h)).collect();
    let code = (0..n_s)
        .map(|_| {
            let b: bool = rng.gen();
            match (scheme, b) {
                (Scheme::PpmBpsk, true) => 1,
                (Scheme::PpmBpsk, false) => -1,
                (Scheme::PpmPpm, b) => b as i8,
            }
        })
        .collect();
    HoppingPlan {
        node_id,
        scheme,
        n_h,
        n_s,
        th,
        code,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(
            derive_hopping_plan(5, 15, 20, Scheme::PpmBpsk),
            derive_hopping_plan(5, 15, 20, Scheme::PpmBpsk)
        );
    }

    #[test]
    fn single_chip_frames() {
        let p = derive_hopping_plan(77, 1, 9, Scheme::PpmPpm);
        assert!(p.th.iter().all(|&c| c == 0));
    }

    #[test]
    fn distinct_nodes_differ() {
        let a = derive_hopping_plan(1, 15, 20, Scheme::PpmBpsk);
        let b = derive_hopping_plan(2, 15, 20, Scheme::PpmBpsk);
        assert!(a.th.iter().zip(&b.th).any(|(x, y)| x != y));
    }

    #[test]
    fn code_alphabets() {
        let a = derive_hopping_plan(3, 15, 64, Scheme::PpmBpsk);
        assert!(a.code.iter().all(|&c| c == 1 || c == -1));
        let b = derive_hopping_plan(3, 15, 64, Scheme::PpmPpm);
        assert!(b.code.iter().all(|&c| c == 0 || c == 1));
        assert!(a.th.iter().all(|&c| c < 15));
    }
}
