//! Send random bits through the synthetic arm channel with both receivers.
//!
//! ```text
//! cargo run --release --example phy_loopback -- [n_h] [n_s] [eta]
//! ```

use num_complex::Complex64;
use rand::Rng;
use uswb::phy::*;
use uswb::rng::{substream, tag};

fn main() -> uswb::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_h: u32 = args.first().map_or(4, |s| s.parse().unwrap());
    let n_s: u32 = args.get(1).map_or(3, |s| s.parse().unwrap());
    let eta: f64 = args.get(2).map_or(1.0, |s| s.parse().unwrap());

    let model = LinkModel::arm_default();
    let p = &model.phy;
    let know = ChannelKnowledge::from_cir(&model.channel, p);
    let mut rng = substream(3, tag::BER_TRIAL, 0);
    let bits: Vec<u8> = (0..2000).map(|_| rng.gen_range(0..2)).collect();

    for scheme in Scheme::ALL {
        let plan = derive_hopping_plan(17, n_h, n_s, scheme);
        let x = modulate(&bits, &plan, p, scheme)?;
        let y: Vec<Complex64> = apply_channel(&x, &model.channel, eta, p, &mut substream(3, tag::NOISE, 0));
        let out = match scheme {
            Scheme::PpmBpsk => demodulate_coherent(&y, &plan, p, &know, bits.len())?,
            Scheme::PpmPpm => demodulate_noncoherent(&y, &plan, p, &know, bits.len())?,
        };
        let errors = out.iter().zip(&bits).filter(|(a, b)| a != b).count();
        println!(
            "{scheme}: ({n_h}, {n_s}) at eta = {eta}: {errors} errors in {} bits, BER {:.2e}",
            bits.len(),
            errors as f64 / bits.len() as f64
        );
    }
    Ok(())
}
