//! Attenuation budget and tap-delay channel statistics.
//!
//! ```text
//! cargo run --release --example channel_budget
//! ```
//!
//! Prints the largest carrier frequency that keeps attenuation within
//! 100 dB for each tissue at several distances, then fits a six-tap
//! exponential profile to the arm channel's delay moments.

use uswb::channel::{
    calibrate_exponential_profile, delay_stats, max_frequency_for_budget, path_gain, ARM_TAU_M, ARM_TAU_RMS,
};
use uswb::tissue::{Tissue, TissueTable};

fn main() -> uswb::Result<()> {
    let tissues = TissueTable::bundled();
    let distances = [1e-3, 1e-2, 5e-2, 1e-1];
    print!("{:<8}", "tissue");
    for d in distances {
        print!("{:>14}", format!("{} cm", d * 100.0));
    }
    println!();
    for t in Tissue::ALL {
        print!("{:<8}", t.name());
        for d in distances {
            print!("{:>14.1}", max_frequency_for_budget(d, tissues.get(t), 100.0));
        }
        println!("  MHz");
    }

    let muscle = tissues.get(Tissue::Muscle);
    println!("\nmuscle power gain at 5 MHz, 20 cm: {:.3e}", path_gain(0.20, 5.0, muscle));

    let profile = calibrate_exponential_profile(6, ARM_TAU_M, ARM_TAU_RMS)?;
    let cir = profile.synthesize(1);
    let s = delay_stats(&cir);
    println!(
        "\n6-tap profile: spacing {:.2} us, decay {:.2} us",
        profile.tap_spacing * 1e6,
        profile.decay_constant * 1e6
    );
    println!(
        "tau_m = {:.3} us, tau_rms = {:.3} us, coherence bandwidth = {:.2} kHz",
        s.tau_m * 1e6,
        s.tau_rms * 1e6,
        s.coherence_bandwidth / 1e3
    );
    Ok(())
}
