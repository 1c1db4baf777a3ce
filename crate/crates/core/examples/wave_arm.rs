//! Pressure wave through the layered arm section.
//!
//! ```text
//! cargo run --release --example wave_arm -- [dx_m]
//! ```
//!
//! Runs the finite-difference solver on the bone/muscle/fat/skin cross
//! section (0.5 mm grid by default), then reports the arrival clusters seen
//! at the sink and the delay statistics of the extracted impulse response.

use uswb::channel::delay_stats;
use uswb::wavefield::{arrival_clusters, ArmExperiment};

fn main() -> uswb::Result<()> {
    let dx = std::env::args().nth(1).map(|s| s.parse().expect("dx in metres")).unwrap_or(0.0005);
    let exp = ArmExperiment { dx, ..ArmExperiment::default() };
    let start = std::time::Instant::now();
    let run = exp.run()?;
    let g = &run.geometry;
    println!(
        "{}x{} cells, dt = {:.3e} s, {} steps in {:.1?}",
        g.nx,
        g.ny,
        run.record.dt,
        run.record.sink.len(),
        start.elapsed()
    );
    println!(
        "source ({:.1}, {:.1}) mm, sink ({:.1}, {:.1}) mm",
        run.source.x * 1e3,
        run.source.y * 1e3,
        run.sink.x * 1e3,
        run.sink.y * 1e3
    );
    for (i, (t, peak)) in arrival_clusters(&run.record.sink, run.record.dt, 0.2, 2e-6).iter().enumerate() {
        println!("arrival {i}: t = {:.2} us, peak {:.3e}", t * 1e6, peak);
    }
    let s = delay_stats(&run.impulse_response()?);
    println!(
        "tau_m = {:.2} us, tau_rms = {:.2} us, coherence bandwidth = {:.1} kHz",
        s.tau_m * 1e6,
        s.tau_rms * 1e6,
        s.coherence_bandwidth / 1e3
    );
    Ok(())
}
