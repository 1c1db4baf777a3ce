//! Explicitly cooperative adaptation across three clusters.
//!
//! ```text
//! cargo run --release --example three_clusters -- [seed]
//! ```
//!
//! One connection in the middle cluster, edge clusters filled one
//! connection at a time every 5 s. The middle receivers hear both edges and
//! end up with the lowest throughput.

use uswb::reproduce::{three_cluster_run, ReproduceOptions};

fn main() -> uswb::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("numeric seed"));
    let opts = ReproduceOptions::new("out", seed);
    let (_, steps) = three_cluster_run(&opts, 5.0, 1.5)?;
    println!("step cluster active  mean K  bit/s per connection");
    for s in steps {
        println!(
            "{:>4} {:>7} {:>6} {:>7.2} {:>12.1}",
            s.step, s.cluster, s.active_connections, s.mean_interferers, s.throughput_per_connection_bps
        );
    }
    Ok(())
}
