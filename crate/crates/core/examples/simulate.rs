//! Network simulation of the bundled scenario.
//!
//! ```text
//! cargo run --release --example simulate -- [scenario.toml] [seed]
//! ```

use uswb::config::{validate_config, ScenarioConfig};
use uswb::netsim::{generate_topology, run};

fn main() -> uswb::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = match args.first() {
        Some(p) => validate_config(p.as_ref())?,
        None => ScenarioConfig::bundled(),
    };
    if let Some(s) = args.get(1) {
        cfg.seed = s.parse().expect("numeric seed");
    }
    let topo = generate_topology(&cfg.topology, cfg.seed)?;
    let sim = cfg.sim_config();
    let out = run(&topo, &sim, &cfg.ber_table()?, cfg.seed)?;
    let m = &out.metrics;
    println!(
        "{} connections, {} scheme, {:?} mode, {} s",
        topo.connections.len(),
        sim.scheme,
        sim.mode,
        sim.duration
    );
    for c in 0..topo.connections.len() {
        let last = m.trace.iter().rev().find(|p| p.connection == c);
        println!(
            "  conn {c}: {:>9.1} bit/s, delivered {:>6}, dropped {:>3}, final pair {}",
            m.connection_throughput(c),
            m.connections[c].delivered,
            m.connections[c].dropped,
            last.map_or("-".to_string(), |p| format!("({}, {})", p.n_h, p.n_s))
        );
    }
    println!(
        "network {:.1} bit/s, drop rate {:.2e}, {} events",
        m.network_throughput(),
        m.drop_rate(),
        out.log.len()
    );
    Ok(())
}
