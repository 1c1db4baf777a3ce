mod common;

use uswb::adapt::FramePair;
use uswb::netsim::*;
use uswb::phy::{BerTable, Scheme};

fn one_link() -> Topology {
    let nodes = vec![Node { pos: [0.0, 0.0], cluster: 0 }, Node { pos: [0.05, 0.0], cluster: 0 }];
    Topology::new(nodes, vec![Connection { tx: 0, rx: 1, cluster: 0, rank: 0 }], 0.3).unwrap()
}

fn cfg(mode: Mode, duration: f64) -> SimConfig {
    SimConfig {
        mode,
        duration,
        activation: Activation::Times { times: vec![0.0] },
        ..SimConfig::default()
    }
}

#[test]
fn single_link_reaches_full_rate() {
    let table = common::synthetic_table(8, 0.02, 1.0, 4.0);
    let c = cfg(Mode::Implicit, 5.0);
    let out = run(&one_link(), &c, &table, 1).unwrap();
    let last = out.metrics.trace.last().unwrap();
    assert_eq!((last.n_h, last.n_s), (1, 1));
    // stop-and-wait cycle at (1, 1): data, ACK, two propagation legs
    let tc = c.constraints.tc;
    let d = 0.05 / c.mac.sound_speed;
    let cycle = 1024.0 * tc + 64.0 * tc + 2.0 * d;
    let ideal = 1024.0 / cycle;
    let late = collect_metrics(&out.log, 1, 2.0, 5.0, 1.0);
    let thr = late.network_throughput();
    assert!((thr / ideal - 1.0).abs() < 0.01, "{thr} vs {ideal}");
    assert!(thr < 2.0e6);
}

#[test]
fn first_packet_uses_maximum_pair_and_data_follows_handshake() {
    let table = common::synthetic_table(8, 1.0, 1.0, 4.0);
    let out = run(&one_link(), &cfg(Mode::Implicit, 1.0), &table, 2).unwrap();
    let first_data = out.log.iter().position(|e| matches!(e.kind, EventKind::DataSent { .. })).unwrap();
    let connected = out.log.iter().position(|e| matches!(e.kind, EventKind::Connected { .. })).unwrap();
    assert!(connected < first_data);
    assert!(out.log[..connected].iter().any(|e| matches!(e.kind, EventKind::C2t)));
    match out.log[first_data].kind {
        EventKind::DataSent { n_h, n_s, .. } => assert_eq!((n_h, n_s), (15, 20)),
        _ => unreachable!(),
    }
    assert_eq!((out.metrics.trace[0].n_h, out.metrics.trace[0].n_s), (15, 20));
}

#[test]
fn dead_control_channel_exhausts_retries() {
    let mut table = common::synthetic_table(8, 1.0, 1.0, 4.0);
    // make the control pair useless
    table
        .insert(
            uswb::phy::BerKey::new(Scheme::PpmBpsk, 0, 1, 1),
            uswb::phy::BerEntry { ber: 0.5, trials: 1, ci_half_width: 0.0 },
        )
        .unwrap();
    let mut c = cfg(Mode::Implicit, 0.5);
    c.mac.control_pair = FramePair::new(1, 1);
    let out = run(&one_link(), &c, &table, 3).unwrap();
    assert!(out.log.iter().all(|e| !matches!(e.kind, EventKind::DataSent { .. })));
    let fails = out.log.iter().filter(|e| matches!(e.kind, EventKind::HandshakeFailed)).count();
    assert!(fails >= 1);
    assert_eq!(out.metrics.connections[0].handshake_failures as usize, fails);
    // every failure is preceded by exactly N_R timeouts
    let timeouts = out.log.iter().filter(|e| matches!(e.kind, EventKind::HandshakeTimeout { .. })).count();
    assert!(timeouts >= 3 * fails);
    for e in &out.log {
        if let EventKind::R2t { retries } | EventKind::HandshakeTimeout { retries } = e.kind {
            assert!(retries <= c.mac.max_retries);
        }
    }
}

#[test]
fn deterministic_and_conserving() {
    let table = common::synthetic_table(8, 1.0, 1.0, 4.0);
    let topo = generate_topology(&TopologyConfig::default(), 9).unwrap();
    let c = SimConfig { duration: 6.0, ..SimConfig::default() };
    let a = run(&topo, &c, &table, 77).unwrap();
    let b = run(&topo, &c, &table, 77).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.metrics, b.metrics);
    for (i, m) in a.metrics.connections.iter().enumerate() {
        let in_flight = m.generated - m.delivered - m.dropped;
        assert!(in_flight <= 1, "connection {i}: {m:?}");
    }
    let mut last = 0.0;
    for e in &a.log {
        assert!(e.t >= last);
        last = e.t;
    }
}

#[test]
fn traces_change_only_on_feedback_and_are_feasible() {
    let table = common::synthetic_table(8, 1.0, 1.0, 4.0);
    let topo = generate_topology(&TopologyConfig::default(), 4).unwrap();
    let c = SimConfig { duration: 8.0, ..SimConfig::default() };
    let out = run(&topo, &c, &table, 5).unwrap();
    for p in &out.metrics.trace {
        assert!(out.log.iter().any(|e| e.t == p.t
            && e.conn == p.connection
            && matches!(e.kind, EventKind::Feedback { .. } | EventKind::Connected { .. })));
    }
    for e in &out.log {
        if let EventKind::Adapted { k, n_h, n_s, fallback: false, .. } = e.kind {
            assert!(table.ber(c.scheme, k, n_h, n_s).unwrap() <= c.constraints.ber_max);
        }
    }
}

#[test]
fn coverage_gap_is_config_error() {
    let table = common::synthetic_table(3, 1.0, 1.0, 4.0);
    let topo = generate_topology(&TopologyConfig::default(), 1).unwrap();
    let err = run(&topo, &SimConfig::default(), &table, 1).unwrap_err();
    assert!(err.to_string().contains("ber_table"), "{err}");
    assert_eq!(err.exit_code(), 1);
    let empty = BerTable::new();
    assert!(run(&one_link(), &cfg(Mode::Implicit, 1.0), &empty, 1).is_err());
}

#[test]
fn explicit_three_clusters_runs() {
    let table = common::synthetic_table(8, 1.0, 1.0, 4.0);
    let tc = TopologyConfig { cluster_pairs: [2, 1, 2], ..TopologyConfig::three_clusters() };
    let topo = generate_topology(&tc, 3).unwrap();
    let c = SimConfig { mode: Mode::Explicit, duration: 5.0, ..SimConfig::default() };
    let out = run(&topo, &c, &table, 3).unwrap();
    assert!(out.metrics.delivered() > 0);
    for e in &out.log {
        if let EventKind::Adapted { n_h, bound, fallback: false, .. } = e.kind {
            assert!(n_h as f64 >= bound * (1.0 - 1e-12));
        }
    }
}
