//! Packet-level discrete-event simulation of the MAC with adaptation in
//! the loop.

mod engine;
mod explicit;
mod log;
mod metrics;
mod topology;

pub use engine::{run, staged_activation, Activation, MacConfig, Mode, SimConfig, SimOutput};
pub use explicit::{calibrate_sinr_model, LinkReport, SinrModel};
pub use log::{write_events_csv, EventKind, SimEvent, EVENTS_HEADER};
pub use metrics::{collect_metrics, ConnectionMetrics, Metrics, TracePoint};
pub use topology::{generate_topology, Connection, Node, Setting, Topology, TopologyConfig};
