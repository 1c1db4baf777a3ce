use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One entry of the simulation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t: f64,
    pub conn: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    Activated,
    R2t { retries: u32 },
    C2t,
    Connected { n_h: u32, n_s: u32 },
    HandshakeTimeout { retries: u32 },
    /// The transmitter ran out of retries and returned to idle.
    HandshakeFailed,
    DataSent { seq: u64, attempt: u32, n_h: u32, n_s: u32, bits: u32, energy: f64 },
    Delivered { seq: u64, bits: u32 },
    /// Received in error; will be retransmitted.
    Errored { seq: u64, attempt: u32 },
    Dropped { seq: u64 },
    /// Receiver decision; `bound` is the frame-length floor imposed by
    /// interference reports (1 when none, infinite when no room is left).
    Adapted { k: u32, n_h: u32, n_s: u32, bound: f64, fallback: bool },
    /// ACK or NACK reaching the transmitter with the pair to use next.
    Feedback { ack: bool, n_h: u32, n_s: u32 },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Activated => "activated",
            EventKind::R2t { .. } => "r2t",
            EventKind::C2t => "c2t",
            EventKind::Connected { .. } => "connected",
            EventKind::HandshakeTimeout { .. } => "handshake_timeout",
            EventKind::HandshakeFailed => "handshake_failed",
            EventKind::DataSent { .. } => "data_sent",
            EventKind::Delivered { .. } => "delivered",
            EventKind::Errored { .. } => "errored",
            EventKind::Dropped { .. } => "dropped",
            EventKind::Adapted { .. } => "adapted",
            EventKind::Feedback { .. } => "feedback",
        }
    }
}

pub const EVENTS_HEADER: [&str; 9] = ["t", "connection", "kind", "seq", "attempt", "k", "N_h", "N_s", "value"];

/// Write the log as CSV with a fixed column order; unused cells are empty.
pub fn write_events_csv<W: Write>(log: &[SimEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENTS_HEADER)?;
    let s = |v: Option<String>| v.unwrap_or_default();
    for e in log {
        let (mut seq, mut attempt, mut k, mut n_h, mut n_s, mut value) = (None, None, None, None, None, None);
        match &e.kind {
            EventKind::R2t { retries } | EventKind::HandshakeTimeout { retries } => attempt = Some(retries.to_string()),
            EventKind::Connected { n_h: h, n_s: ns } => {
                n_h = Some(h.to_string());
                n_s = Some(ns.to_string());
            }
            EventKind::DataSent { seq: q, attempt: a, n_h: h, n_s: ns, bits: _, energy } => {
                seq = Some(q.to_string());
                attempt = Some(a.to_string());
                n_h = Some(h.to_string());
                n_s = Some(ns.to_string());
                value = Some(energy.to_string());
            }
            EventKind::Delivered { seq: q, bits } => {
                seq = Some(q.to_string());
                value = Some(bits.to_string());
            }
            EventKind::Errored { seq: q, attempt: a } => {
                seq = Some(q.to_string());
                attempt = Some(a.to_string());
            }
            EventKind::Dropped { seq: q } => seq = Some(q.to_string()),
            EventKind::Adapted { k: kk, n_h: h, n_s: ns, bound, fallback } => {
                k = Some(kk.to_string());
                n_h = Some(h.to_string());
                n_s = Some(ns.to_string());
                value = Some(if *fallback { "fallback".to_string() } else { bound.to_string() });
            }
            EventKind::Feedback { ack, n_h: h, n_s: ns } => {
                n_h = Some(h.to_string());
                n_s = Some(ns.to_string());
                value = Some(if *ack { "ack" } else { "nack" }.to_string());
            }
            EventKind::Activated | EventKind::C2t | EventKind::HandshakeFailed => {}
        }
        w.write_record([
            e.t.to_string(),
            e.conn.to_string(),
            e.kind.name().to_string(),
            s(seq),
            s(attempt),
            s(k),
            s(n_h),
            s(n_s),
            s(value),
        ])?;
    }
    w.flush()?;
    Ok(())
}
