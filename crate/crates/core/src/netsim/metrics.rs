use std::io::Write;

use serde::{Deserialize, Serialize};

use super::log::{EventKind, SimEvent};
use crate::error::Result;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConnectionMetrics {
    /// Distinct packets whose first transmission started.
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    /// Receptions in error that were retransmitted.
    pub errored: u64,
    pub delivered_bits: u64,
    pub sent_bits: u64,
    /// Energy spent on data pulses, J.
    pub data_energy: f64,
    pub handshake_failures: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub connection: usize,
    pub n_h: u32,
    pub n_s: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub t0: f64,
    pub t1: f64,
    pub window: f64,
    pub connections: Vec<ConnectionMetrics>,
    /// `throughput[w][c]`: bit/s delivered on connection `c` in window `w`.
    pub throughput: Vec<Vec<f64>>,
    pub trace: Vec<TracePoint>,
}

/// Aggregate the part of `log` falling in `[t0, t1)`.
pub fn collect_metrics(log: &[SimEvent], connections: usize, t0: f64, t1: f64, window: f64) -> Metrics {
    let span = (t1 - t0).max(0.0);
    let windows = if span > 0.0 && window > 0.0 { (span / window).ceil() as usize } else { 0 };
    let mut m = Metrics {
        t0,
        t1,
        window,
        connections: vec![ConnectionMetrics::default(); connections],
        throughput: vec![vec![0.0; connections]; windows],
        trace: Vec::new(),
    };
    let mut current: Vec<Option<(u32, u32)>> = vec![None; connections];
    for e in log {
        // pair changes before the interval still define the starting state
        match e.kind {
            EventKind::Connected { n_h, n_s } | EventKind::Feedback { n_h, n_s, .. } => {
                if current[e.conn] != Some((n_h, n_s)) {
                    current[e.conn] = Some((n_h, n_s));
                    if e.t < t1 {
                        m.trace.push(TracePoint { t: e.t, connection: e.conn, n_h, n_s });
                    }
                }
            }
            _ => {}
        }
        if e.t < t0 || e.t >= t1 {
            continue;
        }
        let c = &mut m.connections[e.conn];
        match e.kind {
            EventKind::DataSent { attempt, bits, energy, .. } => {
                if attempt == 0 {
                    c.generated += 1;
                }
                c.sent_bits += bits as u64;
                c.data_energy += energy;
            }
            EventKind::Delivered { bits, .. } => {
                c.delivered += 1;
                c.delivered_bits += bits as u64;
                let w = (((e.t - t0) / window) as usize).min(windows.saturating_sub(1));
                m.throughput[w][e.conn] += bits as f64 / window;
            }
            EventKind::Dropped { .. } => c.dropped += 1,
            EventKind::Errored { .. } => c.errored += 1,
            EventKind::HandshakeFailed => c.handshake_failures += 1,
            _ => {}
        }
    }
    m
}

impl Metrics {
    fn span(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn connection_throughput(&self, c: usize) -> f64 {
        if self.span() > 0.0 {
            self.connections[c].delivered_bits as f64 / self.span()
        } else {
            0.0
        }
    }

    pub fn network_throughput(&self) -> f64 {
        (0..self.connections.len()).map(|c| self.connection_throughput(c)).sum()
    }

    pub fn delivered(&self) -> u64 {
        self.connections.iter().map(|c| c.delivered).sum()
    }

    pub fn dropped(&self) -> u64 {
        self.connections.iter().map(|c| c.dropped).sum()
    }

    /// `dropped / (dropped + delivered)`, zero when nothing completed.
    pub fn drop_rate(&self) -> f64 {
        let (d, ok) = (self.dropped(), self.delivered());
        if d + ok == 0 {
            0.0
        } else {
            d as f64 / (d + ok) as f64
        }
    }

    /// Data energy per transmitted bit, J/bit.
    pub fn mean_eb(&self) -> f64 {
        let bits: u64 = self.connections.iter().map(|c| c.sent_bits).sum();
        if bits == 0 {
            0.0
        } else {
            self.connections.iter().map(|c| c.data_energy).sum::<f64>() / bits as f64
        }
    }

    pub fn write_metrics_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["window_start", "connection", "throughput_bps"])?;
        for (i, row) in self.throughput.iter().enumerate() {
            let start = self.t0 + i as f64 * self.window;
            for (c, v) in row.iter().enumerate() {
                w.write_record([start.to_string(), c.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "connection", "N_h", "N_s"])?;
        for p in &self.trace {
            w.write_record([p.t.to_string(), p.connection.to_string(), p.n_h.to_string(), p.n_s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One-row-per-connection totals.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "connection",
            "generated",
            "delivered",
            "dropped",
            "errored",
            "throughput_bps",
            "energy_per_bit_j",
            "handshake_failures",
        ])?;
        for (i, c) in self.connections.iter().enumerate() {
            let eb = if c.sent_bits > 0 { c.data_energy / c.sent_bits as f64 } else { 0.0 };
            w.write_record([
                i.to_string(),
                c.generated.to_string(),
                c.delivered.to_string(),
                c.dropped.to_string(),
                c.errored.to_string(),
                self.connection_throughput(i).to_string(),
                eb.to_string(),
                c.handshake_failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log() {
        let m = collect_metrics(&[], 3, 0.0, 10.0, 1.0);
        assert_eq!(m.network_throughput(), 0.0);
        assert_eq!(m.drop_rate(), 0.0);
        assert_eq!(m.mean_eb(), 0.0);
        assert!(m.trace.is_empty());
    }

    #[test]
    fn drop_rate_definition() {
        let mut log = Vec::new();
        for i in 0..7 {
            log.push(SimEvent { t: i as f64, conn: 0, kind: EventKind::Delivered { seq: i, bits: 8 } });
        }
        for i in 0..3 {
            log.push(SimEvent { t: 8.0 + i as f64, conn: 1, kind: EventKind::Dropped { seq: i } });
        }
        let m = collect_metrics(&log, 2, 0.0, 20.0, 5.0);
        assert_eq!(m.drop_rate(), 0.3);
        assert_eq!(m.connection_throughput(0), 56.0 / 20.0);
        assert_eq!(m.throughput[0][0], 5.0 * 8.0 / 5.0);
    }
}
