use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::explicit::{LinkReport, SinrModel};
use super::log::{EventKind, SimEvent};
use super::metrics::{collect_metrics, Metrics};
use super::Topology;
use crate::adapt::{
    pulse_energy, solve_energy_min, solve_implicit, AdaptConstraints, EnergyObjective, ExplicitOracle, FramePair,
    PiezoParams, TableOracle,
};
use crate::error::{Error, Result};
use crate::phy::{BerTable, Scheme};
use crate::rng::{substream, tag, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Implicit,
    Explicit,
    EnergyEb,
    EnergyEs,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "implicit" => Ok(Mode::Implicit),
            "explicit" => Ok(Mode::Explicit),
            "energy_eb" => Ok(Mode::EnergyEb),
            "energy_es" => Ok(Mode::EnergyEs),
            _ => Err(Error::invalid(format!("unknown adaptation mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacConfig {
    pub data_bits: u32,
    pub control_bits: u32,
    pub backoff_min: f64,
    pub backoff_max: f64,
    /// Handshake retries before giving up (N_R).
    pub max_retries: u32,
    /// Retransmissions of a data packet received in error; with the default
    /// of zero every corrupted packet is dropped.
    pub data_retries: u32,
    /// Sound speed used for every propagation delay, m/s.
    pub sound_speed: f64,
    /// Extra wait beyond a round trip before an R2T is considered lost, s.
    pub timeout_margin: f64,
    /// Frame/code pair of the common control channel.
    pub control_pair: FramePair,
}

impl Default for MacConfig {
    fn default() -> Self {
        MacConfig {
            data_bits: 1024,
            control_bits: 64,
            backoff_min: 1e-3,
            backoff_max: 10e-3,
            max_retries: 3,
            data_retries: 0,
            sound_speed: 1540.0,
            timeout_margin: 1e-3,
            control_pair: FramePair::new(15, 20),
        }
    }
}

impl MacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Error::Config {
            location: format!("mac.{field}"),
            message: msg.to_string(),
        };
        if self.data_bits == 0 {
            return Err(bad("data_bits", "must be at least 1"));
        }
        if self.control_bits == 0 {
            return Err(bad("control_bits", "must be at least 1"));
        }
        if !(self.backoff_min >= 0.0 && self.backoff_max >= self.backoff_min) {
            return Err(bad("backoff_max", "need 0 <= backoff_min <= backoff_max"));
        }
        if !(self.sound_speed > 0.0) {
            return Err(bad("sound_speed", "must be positive"));
        }
        if !(self.timeout_margin >= 0.0) {
            return Err(bad("timeout_margin", "must be non-negative"));
        }
        if self.control_pair.n_h == 0 || self.control_pair.n_s == 0 {
            return Err(bad("control_pair", "N_h and N_s must be at least 1"));
        }
        Ok(())
    }
}

/// When connections start opening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Activation {
    /// Uniformly random start in `[0, latest]`.
    Random { latest: f64 },
    /// Connection of rank `r` within its cluster starts at `r·delay`.
    Staged { delay: f64 },
    /// Explicit start time per connection.
    Times { times: Vec<f64> },
}

impl Default for Activation {
    fn default() -> Self {
        Activation::Random { latest: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub mode: Mode,
    pub constraints: AdaptConstraints,
    pub mac: MacConfig,
    pub piezo: PiezoParams,
    pub activation: Activation,
    /// Simulated time, s.
    pub duration: f64,
    /// Throughput averaging window, s.
    pub window: f64,
    /// SINR model for the explicit mode; calibrated from the table if absent.
    pub sinr_model: Option<SinrModel>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scheme: Scheme::PpmBpsk,
            mode: Mode::Implicit,
            constraints: AdaptConstraints::default(),
            mac: MacConfig::default(),
            piezo: PiezoParams::default(),
            activation: Activation::default(),
            duration: 100.0,
            window: 1.0,
            sinr_model: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, topology: &Topology, table: &BerTable) -> Result<()> {
        self.constraints.validate().map_err(|e| Error::Config {
            location: "constraints".into(),
            message: e.to_string(),
        })?;
        self.mac.validate()?;
        self.piezo.validate().map_err(|e| Error::Config {
            location: "energy".into(),
            message: e.to_string(),
        })?;
        if !(self.duration > 0.0) {
            return Err(Error::Config {
                location: "duration".into(),
                message: "must be positive".into(),
            });
        }
        if !(self.window > 0.0) {
            return Err(Error::Config {
                location: "window".into(),
                message: "must be positive".into(),
            });
        }
        match &self.activation {
            Activation::Random { latest } if !(*latest >= 0.0) => {
                return Err(Error::Config {
                    location: "activation.latest".into(),
                    message: "must be non-negative".into(),
                })
            }
            Activation::Staged { delay } if !(*delay >= 0.0) => {
                return Err(Error::Config {
                    location: "activation.delay".into(),
                    message: "must be non-negative".into(),
                })
            }
            Activation::Times { times } if times.len() != topology.connections.len() || times.iter().any(|t| !(*t >= 0.0)) => {
                return Err(Error::Config {
                    location: "activation.times".into(),
                    message: format!("need {} non-negative start times", topology.connections.len()),
                })
            }
            _ => {}
        }
        let k_max = topology.max_interferers() as u32;
        let c = &self.constraints;
        for k in 0..=k_max {
            for h in 1..=c.n_h_max {
                for s in 1..=c.n_s_max {
                    if table.get(self.scheme, k, h, s).is_err() {
                        return Err(Error::Config {
                            location: "ber_table".into(),
                            message: format!(
                                "no entry for {} K={k} N_h={h} N_s={s}; the topology has up to {k_max} interferers per receiver",
                                self.scheme
                            ),
                        });
                    }
                }
            }
        }
        let cp = self.mac.control_pair;
        if table.get(self.scheme, 0, cp.n_h, cp.n_s).is_err() {
            return Err(Error::Config {
                location: "mac.control_pair".into(),
                message: format!("BER table has no entry for the control pair {cp}"),
            });
        }
        Ok(())
    }

    fn start_times(&self, topology: &Topology, rng: &mut SimRng) -> Vec<f64> {
        match &self.activation {
            Activation::Random { latest } => topology.connections.iter().map(|_| rng.gen::<f64>() * latest).collect(),
            Activation::Staged { delay } => topology.connections.iter().map(|c| c.rank as f64 * delay).collect(),
            Activation::Times { times } => times.clone(),
        }
    }
}

/// Raw event log plus the metrics collected from it.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub log: Vec<SimEvent>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    Awaiting { epoch: u64, retries: u32 },
    Connected,
}

#[derive(Debug, Clone)]
struct LinkState {
    phase: Phase,
    connected_at: Option<f64>,
    /// Pair the transmitter is using.
    pair: FramePair,
    seq: u64,
    attempt: u32,
    epoch: u64,
    /// Latest reports heard by this link's receiver, by reporting link.
    reports: HashMap<usize, LinkReport>,
    /// Frame length each link is believed to use, as heard in reports.
    known_n_h: HashMap<usize, u32>,
}

#[derive(Debug, Clone)]
enum Ev {
    Activate(usize),
    SendR2T(usize),
    R2TEnd { c: usize, epoch: u64, start: f64 },
    C2TEnd { c: usize, epoch: u64, start: f64 },
    Timeout { c: usize, epoch: u64 },
    DataEnd { c: usize, seq: u64, attempt: u32, pair: FramePair },
    Feedback { c: usize, ack: bool, done: bool, pair: FramePair },
    Report { to: usize, report: LinkReport },
}

struct Queued {
    t: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Queued {
    // reversed: BinaryHeap pops the earliest (t, seq)
    fn cmp(&self, o: &Self) -> Ordering {
        o.t.total_cmp(&self.t).then(o.seq.cmp(&self.seq))
    }
}

struct Sim<'a> {
    topo: &'a Topology,
    cfg: &'a SimConfig,
    table: &'a BerTable,
    model: Option<SinrModel>,
    e_p: f64,
    t_ctrl: f64,
    queue: BinaryHeap<Queued>,
    next_seq: u64,
    links: Vec<LinkState>,
    /// Control-channel transmissions: (node, start, end).
    control: Vec<(usize, f64, f64)>,
    mac_rng: SimRng,
    err_rng: SimRng,
    decisions: HashMap<u32, Option<FramePair>>,
    log: Vec<SimEvent>,
}

impl<'a> Sim<'a> {
    fn push(&mut self, t: f64, ev: Ev) {
        self.queue.push(Queued { t, seq: self.next_seq, ev });
        self.next_seq += 1;
    }

    fn record(&mut self, t: f64, conn: usize, kind: EventKind) {
        self.log.push(SimEvent { t, conn, kind });
    }

    fn tc(&self) -> f64 {
        self.cfg.constraints.tc
    }

    fn backoff(&mut self) -> f64 {
        let m = &self.cfg.mac;
        m.backoff_min + self.mac_rng.gen::<f64>() * (m.backoff_max - m.backoff_min)
    }

    fn connected_interferers(&self, c: usize, now: f64) -> Vec<usize> {
        self.topo
            .interferers(c)
            .iter()
            .copied()
            .filter(|&j| self.links[j].connected_at.is_some_and(|t| t <= now))
            .collect()
    }

    /// Transmit a control packet from `node`; returns its end time.
    fn control_tx(&mut self, node: usize, now: f64) -> f64 {
        let end = now + self.t_ctrl;
        self.control.retain(|&(_, _, e)| e > now - 4.0 * self.t_ctrl);
        self.control.push((node, now, end));
        end
    }

    /// Whether a control packet sent by `from` over `[start, start+T]`
    /// survives at `to`, given the overlapping control traffic.
    fn control_ok(&mut self, from: usize, to: usize, start: f64) -> Result<bool> {
        let end = start + self.t_ctrl;
        let k = self
            .control
            .iter()
            .filter(|&&(n, s, e)| n != from && n != to && self.topo.in_range(n, to) && s < end && e > start)
            .count() as u32;
        let cp = self.cfg.mac.control_pair;
        let ber = match self.table.ber(self.cfg.scheme, k, cp.n_h, cp.n_s) {
            Ok(b) => b,
            Err(_) => return Ok(false),
        };
        let per = 1.0 - (1.0 - ber).powi(self.cfg.mac.control_bits as i32);
        Ok(self.err_rng.gen::<f64>() >= per)
    }

    fn send_r2t(&mut self, c: usize, now: f64) {
        let retries = match self.links[c].phase {
            Phase::Awaiting { retries, .. } => retries,
            _ => 0,
        };
        self.links[c].epoch += 1;
        let epoch = self.links[c].epoch;
        self.links[c].phase = Phase::Awaiting { epoch, retries };
        let conn = self.topo.connections[c];
        self.record(now, c, EventKind::R2t { retries });
        let end = self.control_tx(conn.tx, now);
        let d = self.topo.delay(conn.tx, conn.rx, self.cfg.mac.sound_speed);
        self.push(end + d, Ev::R2TEnd { c, epoch, start: now });
        let timeout = 2.0 * self.t_ctrl + 2.0 * self.topo.range / self.cfg.mac.sound_speed + self.cfg.mac.timeout_margin;
        self.push(now + timeout, Ev::Timeout { c, epoch });
    }

    fn send_data(&mut self, c: usize, now: f64) {
        let l = &self.links[c];
        let (pair, seq, attempt) = (l.pair, l.seq, l.attempt);
        let bits = self.cfg.mac.data_bits;
        let dur = bits as f64 * pair.chips_per_bit() as f64 * self.tc();
        let energy = self.e_p * bits as f64 * pair.n_s as f64;
        self.record(
            now,
            c,
            EventKind::DataSent {
                seq,
                attempt,
                n_h: pair.n_h,
                n_s: pair.n_s,
                bits,
                energy,
            },
        );
        let conn = self.topo.connections[c];
        let d = self.topo.delay(conn.tx, conn.rx, self.cfg.mac.sound_speed);
        self.push(now + dur + d, Ev::DataEnd { c, seq, attempt, pair });
    }

    /// Receiver-side choice of the next pair for link `c`.
    fn adapt(&mut self, c: usize, now: f64, k: u32, interferers: &[usize]) -> Result<(FramePair, f64, bool)> {
        let cons = &self.cfg.constraints;
        let choice = match self.cfg.mode {
            Mode::Explicit => {
                let model = self.model.expect("explicit mode has a SINR model");
                let tc = cons.tc;
                let link = &self.links[c];
                let me = self.topo.connections[c];
                let heard: Vec<(u32, f64)> = interferers
                    .iter()
                    .map(|&j| {
                        let g = self.topo.gain(self.topo.connections[j].tx, me.rx);
                        (link.known_n_h.get(&j).copied().unwrap_or(cons.n_h_max), g)
                    })
                    .collect();
                let own = model.own(tc, &heard);
                let mut reps = Vec::new();
                let mut ids: Vec<&usize> = link.reports.keys().collect();
                ids.sort();
                for &i in ids {
                    if !self.links[i].connected_at.is_some_and(|t| t <= now) {
                        continue;
                    }
                    let g = self.topo.gain(me.tx, self.topo.connections[i].rx);
                    if let Some(r) = model.report_terms(tc, &link.reports[&i], c, g) {
                        reps.push(r);
                    }
                }
                match ExplicitOracle::new(own, &reps, cons.sinr_min) {
                    Ok(oracle) => {
                        let bound = oracle.n_h_bound;
                        (solve_implicit(cons, &oracle).ok(), bound)
                    }
                    Err(Error::Infeasible) => (None, f64::INFINITY),
                    Err(e) => return Err(e),
                }
            }
            mode => {
                let hit = self.decisions.get(&k).copied();
                let pair = match hit {
                    Some(p) => p,
                    None => {
                        let oracle = TableOracle::new(self.table, self.cfg.scheme, k, cons.ber_max, cons.n_h_max, cons.n_s_max)?;
                        let r = match mode {
                            Mode::Implicit => solve_implicit(cons, &oracle),
                            Mode::EnergyEb => solve_energy_min(EnergyObjective::Eb, cons, &oracle),
                            _ => solve_energy_min(EnergyObjective::Es, cons, &oracle),
                        };
                        let p = match r {
                            Ok(p) => Some(p),
                            Err(Error::Infeasible) => None,
                            Err(e) => return Err(e),
                        };
                        self.decisions.insert(k, p);
                        p
                    }
                };
                (pair, 1.0)
            }
        };
        Ok(match choice {
            (Some(p), bound) => (p, bound, false),
            (None, bound) => (cons.max_pair(), bound, true),
        })
    }

    fn broadcast(&mut self, c: usize, now: f64, pair: FramePair, interferers: &[usize]) {
        let me = self.topo.connections[c];
        let report = LinkReport {
            link: c,
            n_h: pair.n_h,
            n_s: pair.n_s,
            interferers: interferers
                .iter()
                .map(|&j| {
                    let n_h = self.links[c].known_n_h.get(&j).copied().unwrap_or(self.cfg.constraints.n_h_max);
                    (j, n_h, self.topo.gain(self.topo.connections[j].tx, me.rx))
                })
                .collect(),
        };
        for &j in self.topo.interferers(c) {
            let to = self.topo.connections[j].rx;
            let t = now + self.t_ctrl + self.topo.delay(me.rx, to, self.cfg.mac.sound_speed);
            self.push(t, Ev::Report { to: j, report: report.clone() });
        }
    }

    fn handle(&mut self, now: f64, ev: Ev) -> Result<()> {
        match ev {
            Ev::Activate(c) => {
                self.record(now, c, EventKind::Activated);
                self.send_r2t(c, now);
            }
            Ev::SendR2T(c) => self.send_r2t(c, now),
            Ev::R2TEnd { c, epoch, start } => {
                let conn = self.topo.connections[c];
                if self.awaiting(c, epoch) && self.control_ok(conn.tx, conn.rx, start)? {
                    self.record(now, c, EventKind::C2t);
                    let end = self.control_tx(conn.rx, now);
                    let d = self.topo.delay(conn.rx, conn.tx, self.cfg.mac.sound_speed);
                    self.push(end + d, Ev::C2TEnd { c, epoch, start: now });
                }
            }
            Ev::C2TEnd { c, epoch, start } => {
                let conn = self.topo.connections[c];
                if self.awaiting(c, epoch) && self.control_ok(conn.rx, conn.tx, start)? {
                    let l = &mut self.links[c];
                    l.phase = Phase::Connected;
                    l.connected_at = Some(now);
                    l.pair = self.cfg.constraints.max_pair();
                    let p = l.pair;
                    self.record(now, c, EventKind::Connected { n_h: p.n_h, n_s: p.n_s });
                    self.send_data(c, now);
                }
            }
            Ev::Timeout { c, epoch } => {
                if let Phase::Awaiting { epoch: e, retries } = self.links[c].phase {
                    if e == epoch {
                        let wait = self.backoff();
                        if retries >= self.cfg.mac.max_retries {
                            self.record(now, c, EventKind::HandshakeFailed);
                            self.links[c].phase = Phase::Idle;
                        } else {
                            self.record(now, c, EventKind::HandshakeTimeout { retries: retries + 1 });
                            self.links[c].phase = Phase::Awaiting { epoch, retries: retries + 1 };
                        }
                        self.push(now + wait, Ev::SendR2T(c));
                    }
                }
            }
            Ev::DataEnd { c, seq, attempt, pair } => {
                let interferers = self.connected_interferers(c, now);
                let k = interferers.len() as u32;
                let ber = self.table.ber(self.cfg.scheme, k, pair.n_h, pair.n_s)?;
                let bits = self.cfg.mac.data_bits;
                let per = 1.0 - (1.0 - ber).powi(bits as i32);
                let ok = self.err_rng.gen::<f64>() >= per;
                let done = ok || attempt >= self.cfg.mac.data_retries;
                if ok {
                    self.record(now, c, EventKind::Delivered { seq, bits });
                } else if done {
                    self.record(now, c, EventKind::Dropped { seq });
                } else {
                    self.record(now, c, EventKind::Errored { seq, attempt });
                }
                let (next, bound, fallback) = self.adapt(c, now, k, &interferers)?;
                self.record(
                    now,
                    c,
                    EventKind::Adapted {
                        k,
                        n_h: next.n_h,
                        n_s: next.n_s,
                        bound,
                        fallback,
                    },
                );
                if self.cfg.mode == Mode::Explicit {
                    self.broadcast(c, now, next, &interferers);
                }
                let conn = self.topo.connections[c];
                let dur = self.cfg.mac.control_bits as f64 * pair.chips_per_bit() as f64 * self.tc();
                let d = self.topo.delay(conn.rx, conn.tx, self.cfg.mac.sound_speed);
                self.push(now + dur + d, Ev::Feedback { c, ack: ok, done, pair: next });
            }
            Ev::Feedback { c, ack, done, pair } => {
                self.record(now, c, EventKind::Feedback { ack, n_h: pair.n_h, n_s: pair.n_s });
                let l = &mut self.links[c];
                l.pair = pair;
                if done {
                    l.seq += 1;
                    l.attempt = 0;
                } else {
                    l.attempt += 1;
                }
                self.send_data(c, now);
            }
            Ev::Report { to, report } => {
                let l = &mut self.links[to];
                l.known_n_h.insert(report.link, report.n_h);
                l.reports.insert(report.link, report);
            }
        }
        Ok(())
    }

    fn awaiting(&self, c: usize, epoch: u64) -> bool {
        matches!(self.links[c].phase, Phase::Awaiting { epoch: e, .. } if e == epoch)
    }
}

/// Run the protocol on `topology` for `config.duration` seconds.
pub fn run(topology: &Topology, config: &SimConfig, table: &BerTable, seed: u64) -> Result<SimOutput> {
    config.validate(topology, table)?;
    let model = match (config.mode, config.sinr_model) {
        (Mode::Explicit, Some(m)) => Some(m),
        (Mode::Explicit, None) => Some(super::explicit::calibrate_sinr_model(
            table,
            config.scheme,
            config.constraints.tc,
            1e-9,
            1e-2,
        )?),
        _ => None,
    };
    let cp = config.mac.control_pair;
    let mut sim = Sim {
        topo: topology,
        cfg: config,
        table,
        model,
        e_p: pulse_energy(&config.piezo)?,
        t_ctrl: config.mac.control_bits as f64 * cp.chips_per_bit() as f64 * config.constraints.tc,
        queue: BinaryHeap::new(),
        next_seq: 0,
        links: topology
            .connections
            .iter()
            .map(|_| LinkState {
                phase: Phase::Idle,
                connected_at: None,
                pair: config.constraints.max_pair(),
                seq: 0,
                attempt: 0,
                epoch: 0,
                reports: HashMap::new(),
                known_n_h: HashMap::new(),
            })
            .collect(),
        control: Vec::new(),
        mac_rng: substream(seed, tag::MAC, 0),
        err_rng: substream(seed, tag::MAC, 1),
        decisions: HashMap::new(),
        log: Vec::new(),
    };
    let starts = config.start_times(topology, &mut sim.mac_rng);
    for (c, t) in starts.into_iter().enumerate() {
        sim.push(t, Ev::Activate(c));
    }
    while let Some(q) = sim.queue.pop() {
        if q.t > config.duration {
            break;
        }
        sim.handle(q.t, q.ev)?;
    }
    let metrics = collect_metrics(&sim.log, topology.connections.len(), 0.0, config.duration, config.window);
    Ok(SimOutput { log: sim.log, metrics })
}

/// [`run`] with connection `r` of every cluster starting at `r·delay`.
pub fn staged_activation(topology: &Topology, config: &SimConfig, table: &BerTable, delay: f64, seed: u64) -> Result<SimOutput> {
    let cfg = SimConfig {
        activation: Activation::Staged { delay },
        ..config.clone()
    };
    run(topology, &cfg, table, seed)
}
