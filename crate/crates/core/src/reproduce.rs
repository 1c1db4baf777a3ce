//! Desk-scale recipes regenerating the data behind each figure and table.
//!
//! | id     | content                                              | budget (1 core, release) |
//! |--------|------------------------------------------------------|--------------------------|
//! | fig1   | arm-section wave run: sink series, taps, delay stats | ~5 s                     |
//! | fig2   | two time-hopping/spreading patterns                  | instant                  |
//! | fig3   | throughput and drop rate vs connections, 2 schemes   | ~1 min                   |
//! | fig4   | BER vs `N_h` and `N_s` at four interferers            | instant (table lookup)   |
//! | fig5   | `(N_h, N_s)` traces, 9 staged connections            | ~10 s                    |
//! | fig6   | per-cluster throughput, explicit mode, 4 load steps  | ~10 s                    |
//! | fig7   | `(N_h, N_s)` traces of the fig6 run                   | ~10 s                    |
//! | fig8   | throughput and `E_b`, rate vs `E_b`-optimal modes     | ~1 min                   |
//! | table1 | frequency limits for a 100 dB budget                 | instant                  |

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::channel::{delay_stats, max_frequency_for_budget};
use crate::error::{Error, Result};
use crate::netsim::{
    collect_metrics, generate_topology, run, staged_activation, Activation, EventKind, Mode, Setting, SimConfig,
    SimOutput, TopologyConfig,
};
use crate::phy::{BerTable, HoppingPlan, Scheme};
use crate::tissue::TissueTable;
use crate::wavefield::{arrival_clusters, build_arm_geometry, max_stable_dt, ArmExperiment};

pub const FIGURES: [&str; 9] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table1"];

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub table: BerTable,
    /// Base simulation settings; scheme, mode and activation are overridden
    /// per recipe.
    pub sim: SimConfig,
    pub topology: TopologyConfig,
    pub wave: ArmExperiment,
}

impl ReproduceOptions {
    pub fn new(out_dir: impl Into<PathBuf>, seed: u64) -> Self {
        ReproduceOptions {
            out_dir: out_dir.into(),
            seed,
            table: BerTable::bundled(),
            sim: SimConfig::default(),
            topology: TopologyConfig::default(),
            wave: ArmExperiment::default(),
        }
    }
}

fn writer(dir: &Path, name: &str) -> Result<(PathBuf, csv::Writer<BufWriter<File>>)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, csv::Writer::from_writer(BufWriter::new(f))))
}

fn write_rows<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let (path, mut w) = writer(dir, name)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Totals for one load level of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadPoint {
    pub scheme: Scheme,
    pub mode: Mode,
    pub connections: usize,
    pub throughput_bps: f64,
    pub drop_rate: f64,
    pub delivered: u64,
    pub dropped: u64,
    pub mean_eb_j: f64,
}

/// Single-square sweep over `1..=n_max` connections, all opening within the
/// first two seconds; statistics exclude a `settle` prefix. Each load runs
/// `replicates` consecutive seeds from `seed`. Packet counts are pooled,
/// throughput and E_b are averaged.
#[allow(clippy::too_many_arguments)]
pub fn load_sweep(
    base: &SimConfig,
    topology: &TopologyConfig,
    table: &BerTable,
    scheme: Scheme,
    mode: Mode,
    n_max: usize,
    settle: f64,
    seed: u64,
    replicates: usize,
) -> Result<Vec<LoadPoint>> {
    let replicates = replicates.max(1);
    (1..=n_max)
        .map(|n| {
            let mut point = LoadPoint {
                scheme,
                mode,
                connections: n,
                throughput_bps: 0.0,
                drop_rate: 0.0,
                delivered: 0,
                dropped: 0,
                mean_eb_j: 0.0,
            };
            for r in 0..replicates as u64 {
                let s = seed.wrapping_add(r);
                let topo = generate_topology(
                    &TopologyConfig {
                        setting: Setting::SingleSquare,
                        pairs: n,
                        ..topology.clone()
                    },
                    s,
                )?;
                let cfg = SimConfig {
                    scheme,
                    mode,
                    activation: Activation::Random { latest: 2.0 },
                    ..base.clone()
                };
                let out = run(&topo, &cfg, table, s)?;
                let m = collect_metrics(&out.log, n, settle, cfg.duration, cfg.window);
                point.throughput_bps += m.network_throughput() / replicates as f64;
                point.mean_eb_j += m.mean_eb() / replicates as f64;
                point.delivered += m.delivered();
                point.dropped += m.dropped();
            }
            let done = point.delivered + point.dropped;
            if done > 0 {
                point.drop_rate = point.dropped as f64 / done as f64;
            }
            Ok(point)
        })
        .collect()
}

/// Per-cluster statistics for one load step of the three-cluster run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterStep {
    pub step: usize,
    pub cluster: usize,
    pub active_connections: usize,
    pub mean_interferers: f64,
    pub throughput_per_connection_bps: f64,
    pub drop_rate: f64,
}

/// Explicit-mode three-cluster run: one connection in the middle cluster
/// from the start, one more in each edge cluster every `delay` seconds.
pub fn three_cluster_run(opts: &ReproduceOptions, delay: f64, settle: f64) -> Result<(SimOutput, Vec<ClusterStep>)> {
    let tcfg = TopologyConfig {
        setting: Setting::ThreeClusters,
        ..opts.topology.clone()
    };
    let topo = generate_topology(&tcfg, opts.seed)?;
    let steps = tcfg.cluster_pairs[0].max(tcfg.cluster_pairs[2]);
    let cfg = SimConfig {
        scheme: Scheme::PpmBpsk,
        mode: Mode::Explicit,
        duration: steps as f64 * delay,
        ..opts.sim.clone()
    };
    let out = staged_activation(&topo, &cfg, &opts.table, delay, opts.seed)?;
    let n = topo.connections.len();
    let mut rows = Vec::new();
    for step in 0..steps {
        let (t0, t1) = (step as f64 * delay + settle, (step + 1) as f64 * delay);
        let m = collect_metrics(&out.log, n, t0, t1, cfg.window);
        for cluster in 0..3 {
            let members: Vec<usize> = (0..n)
                .filter(|&c| topo.connections[c].cluster == cluster && topo.connections[c].rank <= step)
                .collect();
            if members.is_empty() {
                continue;
            }
            let (mut ks, mut count) = (0.0, 0usize);
            for e in &out.log {
                if e.t >= t0 && e.t < t1 && members.contains(&e.conn) {
                    if let EventKind::Adapted { k, .. } = e.kind {
                        ks += k as f64;
                        count += 1;
                    }
                }
            }
            let (del, drop): (u64, u64) = members
                .iter()
                .map(|&c| (m.connections[c].delivered, m.connections[c].dropped))
                .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            rows.push(ClusterStep {
                step: step + 1,
                cluster,
                active_connections: members.len(),
                mean_interferers: if count > 0 { ks / count as f64 } else { 0.0 },
                throughput_per_connection_bps: members.iter().map(|&c| m.connection_throughput(c)).sum::<f64>()
                    / members.len() as f64,
                drop_rate: if del + drop > 0 { drop as f64 / (del + drop) as f64 } else { 0.0 },
            });
        }
    }
    Ok((out, rows))
}

/// Nine single-square connections started `delay` apart, coherent scheme.
pub fn staged_nine(opts: &ReproduceOptions, delay: f64, tail: f64) -> Result<SimOutput> {
    let topo = generate_topology(
        &TopologyConfig {
            setting: Setting::SingleSquare,
            pairs: 9,
            ..opts.topology.clone()
        },
        opts.seed,
    )?;
    let cfg = SimConfig {
        scheme: Scheme::PpmBpsk,
        mode: Mode::Implicit,
        duration: 8.0 * delay + tail,
        ..opts.sim.clone()
    };
    staged_activation(&topo, &cfg, &opts.table, delay, opts.seed)
}

#[derive(Serialize)]
struct SeriesRow {
    t_s: f64,
    pressure: f64,
}

#[derive(Serialize)]
struct TapRow {
    delay_s: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct Fig1Summary {
    tau_m_s: f64,
    tau_rms_s: f64,
    coherence_bandwidth_hz: f64,
    arrival_clusters: usize,
    first_arrival_s: f64,
}

#[derive(Serialize)]
struct PulseRow {
    user: usize,
    bit: u8,
    frame: usize,
    chip: u32,
    ppm_position: u8,
    polarity: f64,
}

#[derive(Serialize)]
struct FreqRow {
    tissue: &'static str,
    distance_m: f64,
    max_frequency_mhz: f64,
}

#[derive(Serialize)]
struct BerRow {
    scheme: Scheme,
    k: u32,
    n_h: u32,
    n_s: u32,
    ber: f64,
    ci_half_width: f64,
}

/// Run recipe `id`, returning the files written.
pub fn reproduce(id: &str, opts: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    let dir = &opts.out_dir;
    match id {
        "fig1" => {
            let mut exp = opts.wave.clone();
            let geometry = build_arm_geometry(exp.dx)?;
            let steps = (exp.duration / (exp.courant * max_stable_dt(&geometry))).ceil() as usize;
            if exp.options.snapshot_every.is_none() {
                exp.options.snapshot_every = Some((steps / 4).max(1));
            }
            let run = exp.run_on(geometry)?;
            let dt = run.record.dt;
            let series: Vec<SeriesRow> = run
                .record
                .sink
                .iter()
                .enumerate()
                .map(|(i, &p)| SeriesRow { t_s: i as f64 * dt, pressure: p })
                .collect();
            let cir = run.impulse_response()?;
            let taps: Vec<TapRow> = cir
                .taps()
                .iter()
                .map(|t| TapRow { delay_s: t.delay, re: t.amplitude.re, im: t.amplitude.im })
                .collect();
            let stats = delay_stats(&cir);
            let clusters = arrival_clusters(&run.record.sink, dt, 0.2, 2e-6);
            let summary = Fig1Summary {
                tau_m_s: stats.tau_m,
                tau_rms_s: stats.tau_rms,
                coherence_bandwidth_hz: stats.coherence_bandwidth,
                arrival_clusters: clusters.len(),
                first_arrival_s: clusters.first().map(|c| c.0).unwrap_or(f64::NAN),
            };
            let (snap_path, _) = writer(dir, "fig1_snapshots.csv")?;
            let f = File::create(&snap_path).map_err(|e| Error::io(&snap_path, e))?;
            run.record.write_snapshots_csv(exp.dx, BufWriter::new(f))?;
            Ok(vec![
                write_rows(dir, "fig1_sink.csv", &series)?,
                write_rows(dir, "fig1_taps.csv", &taps)?,
                write_rows(dir, "fig1_summary.csv", &[summary])?,
                snap_path,
            ])
        }
        "fig2" => {
            let users = [
                HoppingPlan::from_sequences(1, Scheme::PpmBpsk, 16, vec![3, 12, 8, 2], vec![1, -1, -1, 1]),
                HoppingPlan::from_sequences(2, Scheme::PpmBpsk, 16, vec![11, 3, 12, 7], vec![1, 1, 1, -1]),
            ];
            let mut rows = Vec::new();
            for (u, plan) in users.iter().enumerate() {
                for bit in [0u8, 1] {
                    for j in 0..plan.n_s as usize {
                        rows.push(PulseRow {
                            user: u + 1,
                            bit,
                            frame: j,
                            chip: plan.th[j],
                            ppm_position: plan.position(j, bit),
                            polarity: plan.polarity(j),
                        });
                    }
                }
            }
            Ok(vec![write_rows(dir, "fig2_pulses.csv", &rows)?])
        }
        "fig3" => {
            let mut rows = Vec::new();
            for scheme in Scheme::ALL {
                rows.extend(load_sweep(&opts.sim, &opts.topology, &opts.table, scheme, Mode::Implicit, 9, 5.0, opts.seed, 1)?);
            }
            Ok(vec![write_rows(dir, "fig3.csv", &rows)?])
        }
        "fig4" => {
            let rows: Vec<BerRow> = opts
                .table
                .iter()
                .filter(|(k, _)| k.k == 4)
                .map(|(k, e)| BerRow {
                    scheme: k.scheme,
                    k: k.k,
                    n_h: k.n_h,
                    n_s: k.n_s,
                    ber: e.ber,
                    ci_half_width: e.ci_half_width,
                })
                .collect();
            if rows.is_empty() {
                return Err(Error::invalid("BER table has no K = 4 slice"));
            }
            Ok(vec![write_rows(dir, "fig4.csv", &rows)?])
        }
        "fig5" => {
            let out = staged_nine(opts, 5.0, 20.0)?;
            let (path, _) = writer(dir, "fig5_trace.csv")?;
            let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
            out.metrics.write_trace_csv(BufWriter::new(f))?;
            Ok(vec![path])
        }
        "fig6" | "fig7" => {
            let (out, steps) = three_cluster_run(opts, 5.0, 1.5)?;
            if id == "fig6" {
                Ok(vec![write_rows(dir, "fig6.csv", &steps)?])
            } else {
                let (path, _) = writer(dir, "fig7_trace.csv")?;
                let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
                out.metrics.write_trace_csv(BufWriter::new(f))?;
                Ok(vec![path])
            }
        }
        "fig8" => {
            let mut rows = Vec::new();
            for mode in [Mode::Implicit, Mode::EnergyEb] {
                rows.extend(load_sweep(&opts.sim, &opts.topology, &opts.table, Scheme::PpmBpsk, mode, 9, 5.0, opts.seed, 1)?);
            }
            Ok(vec![write_rows(dir, "fig8.csv", &rows)?])
        }
        "table1" => {
            let tissues = TissueTable::bundled();
            let mut rows = Vec::new();
            for t in crate::tissue::Tissue::ALL {
                for d in [1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
                    rows.push(FreqRow {
                        tissue: t.name(),
                        distance_m: d,
                        max_frequency_mhz: max_frequency_for_budget(d, tissues.get(t), 100.0),
                    });
                }
            }
            Ok(vec![write_rows(dir, "table1.csv", &rows)?])
        }
        other => Err(Error::invalid(format!(
            "unknown figure id '{other}'; expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}
