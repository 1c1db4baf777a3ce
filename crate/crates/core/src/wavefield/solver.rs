use crate::channel::attenuation_coefficient;
use crate::error::{Error, Result};

use super::TissueGeometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Width of the absorbing sponge along every edge, cells.
    pub sponge_cells: usize,
    /// One-way attenuation of a wave crossing the sponge, nepers.
    pub sponge_strength_np: f64,
    /// Frequency at which tissue absorption is evaluated, MHz.
    pub center_frequency_mhz: f64,
    /// Record a pressure snapshot every this many steps.
    pub snapshot_every: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            sponge_cells: 20,
            sponge_strength_np: 8.0,
            center_frequency_mhz: 0.25,
            snapshot_every: None,
        }
    }
}

/// Pressure field at one time step, row-major with `nx` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub step: usize,
    pub time: f64,
    pub nx: usize,
    pub ny: usize,
    pub pressure: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub dt: f64,
    /// Pressure at the sink cell, one sample per step.
    pub sink: Vec<f64>,
    pub snapshots: Vec<FieldSnapshot>,
}

impl FieldRecord {
    pub fn write_sink_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        for (n, v) in self.sink.iter().enumerate() {
            w.write_record([(n as f64 * self.dt).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Snapshots as long-form CSV: `t,x,y,value` with cell-centre coordinates.
    pub fn write_snapshots_csv<W: std::io::Write>(&self, dx: f64, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y", "value"])?;
        for s in &self.snapshots {
            for j in 0..s.ny {
                for i in 0..s.nx {
                    w.write_record([
                        s.time.to_string(),
                        ((i as f64 + 0.5) * dx).to_string(),
                        ((j as f64 + 0.5) * dx).to_string(),
                        s.pressure[j * s.nx + i].to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest stable time step, dx / (c_max·√2).
pub fn max_stable_dt(geom: &TissueGeometry) -> f64 {
    geom.dx / (geom.max_speed() * std::f64::consts::SQRT_2)
}

/// Gaussian pulse with standard deviation `width_steps` samples, peaking at
/// sample `4·width_steps` so that it starts from (numerically) zero.
pub fn gaussian_source(width_steps: f64, n_steps: usize) -> Vec<f64> {
    let n0 = 4.0 * width_steps;
    (0..n_steps)
        .map(|n| {
            let u = (n as f64 - n0) / width_steps;
            (-0.5 * u * u).exp()
        })
        .collect()
}

/// Time of the first lobe maximum: the first sample reaching `fraction` of
/// the global peak magnitude, followed forward while the magnitude keeps
/// growing. For a Gaussian pulse this is the pulse peak, which makes the
/// difference between sink and source arrivals insensitive to how the 2-D
/// propagation reshapes the pulse tail.
pub fn first_arrival(series: &[f64], dt: f64, fraction: f64) -> Option<f64> {
    let peak = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return None;
    }
    let mut k = series.iter().position(|v| v.abs() >= fraction * peak)?;
    while k + 1 < series.len() && series[k + 1].abs() > series[k].abs() && series[k + 1] * series[k] > 0.0 {
        k += 1;
    }
    Some(k as f64 * dt)
}

fn sponge_profile(n: usize, width: usize, sigma_max: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let from_edge = i.min(n - 1 - i);
            if from_edge >= width {
                0.0
            } else {
                let u = (width - from_edge) as f64 / width as f64;
                sigma_max * u * u
            }
        })
        .collect()
}

/// Run the leapfrog solver and record pressure at `sink`.
///
/// `source_waveform[n]` is added to the pressure at the source cell at step
/// `n` (a soft source); samples beyond its length are treated as zero.
pub fn simulate_field(
    geom: &TissueGeometry,
    source: Point,
    sink: Point,
    source_waveform: &[f64],
    dt: f64,
    n_steps: usize,
    opts: &SolverOptions,
) -> Result<FieldRecord> {
    let max_dt = max_stable_dt(geom);
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, max_dt });
    }
    let (si, sj) = geom
        .cell_of(source.x, source.y)
        .ok_or_else(|| Error::invalid("source lies outside the domain"))?;
    let (ri, rj) = geom
        .cell_of(sink.x, sink.y)
        .ok_or_else(|| Error::invalid("sink lies outside the domain"))?;

    let (nx, ny, dx) = (geom.nx, geom.ny, geom.dx);
    let idx = |i: usize, j: usize| j * nx + i;

    // Per-cell material terms.
    let mut rho = vec![0.0; nx * ny];
    let mut bulk = vec![0.0; nx * ny];
    let mut loss = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let m = geom.medium(i, j);
            rho[idx(i, j)] = m.rho;
            bulk[idx(i, j)] = m.rho * m.c * m.c;
            // amplitude decay rate (1/s) of a wave travelling at c
            loss[idx(i, j)] = attenuation_coefficient(opts.center_frequency_mhz, m) * m.c;
        }
    }
    let width = opts.sponge_cells.min(nx / 2).min(ny / 2);
    let sigma_max = if width > 0 {
        // quadratic profile: total one-way decay = sigma_max * (dx/c) * width / 3
        3.0 * opts.sponge_strength_np * geom.max_speed() / (width as f64 * dx)
    } else {
        0.0
    };
    let sx = sponge_profile(nx, width, sigma_max);
    let sy = sponge_profile(ny, width, sigma_max);
    let damp: Vec<f64> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            (-(loss[k] + sx[i] + sy[j]) * dt).exp()
        })
        .collect();

    let mut p = vec![0.0; nx * ny];
    // vx on vertical faces: (nx+1) x ny; vy on horizontal faces: nx x (ny+1)
    let mut vx = vec![0.0; (nx + 1) * ny];
    let mut vy = vec![0.0; nx * (ny + 1)];
    let cx = dt / dx;

    let mut sink_series = Vec::with_capacity(n_steps);
    let mut snapshots = Vec::new();

    for n in 0..n_steps {
        // force equation
        for j in 0..ny {
            for i in 1..nx {
                let (a, b) = (idx(i - 1, j), idx(i, j));
                let rf = 0.5 * (rho[a] + rho[b]);
                let f = j * (nx + 1) + i;
                vx[f] = (vx[f] - cx / rf * (p[b] - p[a])) * (0.5 * (damp[a] + damp[b]));
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let (a, b) = (idx(i, j - 1), idx(i, j));
                let rf = 0.5 * (rho[a] + rho[b]);
                let f = j * nx + i;
                vy[f] = (vy[f] - cx / rf * (p[b] - p[a])) * (0.5 * (damp[a] + damp[b]));
            }
        }
        // continuity + state
        for j in 0..ny {
            for i in 0..nx {
                let k = idx(i, j);
                let div = vx[j * (nx + 1) + i + 1] - vx[j * (nx + 1) + i] + vy[(j + 1) * nx + i]
                    - vy[j * nx + i];
                p[k] = (p[k] - cx * bulk[k] * div) * damp[k];
            }
        }
        if let Some(&s) = source_waveform.get(n) {
            p[idx(si, sj)] += s;
        }
        sink_series.push(p[idx(ri, rj)]);
        if let Some(every) = opts.snapshot_every {
            if every > 0 && n % every == 0 {
                snapshots.push(FieldSnapshot {
                    step: n,
                    time: n as f64 * dt,
                    nx,
                    ny,
                    pressure: p.clone(),
                });
            }
        }
    }

    Ok(FieldRecord {
        dt,
        sink: sink_series,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tissue::Tissue;
    use crate::wavefield::build_arm_geometry;

    #[test]
    fn cfl_violation_reports_bound() {
        let g = build_arm_geometry(0.0005).unwrap();
        let max = max_stable_dt(&g);
        let err = simulate_field(&g, Point::new(0.05, 0.02), Point::new(0.1, 0.02), &[1.0], max * 1.01, 10, &SolverOptions::default())
            .unwrap_err();
        match err {
            Error::Stability { max_dt, .. } => assert!((max_dt - max).abs() < 1e-20),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn zero_source_gives_zero_series() {
        let g = build_arm_geometry(0.0005).unwrap();
        let dt = max_stable_dt(&g) * 0.9;
        let rec = simulate_field(&g, Point::new(0.05, 0.02), Point::new(0.1, 0.02), &vec![0.0; 50], dt, 50, &SolverOptions::default())
            .unwrap();
        assert_eq!(rec.sink.len(), 50);
        assert!(rec.sink.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn outside_points_rejected() {
        let g = build_arm_geometry(0.0005).unwrap();
        let dt = max_stable_dt(&g) * 0.9;
        assert!(simulate_field(&g, Point::new(-0.01, 0.02), Point::new(0.1, 0.02), &[1.0], dt, 5, &SolverOptions::default()).is_err());
    }

    #[test]
    fn snapshots_recorded_at_requested_period() {
        let g = build_arm_geometry(0.0005).unwrap().homogeneous(Tissue::Muscle);
        let dt = max_stable_dt(&g) * 0.9;
        let opts = SolverOptions {
            snapshot_every: Some(10),
            ..SolverOptions::default()
        };
        let rec = simulate_field(&g, Point::new(0.05, 0.05), Point::new(0.07, 0.05), &gaussian_source(3.0, 40), dt, 35, &opts).unwrap();
        assert_eq!(rec.snapshots.len(), 4);
        assert!(rec.snapshots.iter().all(|s| s.pressure.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn first_arrival_threshold() {
        let s = [0.0, 0.01, 0.2, 1.0, -0.5];
        assert_eq!(first_arrival(&s, 0.5, 0.1), Some(1.5));
        assert_eq!(first_arrival(&[0.0; 4], 0.5, 0.1), None);
    }
}
