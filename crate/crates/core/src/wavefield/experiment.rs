use crate::channel::{ChannelImpulseResponse, DelayStats};
use crate::error::Result;

use super::{
    build_arm_geometry, extract_impulse_response, gaussian_source, max_stable_dt,
    series_delay_stats, simulate_field, FieldRecord, Point, SolverOptions, TissueGeometry,
};

/// The arm-section impulse-response run: a short pulse released at the
/// upper-left corner of the muscle band and recorded at the opposite end of
/// the same band.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmExperiment {
    pub dx: f64,
    /// Time step as a fraction of the CFL limit.
    pub courant: f64,
    /// Simulated duration, s.
    pub duration: f64,
    /// Standard deviation of the Gaussian source, in time steps.
    pub source_width_steps: f64,
    /// Distance of source and sink from the muscle band's outer edge and
    /// from the sponge, metres.
    pub inset: f64,
    pub options: SolverOptions,
}

impl Default for ArmExperiment {
    fn default() -> Self {
        ArmExperiment {
            dx: 0.0005,
            courant: 0.95,
            duration: 250e-6,
            source_width_steps: 3.0,
            inset: 0.004,
            options: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArmRun {
    pub geometry: TissueGeometry,
    pub source: Point,
    pub sink: Point,
    pub waveform: Vec<f64>,
    pub record: FieldRecord,
}

impl ArmExperiment {
    pub fn positions(&self, geom: &TissueGeometry) -> (Point, Point) {
        let (top, _) = geom.upper_muscle_band();
        let edge = self.options.sponge_cells as f64 * geom.dx + self.inset;
        let y = top + self.inset;
        (Point::new(edge, y), Point::new(geom.width_m - edge, y))
    }

    pub fn run(&self) -> Result<ArmRun> {
        let geometry = build_arm_geometry(self.dx)?;
        self.run_on(geometry)
    }

    pub fn run_on(&self, geometry: TissueGeometry) -> Result<ArmRun> {
        let dt = self.courant * max_stable_dt(&geometry);
        let n_steps = (self.duration / dt).ceil() as usize;
        let waveform = gaussian_source(self.source_width_steps, n_steps);
        let (source, sink) = self.positions(&geometry);
        let record = simulate_field(&geometry, source, sink, &waveform, dt, n_steps, &self.options)?;
        Ok(ArmRun {
            geometry,
            source,
            sink,
            waveform,
            record,
        })
    }
}

impl ArmRun {
    pub fn impulse_response(&self) -> Result<ChannelImpulseResponse> {
        extract_impulse_response(&self.record.sink, self.record.dt)
    }

    pub fn raw_delay_stats(&self) -> Result<DelayStats> {
        series_delay_stats(&self.record.sink, self.record.dt)
    }
}

/// Count groups of samples whose magnitude exceeds `fraction` of the peak,
/// merging groups separated by less than `min_gap` seconds.
pub fn arrival_clusters(series: &[f64], dt: f64, fraction: f64, min_gap: f64) -> Vec<(f64, f64)> {
    let peak = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    if peak == 0.0 {
        return clusters;
    }
    for (n, v) in series.iter().enumerate() {
        if v.abs() < fraction * peak {
            continue;
        }
        let t = n as f64 * dt;
        match clusters.last_mut() {
            Some((_, end)) if t - *end < min_gap => *end = t,
            _ => clusters.push((t, t)),
        }
    }
    clusters
}
