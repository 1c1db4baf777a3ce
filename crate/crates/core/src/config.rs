//! Scenario files: one TOML document configuring every module.
//!
//! Unknown keys are rejected everywhere. [`validate_config`] parses a file
//! and runs the cross-field checks, reporting every violation it finds.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adapt::{pulse_energy, sinr_threshold_for_ber, AdaptConstraints, PiezoParams};
use crate::error::{Error, Result};
use crate::netsim::{generate_topology, Activation, MacConfig, Mode, SimConfig, SinrModel, TopologyConfig};
use crate::phy::{BerTable, PhyParams, Scheme};
use crate::tissue::TissueTable;
use crate::wavefield::{build_arm_geometry, ArmExperiment, SolverOptions};

/// The scenario shipped with the crate.
pub const DEFAULT_SCENARIO: &str = include_str!("../data/scenario.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Tissue parameter file; the bundled table when absent.
    pub tissue_table: Option<PathBuf>,
    /// BER table CSV; the bundled table when absent.
    pub ber_table: Option<PathBuf>,
    pub simulation: SimulationSection,
    pub topology: TopologyConfig,
    pub phy: PhyParams,
    pub constraints: ConstraintsSection,
    pub mac: MacConfig,
    pub energy: PiezoParams,
    pub wave: WaveSection,
    pub output: OutputSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            tissue_table: None,
            ber_table: None,
            simulation: SimulationSection::default(),
            topology: TopologyConfig::default(),
            phy: PhyParams::default(),
            constraints: ConstraintsSection::default(),
            mac: MacConfig::default(),
            energy: PiezoParams::default(),
            wave: WaveSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub scheme: Scheme,
    pub mode: Mode,
    pub duration: f64,
    pub window: f64,
    pub activation: Activation,
    pub sinr_model: Option<SinrModel>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimulationSection {
            scheme: d.scheme,
            mode: d.mode,
            duration: d.duration,
            window: d.window,
            activation: d.activation,
            sinr_model: None,
        }
    }
}

/// Adaptation constraints; the chip time comes from `[phy]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstraintsSection {
    pub r_min: f64,
    pub ber_max: f64,
    /// SINR threshold for closed-form decisions; derived from `ber_max`
    /// when absent.
    pub sinr_min: Option<f64>,
    pub n_h_max: u32,
    pub n_s_max: u32,
}

impl Default for ConstraintsSection {
    fn default() -> Self {
        let d = AdaptConstraints::default();
        ConstraintsSection {
            r_min: d.r_min,
            ber_max: d.ber_max,
            sinr_min: None,
            n_h_max: d.n_h_max,
            n_s_max: d.n_s_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSection {
    pub dx: f64,
    /// Time step as a fraction of the stability limit.
    pub courant: f64,
    pub duration: f64,
    pub source_width_steps: f64,
    pub inset: f64,
    pub sponge_cells: usize,
    pub sponge_strength_np: f64,
    pub center_frequency_mhz: f64,
    pub snapshot_every: Option<usize>,
}

impl Default for WaveSection {
    fn default() -> Self {
        let e = ArmExperiment::default();
        WaveSection {
            dx: e.dx,
            courant: e.courant,
            duration: e.duration,
            source_width_steps: e.source_width_steps,
            inset: e.inset,
            sponge_cells: e.options.sponge_cells,
            sponge_strength_np: e.options.sponge_strength_np,
            center_frequency_mhz: e.options.center_frequency_mhz,
            snapshot_every: e.options.snapshot_every,
        }
    }
}

impl WaveSection {
    pub fn experiment(&self) -> ArmExperiment {
        ArmExperiment {
            dx: self.dx,
            courant: self.courant,
            duration: self.duration,
            source_width_steps: self.source_width_steps,
            inset: self.inset,
            options: SolverOptions {
                sponge_cells: self.sponge_cells,
                sponge_strength_np: self.sponge_strength_np,
                center_frequency_mhz: self.center_frequency_mhz,
                snapshot_every: self.snapshot_every,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also write the full event log.
    pub events: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            events: false,
        }
    }
}

/// One violation found while validating a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_SCENARIO, Path::new("<bundled scenario>")).expect("bundled scenario parses")
    }

    /// Relative paths in the scenario are resolved against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.tissue_table, &mut self.ber_table].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn constraints(&self) -> AdaptConstraints {
        let c = &self.constraints;
        AdaptConstraints {
            r_min: c.r_min,
            sinr_min: c.sinr_min.unwrap_or_else(|| sinr_threshold_for_ber(c.ber_max)),
            ber_max: c.ber_max,
            n_h_max: c.n_h_max,
            n_s_max: c.n_s_max,
            tc: self.phy.tc,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.simulation;
        SimConfig {
            scheme: s.scheme,
            mode: s.mode,
            constraints: self.constraints(),
            mac: self.mac.clone(),
            piezo: self.energy.clone(),
            activation: s.activation.clone(),
            duration: s.duration,
            window: s.window,
            sinr_model: s.sinr_model,
        }
    }

    pub fn ber_table(&self) -> Result<BerTable> {
        match &self.ber_table {
            Some(p) => BerTable::load(p),
            None => Ok(BerTable::bundled()),
        }
    }

    pub fn tissues(&self) -> Result<TissueTable> {
        match &self.tissue_table {
            Some(p) => TissueTable::load(p),
            None => Ok(TissueTable::bundled()),
        }
    }

    /// Every cross-field rule; an empty list means the scenario is usable.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut add = |location: &str, e: Error| {
            let (location, message) = match e {
                Error::Config { location, message } => (location, message),
                other => (location.to_string(), other.to_string()),
            };
            out.push(Diagnostic { location, message });
        };
        if self.phy.delta >= self.phy.tc {
            add(
                "phy.delta",
                Error::invalid(format!(
                    "delta < tc is required, got delta = {} s and tc = {} s",
                    self.phy.delta, self.phy.tc
                )),
            );
        } else if let Err(e) = self.phy.validate() {
            add("phy", e);
        }
        if let Err(e) = self.constraints().validate() {
            add("constraints", e);
        }
        if let Err(e) = self.mac.validate() {
            add("mac", e);
        }
        if let Err(e) = pulse_energy(&self.energy) {
            add("energy", e);
        }
        let w = &self.wave;
        if !(w.courant > 0.0 && w.courant <= 1.0) {
            add(
                "wave.courant",
                Error::invalid(format!("CFL condition needs 0 < courant <= 1, got {}", w.courant)),
            );
        }
        if !(w.duration > 0.0) {
            add("wave.duration", Error::invalid("must be positive"));
        }
        if w.dx > 0.0 {
            if let Err(e) = build_arm_geometry(w.dx) {
                add("wave.dx", e);
            }
        } else {
            add("wave.dx", Error::invalid("must be positive"));
        }
        if let Err(e) = self.tissues() {
            add("tissue_table", e);
        }
        match (generate_topology(&self.topology, self.seed), self.ber_table()) {
            (Err(e), _) => add("topology", e),
            (_, Err(e)) => add("ber_table", e),
            (Ok(topo), Ok(table)) => {
                if let Err(e) = self.sim_config().validate(&topo, &table) {
                    add("simulation", e);
                }
            }
        }
        out
    }
}

/// Parse and check the scenario at `path`.
pub fn validate_config(path: &Path) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(dir) = path.parent() {
        cfg.resolve_paths(dir);
    }
    let diags = cfg.diagnostics();
    if diags.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config {
            location: path.display().to_string(),
            message: diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "),
        })
    }
}
