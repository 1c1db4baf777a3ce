use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    energy_metrics, pulse_energy, round_relaxed, sinr_threshold_for_ber, solve_energy_min, solve_implicit,
    solve_relaxed, AdaptConstraints, EnergyObjective, ExplicitOracle, FeasibilityOracle, FramePair,
    InterferenceReport, OwnSinr, PiezoParams, RelaxedProblem, TableOracle,
};
use crate::error::{Error, Result};
use crate::phy::{sinr, BerTable, LinkConfig, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    /// Interferers assumed to switch to the candidate pair.
    Implicit,
    /// Interferers keep their configured pairs; reports bound `N_h`.
    Explicit,
    EnergyEb,
    EnergyEs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableChoice {
    pub scheme: Scheme,
    pub k: u32,
}

/// Constraints without the SINR threshold, which may be derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConstraints {
    pub r_min: f64,
    pub ber_max: f64,
    #[serde(default)]
    pub sinr_min: Option<f64>,
    pub n_h_max: u32,
    pub n_s_max: u32,
    pub tc: f64,
}

/// A single adaptation problem as seen by the receiver of `links[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub mode: InstanceMode,
    pub constraints: InstanceConstraints,
    /// Background noise power at the receiver, W·s.
    pub eta: f64,
    pub sigma2: f64,
    /// Own link first, then the interferers.
    pub links: Vec<LinkConfig>,
    #[serde(default)]
    pub reports: Vec<InterferenceReport>,
    /// Look feasibility up in a BER table instead of the closed form.
    #[serde(default)]
    pub table: Option<TableChoice>,
    #[serde(default = "default_threshold")]
    pub rounding_threshold: f64,
    #[serde(default)]
    pub energy: Option<PiezoParams>,
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub pair: FramePair,
    pub rate: f64,
    pub e_b: Option<f64>,
    pub e_s: Option<f64>,
    /// Relaxation bounds on the inverse rate, when rounding succeeded.
    pub bounds: Option<(f64, f64)>,
}

impl ProblemInstance {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn adapt_constraints(&self) -> AdaptConstraints {
        let c = &self.constraints;
        AdaptConstraints {
            r_min: c.r_min,
            sinr_min: c.sinr_min.unwrap_or_else(|| sinr_threshold_for_ber(c.ber_max)),
            ber_max: c.ber_max,
            n_h_max: c.n_h_max,
            n_s_max: c.n_s_max,
            tc: c.tc,
        }
    }

    fn own(&self) -> Result<&LinkConfig> {
        self.links
            .first()
            .ok_or_else(|| Error::invalid("instance needs at least the own link"))
    }

    /// Own-constraint terms. In the implicit view every interferer shares
    /// the candidate frame length, so its interference adds to the noise.
    fn own_sinr(&self) -> Result<OwnSinr> {
        let me = self.own()?;
        let tc = self.constraints.tc;
        let g = |l: &LinkConfig| l.gains.first().copied().unwrap_or(0.0);
        let alpha = me.power * g(me) * tc;
        let others = self.links.iter().skip(1);
        Ok(match self.mode {
            InstanceMode::Explicit => OwnSinr {
                alpha,
                beta_sum: others.map(|l| self.sigma2 * tc * l.power * g(l) / l.n_h as f64).sum(),
                eta: self.eta,
            },
            _ => OwnSinr {
                alpha,
                beta_sum: 0.0,
                eta: self.eta + others.map(|l| self.sigma2 * tc * l.power * g(l)).sum::<f64>(),
            },
        })
    }

    /// Closed-form feasibility of `pair` for the own link.
    fn closed_form(&self, pair: FramePair, sinr_min: f64) -> bool {
        let mut links = self.links.clone();
        let n = links.len();
        for (i, l) in links.iter_mut().enumerate() {
            if i == 0 || self.mode != InstanceMode::Explicit {
                l.n_h = pair.n_h;
                l.n_s = pair.n_s;
            }
            l.gains.resize(n, 0.0);
        }
        sinr(0, &links, self.eta, self.sigma2, self.constraints.tc).is_ok_and(|v| v >= sinr_min)
    }
}

/// Solve `inst`, consulting `table` when the instance asks for it.
pub fn solve_instance(inst: &ProblemInstance, table: Option<&BerTable>) -> Result<SolveReport> {
    let c = inst.adapt_constraints();
    c.validate()?;
    inst.own()?;
    let explicit = ExplicitOracle::new(inst.own_sinr()?, &inst.reports, c.sinr_min)?;
    let table_oracle = match inst.table {
        Some(t) => {
            let table = table.ok_or_else(|| Error::invalid("instance asks for a BER table but none was given"))?;
            Some(TableOracle::new(table, t.scheme, t.k, c.ber_max, c.n_h_max, c.n_s_max)?)
        }
        None => None,
    };
    let oracle = |p: FramePair| {
        let quality = match &table_oracle {
            Some(t) => t.feasible(p),
            None => inst.closed_form(p, c.sinr_min),
        };
        quality && p.n_h as f64 >= explicit.n_h_bound * (1.0 - 1e-12)
    };
    let pair = match inst.mode {
        InstanceMode::Implicit | InstanceMode::Explicit => solve_implicit(&c, &oracle)?,
        InstanceMode::EnergyEb => solve_energy_min(EnergyObjective::Eb, &c, &oracle)?,
        InstanceMode::EnergyEs => solve_energy_min(EnergyObjective::Es, &c, &oracle)?,
    };
    let (e_b, e_s) = match &inst.energy {
        Some(p) => {
            let (b, s) = energy_metrics(pulse_energy(p)?, pair.n_h, pair.n_s, c.tc);
            (Some(b), Some(s))
        }
        None => (None, None),
    };
    let bounds = if table_oracle.is_none() {
        let problem = RelaxedProblem {
            own: explicit.own,
            n_h_lower: explicit.n_h_bound,
        };
        solve_relaxed(&c, &problem)
            .and_then(|s| round_relaxed(&s, inst.rounding_threshold, &c, &oracle))
            .ok()
            .map(|r| (r.lower, r.upper))
    } else {
        None
    };
    Ok(SolveReport {
        pair,
        rate: pair.rate(c.tc),
        e_b,
        e_s,
        bounds,
    })
}

impl SolveReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N_h", "N_s", "rate_bps", "E_b_J", "E_s_W", "L_s_per_bit", "U_s_per_bit"])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            self.pair.n_h.to_string(),
            self.pair.n_s.to_string(),
            self.rate.to_string(),
            opt(self.e_b),
            opt(self.e_s),
            opt(self.bounds.map(|b| b.0)),
            opt(self.bounds.map(|b| b.1)),
        ])?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k0() -> ProblemInstance {
        toml::from_str(
            r#"
            mode = "implicit"
            eta = 1.0e-9
            sigma2 = 1.0
            [constraints]
            r_min = 1000.0
            ber_max = 1.0e-6
            n_h_max = 15
            n_s_max = 20
            tc = 0.5e-6
            [[links]]
            id = 0
            n_h = 15
            n_s = 20
            power = 1.0
            gains = [1.0]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn k0_instance_gives_full_rate() {
        let r = solve_instance(&k0(), None).unwrap();
        assert_eq!(r.pair, FramePair::new(1, 1));
        assert_eq!(r.rate, 2.0e6);
        let (l, u) = r.bounds.unwrap();
        assert!(l <= 0.5e-6 * (1.0 + 1e-9) && u == 0.5e-6);
    }

    #[test]
    fn interferers_slow_the_link_down() {
        let mut inst = k0();
        inst.eta = 1e-6;
        inst.links[0].gains = vec![1.0, 0.0];
        inst.links.push(LinkConfig { id: 1, n_h: 4, n_s: 4, power: 1.0, gains: vec![1.0, 1.0] });
        let r = solve_instance(&inst, None).unwrap();
        assert!(r.rate < 2.0e6);
        assert!(inst.closed_form(r.pair, inst.adapt_constraints().sinr_min));
    }

    #[test]
    fn table_needs_table() {
        let mut inst = k0();
        inst.table = Some(TableChoice { scheme: Scheme::PpmBpsk, k: 0 });
        assert!(solve_instance(&inst, None).is_err());
    }
}
