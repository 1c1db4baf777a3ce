//! Tissue acoustic parameters shared by the wave solver and channel models.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../data/tissues.toml");

/// Acoustic properties of a homogeneous medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Speed of sound, m/s.
    pub c: f64,
    /// Density, kg/m³.
    pub rho: f64,
    /// Attenuation prefactor, Np·m⁻¹·MHz⁻ᵇ.
    pub a: f64,
    /// Attenuation frequency exponent.
    pub b: f64,
}

impl MediumParams {
    pub fn new(c: f64, rho: f64, a: f64, b: f64) -> Result<Self> {
        let m = MediumParams { c, rho, a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.rho > 0.0 && self.a >= 0.0 && self.b >= 0.0) {
            return Err(Error::invalid(format!(
                "medium requires c > 0, rho > 0, a >= 0, b >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Characteristic acoustic impedance ρc.
    pub fn impedance(&self) -> f64 {
        self.rho * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tissue {
    Bone,
    Muscle,
    Fat,
    Skin,
}

impl Tissue {
    pub const ALL: [Tissue; 4] = [Tissue::Bone, Tissue::Muscle, Tissue::Fat, Tissue::Skin];

    pub fn name(self) -> &'static str {
        match self {
            Tissue::Bone => "bone",
            Tissue::Muscle => "muscle",
            Tissue::Fat => "fat",
            Tissue::Skin => "skin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TissueTable {
    pub bone: MediumParams,
    pub muscle: MediumParams,
    pub fat: MediumParams,
    pub skin: MediumParams,
}

impl TissueTable {
    /// The table shipped in `data/tissues.toml`.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled tissue table is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: TissueTable = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<tissue table>".into(),
            message: e.to_string(),
        })?;
        for t in Tissue::ALL {
            table.get(t).validate().map_err(|e| Error::Config {
                location: t.name().to_string(),
                message: e.to_string(),
            })?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn get(&self, tissue: Tissue) -> &MediumParams {
        match tissue {
            Tissue::Bone => &self.bone,
            Tissue::Muscle => &self.muscle,
            Tissue::Fat => &self.fat,
            Tissue::Skin => &self.skin,
        }
    }

    pub fn max_speed(&self) -> f64 {
        Tissue::ALL.iter().map(|&t| self.get(t).c).fold(0.0, f64::max)
    }
}

impl Default for TissueTable {
    fn default() -> Self {
        Self::bundled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_parses() {
        let t = TissueTable::bundled();
        assert!(t.bone.c > t.muscle.c);
        assert_eq!(t.max_speed(), t.bone.c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BUNDLED.replace("[skin]", "[skin]\nz = 1.0");
        assert!(TissueTable::parse(&text).is_err());
    }

    #[test]
    fn negative_speed_rejected() {
        assert!(MediumParams::new(-1.0, 1000.0, 0.0, 1.0).is_err());
    }
}
