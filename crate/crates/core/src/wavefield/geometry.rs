use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tissue::{MediumParams, Tissue, TissueTable};

/// Fewest grid cells allowed across any tissue, counting both mirrored
/// half-sections (the bone sits on the centre line and is one band).
pub const MIN_CELLS_PER_LAYER: usize = 8;

/// Half-section thicknesses of the symmetric layered arm, metres, listed
/// from the centre line outwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmLayers {
    pub bone: f64,
    pub muscle: f64,
    pub fat: f64,
    pub skin: f64,
}

impl Default for ArmLayers {
    fn default() -> Self {
        ArmLayers {
            bone: 0.018,
            muscle: 0.022,
            fat: 0.007,
            skin: 0.003,
        }
    }
}

impl ArmLayers {
    fn ordered(&self) -> [(Tissue, f64); 4] {
        [
            (Tissue::Bone, self.bone),
            (Tissue::Muscle, self.muscle),
            (Tissue::Fat, self.fat),
            (Tissue::Skin, self.skin),
        ]
    }

    pub fn total(&self) -> f64 {
        self.bone + self.muscle + self.fat + self.skin
    }
}

/// Rectangular grid with one tissue label per cell.
///
/// `x` runs along the 20 cm length of the arm, `y` across it; row `j = 0`
/// is the top edge.
#[derive(Debug, Clone, PartialEq)]
pub struct TissueGeometry {
    pub width_m: f64,
    pub height_m: f64,
    pub dx: f64,
    pub nx: usize,
    pub ny: usize,
    pub layers: ArmLayers,
    pub tissues: TissueTable,
    labels: Vec<Tissue>,
}

impl TissueGeometry {
    pub fn label(&self, i: usize, j: usize) -> Tissue {
        self.labels[j * self.nx + i]
    }

    pub fn medium(&self, i: usize, j: usize) -> &MediumParams {
        self.tissues.get(self.label(i, j))
    }

    pub fn labels(&self) -> &[Tissue] {
        &self.labels
    }

    /// Number of cells spanned by one half-section of `tissue`.
    pub fn layer_cells(&self, tissue: Tissue) -> f64 {
        let w = self.layers.ordered().iter().find(|(t, _)| *t == tissue).unwrap().1;
        w / self.dx
    }

    pub fn max_speed(&self) -> f64 {
        self.tissues.max_speed()
    }

    /// Cell containing the point, if it lies inside the domain.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(0.0..self.width_m).contains(&x) || !(0.0..self.height_m).contains(&y) {
            return None;
        }
        let i = ((x / self.dx) as usize).min(self.nx - 1);
        let j = ((y / self.dx) as usize).min(self.ny - 1);
        Some((i, j))
    }

    /// Replace every label with `tissue`.
    pub fn homogeneous(mut self, tissue: Tissue) -> Self {
        self.labels.iter_mut().for_each(|l| *l = tissue);
        self
    }

    pub fn with_tissues(mut self, tissues: TissueTable) -> Self {
        self.tissues = tissues;
        self
    }

    /// Vertical extent `[top, bottom)` of the upper muscle band, metres.
    pub fn upper_muscle_band(&self) -> (f64, f64) {
        let mid = self.height_m / 2.0;
        (mid - self.layers.bone - self.layers.muscle, mid - self.layers.bone)
    }
}

fn cells(length: f64, dx: f64) -> Option<usize> {
    let n = length / dx;
    let r = n.round();
    ((n - r).abs() < 1e-6 * r.max(1.0) && r >= 1.0).then_some(r as usize)
}

/// Layered 20 cm × 10 cm arm section at grid spacing `dx`.
pub fn build_arm_geometry(dx: f64) -> Result<TissueGeometry> {
    build_geometry(0.20, 0.10, dx, ArmLayers::default(), TissueTable::bundled())
}

pub fn build_geometry(
    width_m: f64,
    height_m: f64,
    dx: f64,
    layers: ArmLayers,
    tissues: TissueTable,
) -> Result<TissueGeometry> {
    if !(dx > 0.0) {
        return Err(Error::invalid("grid spacing must be positive"));
    }
    if layers.total() > height_m / 2.0 + 1e-12 {
        return Err(Error::invalid(format!(
            "layer half-sections sum to {} m, more than half the height {} m",
            layers.total(),
            height_m
        )));
    }
    let thinnest = layers
        .ordered()
        .into_iter()
        .map(|(tissue, w)| (tissue, 2.0 * w / dx))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((tissue, c)) = thinnest.filter(|(_, c)| c + 1e-9 < MIN_CELLS_PER_LAYER as f64) {
        return Err(Error::Resolution {
            layer: tissue.name(),
            dx,
            cells: c,
            required: MIN_CELLS_PER_LAYER,
        });
    }
    let (nx, ny) = match (cells(width_m, dx), cells(height_m, dx)) {
        (Some(nx), Some(ny)) => (nx, ny),
        _ => {
            return Err(Error::invalid(format!(
                "dx = {dx} m does not divide the {width_m} m x {height_m} m domain"
            )))
        }
    };

    let mid = height_m / 2.0;
    let bounds: Vec<(Tissue, f64)> = layers
        .ordered()
        .iter()
        .scan(0.0, |acc, &(t, w)| {
            *acc += w;
            Some((t, *acc))
        })
        .collect();
    let mut labels = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let off = ((j as f64 + 0.5) * dx - mid).abs();
        let tissue = bounds
            .iter()
            .find(|(_, b)| off < *b)
            .map(|(t, _)| *t)
            .unwrap_or(Tissue::Skin);
        labels.extend(std::iter::repeat(tissue).take(nx));
    }
    Ok(TissueGeometry {
        width_m,
        height_m,
        dx,
        nx,
        ny,
        layers,
        tissues,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_millimetre_grid() {
        let g = build_arm_geometry(0.0005).unwrap();
        assert_eq!((g.nx, g.ny), (400, 200));
        assert_eq!(g.labels().len(), 400 * 200);
        assert_eq!(g.label(0, 100), Tissue::Bone);
        assert_eq!(g.label(0, 0), Tissue::Skin);
        assert_eq!(g.label(399, 199), Tissue::Skin);
        assert_eq!(g.label(10, 30), Tissue::Muscle);
        // layer band widths in cells, counted on one column
        let count = |t| (0..g.ny).filter(|&j| g.label(0, j) == t).count();
        assert_eq!(count(Tissue::Bone), 72);
        assert_eq!(count(Tissue::Muscle), 88);
        assert_eq!(count(Tissue::Fat), 28);
        assert_eq!(count(Tissue::Skin), 12);
    }

    #[test]
    fn coarse_grid_names_skin() {
        match build_arm_geometry(0.01) {
            Err(Error::Resolution { layer, .. }) => assert_eq!(layer, "skin"),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn quarter_millimetre_skin_cells() {
        let g = build_arm_geometry(0.00025).unwrap();
        assert!((g.layer_cells(Tissue::Skin) - 12.0).abs() < 1e-9);
    }

    #[test]
    fn non_dividing_spacing_rejected() {
        assert!(build_arm_geometry(0.00033).is_err());
    }
}
