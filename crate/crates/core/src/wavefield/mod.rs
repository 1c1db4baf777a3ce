//! Two-dimensional acoustic wave propagation through a layered arm section.
//!
//! The solver integrates the coupled first-order acoustic equations
//! (continuity, force, state) with a second-order leapfrog scheme on a
//! staggered grid. Pressure lives at cell centres, particle velocities on
//! cell faces.

mod experiment;
mod geometry;
mod impulse;
mod solver;

pub use experiment::{arrival_clusters, ArmExperiment, ArmRun};
pub use geometry::{build_arm_geometry, ArmLayers, TissueGeometry, MIN_CELLS_PER_LAYER};
pub use impulse::{extract_impulse_response, series_delay_stats, ENERGY_FRACTION};
pub use solver::{
    first_arrival, gaussian_source, max_stable_dt, simulate_field, FieldRecord, FieldSnapshot,
    Point, SolverOptions,
};
