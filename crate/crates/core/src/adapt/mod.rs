//! Frame-length / spreading-code adaptation.
//!
//! Exhaustive enumeration over the integer grid is the reference solver;
//! [`solve_relaxed`] and [`round_relaxed`] implement the continuous
//! geometric-programming relaxation and its rounding bounds.

mod energy;
mod enumerate;
mod gp;
mod instance;
mod oracle;
mod types;

pub use energy::{
    energy_metrics, max_safe_pressure, pulse_energy, static_capacitance, PiezoParams, EPSILON_0,
    INTENSITY_LIMIT,
};
pub use enumerate::{solve_energy_min, solve_explicit, solve_implicit, EnergyObjective};
pub use instance::{solve_instance, InstanceConstraints, InstanceMode, ProblemInstance, SolveReport, TableChoice};
pub use gp::{round_relaxed, solve_relaxed, RelaxedProblem, RelaxedSolution, RoundedSolution};
pub use oracle::{
    q_inverse, sinr_threshold_for_ber, ExplicitOracle, FeasibilityOracle, InterferenceReport, OwnSinr,
    SinrOracle, TableOracle,
};
pub use types::{rate, AdaptConstraints, FramePair};

pub use crate::phy::LinkConfig;
