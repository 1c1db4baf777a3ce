use serde::{Deserialize, Serialize};

use super::{AdaptConstraints, ExplicitOracle, FeasibilityOracle, FramePair, InterferenceReport, OwnSinr};
use crate::error::{Error, Result};

/// Best feasible pair under a strict "better than" order; deterministic
/// regardless of evaluation order because the order is total on the grid.
fn best_by<O, B>(c: &AdaptConstraints, oracle: &O, better: B) -> Result<FramePair>
where
    O: FeasibilityOracle + ?Sized,
    B: Fn(FramePair, FramePair) -> bool,
{
    c.validate()?;
    let mut best: Option<FramePair> = None;
    for p in c.grid() {
        if !c.meets_rate(p) || !oracle.feasible(p) {
            continue;
        }
        if best.map_or(true, |b| better(p, b)) {
            best = Some(p);
        }
    }
    best.ok_or(Error::Infeasible)
}

/// Rate order: fewer chips per bit, then smaller `N_s`, then smaller `N_h`.
fn faster(a: FramePair, b: FramePair) -> bool {
    (a.chips_per_bit(), a.n_s, a.n_h) < (b.chips_per_bit(), b.n_s, b.n_h)
}

/// Rate-maximising pair by exhaustive enumeration. Interferers are folded
/// into `oracle` (typically assumed to use the candidate pair too).
pub fn solve_implicit<O: FeasibilityOracle + ?Sized>(c: &AdaptConstraints, oracle: &O) -> Result<FramePair> {
    best_by(c, oracle, faster)
}

/// Rate-maximising pair subject to the own SINR constraint and the
/// frame-length bounds implied by every interference report.
pub fn solve_explicit(c: &AdaptConstraints, own: &OwnSinr, reports: &[InterferenceReport]) -> Result<FramePair> {
    let oracle = ExplicitOracle::new(*own, reports, c.sinr_min)?;
    solve_implicit(c, &oracle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyObjective {
    /// Energy per bit, `E_p·N_s`.
    Eb,
    /// Energy per second, `E_p/(Tc·N_h)`.
    Es,
}

/// Energy-minimising pair. Ties go to the higher rate, then to the lower
/// value of the other energy metric.
pub fn solve_energy_min<O: FeasibilityOracle + ?Sized>(
    objective: EnergyObjective,
    c: &AdaptConstraints,
    oracle: &O,
) -> Result<FramePair> {
    match objective {
        EnergyObjective::Eb => best_by(c, oracle, |a, b| {
            (a.n_s, a.chips_per_bit(), std::cmp::Reverse(a.n_h)) < (b.n_s, b.chips_per_bit(), std::cmp::Reverse(b.n_h))
        }),
        EnergyObjective::Es => best_by(c, oracle, |a, b| {
            (std::cmp::Reverse(a.n_h), a.chips_per_bit(), a.n_s) < (std::cmp::Reverse(b.n_h), b.chips_per_bit(), b.n_s)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: u32) -> AdaptConstraints {
        AdaptConstraints {
            r_min: 0.0,
            n_h_max: n,
            n_s_max: n,
            ..AdaptConstraints::default()
        }
    }

    #[test]
    fn unconstrained_is_one_one() {
        let p = solve_implicit(&AdaptConstraints::default(), &|_: FramePair| true).unwrap();
        assert_eq!(p, FramePair::new(1, 1));
        assert_eq!(p.rate(0.5e-6), 2.0e6);
    }

    #[test]
    fn synthetic_sum_oracle_tie_break() {
        let p = solve_implicit(&small(3), &|p: FramePair| p.n_h + p.n_s >= 4).unwrap();
        assert_eq!(p, FramePair::new(3, 1));
    }

    #[test]
    fn rate_floor_makes_infeasible() {
        let c = AdaptConstraints {
            r_min: 1.5e6,
            ..AdaptConstraints::default()
        };
        assert!(matches!(
            solve_implicit(&c, &|p: FramePair| p.n_s >= 2),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn explicit_report_forces_frame_length() {
        let c = AdaptConstraints {
            sinr_min: 4.0,
            ..AdaptConstraints::default()
        };
        // own: alpha·h·s/(eta + h·beta) >= 4 needs s >= 2 for any h (beta = 0.4, alpha = 1)
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.4, eta: 0.1 };
        // bound = 6.5/(10/4 - 0.1 - 1.4) = 6.5 -> N_h >= 7
        let r = InterferenceReport { link: 1, gamma: 10.0, delta: 1.4, epsilon: 6.5 };
        assert_eq!(solve_explicit(&c, &own, &[r]).unwrap(), FramePair::new(7, 2));
    }

    #[test]
    fn explicit_without_reports_matches_implicit() {
        let c = AdaptConstraints::default();
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 0.5 };
        let a = solve_explicit(&c, &own, &[]).unwrap();
        let b = solve_implicit(&c, &|p: FramePair| own.feasible(p, c.sinr_min)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn intolerant_report_is_infeasible() {
        let c = AdaptConstraints::default();
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 0.01 };
        let r = InterferenceReport { link: 0, gamma: 1.0, delta: 1.0, epsilon: 1.0 };
        assert!(matches!(solve_explicit(&c, &own, &[r]), Err(Error::Infeasible)));
    }

    #[test]
    fn energy_objectives() {
        let c = AdaptConstraints::default();
        let p = solve_energy_min(EnergyObjective::Eb, &c, &|_: FramePair| true).unwrap();
        assert_eq!(p.n_s, 1);
        // R_min binding: N_h·N_s <= 1/(R_min·Tc) = 8
        let c = AdaptConstraints {
            r_min: 250_000.0,
            n_h_max: 6,
            n_s_max: 6,
            ..AdaptConstraints::default()
        };
        let p = solve_energy_min(EnergyObjective::Es, &c, &|_: FramePair| true).unwrap();
        assert_eq!(p, FramePair::new(6, 1));
        let c = AdaptConstraints { n_h_max: 15, ..c };
        let p = solve_energy_min(EnergyObjective::Es, &c, &|_: FramePair| true).unwrap();
        assert_eq!(p, FramePair::new(8, 1));
    }
}
