use serde::{Deserialize, Serialize};

use super::{AdaptConstraints, FeasibilityOracle, FramePair, InterferenceReport, OwnSinr};
use crate::error::{Error, Result};

/// Continuous rate-maximisation problem in posynomial form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedProblem {
    pub own: OwnSinr,
    /// Lower bound on `N_h` from interference reports (1 when none).
    pub n_h_lower: f64,
}

impl RelaxedProblem {
    pub fn new(own: OwnSinr, reports: &[InterferenceReport], sinr_min: f64) -> Result<Self> {
        let oracle = super::ExplicitOracle::new(own, reports, sinr_min)?;
        Ok(RelaxedProblem {
            own,
            n_h_lower: oracle.n_h_bound,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSolution {
    pub n_h: f64,
    pub n_s: f64,
    /// Optimal inverse rate `Tc·N_h·N_s`, s/bit.
    pub p_rlx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundedSolution {
    pub pair: FramePair,
    /// Inverse rate of the relaxed optimum.
    pub lower: f64,
    /// Inverse rate at the rounded pair.
    pub upper: f64,
}

/// One monomial `exp(log_c + a·z)` of a posynomial in log variables.
#[derive(Debug, Clone)]
struct Term {
    log_c: f64,
    a: Vec<f64>,
}

/// `log Σ exp(log_c + a·z) ≤ 0`, convex in `z`.
type Constraint = Vec<Term>;

const SLACK: f64 = 1e-8;

/// Value, gradient and Hessian of `log Σ exp(...)` at `z`.
fn lse(con: &Constraint, z: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = z.len();
    let e: Vec<f64> = con
        .iter()
        .map(|t| t.log_c + t.a.iter().zip(z).map(|(a, z)| a * z).sum::<f64>())
        .collect();
    let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|v| (v - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let value = m + total.ln();
    let mut g = vec![0.0; n];
    let mut h = vec![vec![0.0; n]; n];
    for (t, wi) in con.iter().zip(&w) {
        let p = wi / total;
        for i in 0..n {
            g[i] += p * t.a[i];
            for j in 0..n {
                h[i][j] += p * t.a[i] * t.a[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            h[i][j] -= g[i] * g[j];
        }
    }
    (value - SLACK, g, h)
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn max_violation(cons: &[Constraint], z: &[f64]) -> f64 {
    cons.iter().map(|c| lse(c, z).0).fold(f64::NEG_INFINITY, f64::max)
}

/// Log-barrier method for `min obj·z` subject to `cons`, from a strictly
/// feasible `z`. `stop` may end the run early once an iterate qualifies.
fn barrier(obj: &[f64], cons: &[Constraint], mut z: Vec<f64>, stop: impl Fn(&[f64]) -> bool) -> Vec<f64> {
    let n = z.len();
    let m = cons.len() as f64;
    let merit = |z: &[f64], t: f64| -> f64 {
        let mut v = t * obj.iter().zip(z).map(|(c, z)| c * z).sum::<f64>();
        for c in cons {
            let f = lse(c, z).0;
            if f >= 0.0 {
                return f64::INFINITY;
            }
            v -= (-f).ln();
        }
        v
    };
    let mut t = 1.0;
    while m / t > 1e-12 {
        for _ in 0..100 {
            let mut g: Vec<f64> = obj.iter().map(|c| t * c).collect();
            let mut h = vec![vec![0.0; n]; n];
            for c in cons {
                let (f, gf, hf) = lse(c, &z);
                for i in 0..n {
                    g[i] += gf[i] / -f;
                    for j in 0..n {
                        h[i][j] += gf[i] * gf[j] / (f * f) + hf[i][j] / -f;
                    }
                }
            }
            let Some(dz) = solve_linear(h, g.iter().map(|v| -v).collect()) else {
                break;
            };
            let decrement: f64 = -g.iter().zip(&dz).map(|(a, b)| a * b).sum::<f64>();
            if decrement / 2.0 < 1e-12 {
                break;
            }
            let f0 = merit(&z, t);
            let mut step = 1.0;
            let next = loop {
                let cand: Vec<f64> = z.iter().zip(&dz).map(|(z, d)| z + step * d).collect();
                if merit(&cand, t) <= f0 - 0.25 * step * decrement {
                    break Some(cand);
                }
                step *= 0.5;
                if step < 1e-14 {
                    break None;
                }
            };
            match next {
                Some(c) => z = c,
                None => break,
            }
            if stop(&z) {
                return z;
            }
        }
        t *= 10.0;
    }
    z
}

/// Solve the continuous relaxation in `x = ln N_h`, `y = ln N_s`, minimising
/// the inverse rate `Tc·N_h·N_s` under the own SINR posynomial, the rate
/// floor and the box `[max(1, lower), N_h,max] × [1, N_s,max]`.
pub fn solve_relaxed(c: &AdaptConstraints, problem: &RelaxedProblem) -> Result<RelaxedSolution> {
    c.validate()?;
    let own = problem.own;
    if !(own.alpha > 0.0 && own.eta >= 0.0 && own.beta_sum >= 0.0) {
        return Err(Error::invalid("alpha must be positive, eta and beta non-negative"));
    }
    let mono = |log_c: f64, a: [f64; 2]| vec![Term { log_c, a: a.to_vec() }];
    let scale = c.sinr_min / own.alpha;
    let mut sinr_terms = Vec::new();
    if own.eta > 0.0 {
        sinr_terms.push(Term {
            log_c: (own.eta * scale).ln(),
            a: vec![-1.0, -1.0],
        });
    }
    if own.beta_sum > 0.0 {
        sinr_terms.push(Term {
            log_c: (own.beta_sum * scale).ln(),
            a: vec![0.0, -1.0],
        });
    }
    let mut cons: Vec<Constraint> = vec![
        mono(problem.n_h_lower.max(1.0).ln(), [-1.0, 0.0]),
        mono(0.0, [0.0, -1.0]),
        mono(-(c.n_h_max as f64).ln(), [1.0, 0.0]),
        mono(-(c.n_s_max as f64).ln(), [0.0, 1.0]),
    ];
    if c.r_min > 0.0 {
        cons.push(mono((c.r_min * c.tc).ln(), [1.0, 1.0]));
    }
    if !sinr_terms.is_empty() {
        cons.push(sinr_terms);
    }

    // Phase I: minimise a common slack s until the point is strictly inside.
    let z0 = vec![0.5 * (c.n_h_max as f64).ln(), 0.5 * (c.n_s_max as f64).ln()];
    let s0 = max_violation(&cons, &z0).max(0.0) + 1.0;
    let mut lifted: Vec<Constraint> = cons
        .iter()
        .map(|con| {
            con.iter()
                .map(|t| Term {
                    log_c: t.log_c,
                    a: vec![t.a[0], t.a[1], -1.0],
                })
                .collect()
        })
        .collect();
    lifted.push(vec![Term {
        log_c: -1.0,
        a: vec![0.0, 0.0, -1.0],
    }]);
    let start = vec![z0[0], z0[1], s0];
    let inside = |z: &[f64]| max_violation(&cons, &z[..2]) < 0.0;
    let p1 = barrier(&[0.0, 0.0, 1.0], &lifted, start, inside);
    let z = p1[..2].to_vec();
    if !inside(&z) {
        return Err(Error::Infeasible);
    }

    let z = barrier(&[1.0, 1.0], &cons, z, |_| false);
    let (n_h, n_s) = (z[0].exp(), z[1].exp());
    Ok(RelaxedSolution {
        n_h,
        n_s,
        p_rlx: c.tc * n_h * n_s,
    })
}

fn round_at(v: f64, t: f64) -> f64 {
    let near = v.round();
    if (v - near).abs() < 1e-6 {
        return near;
    }
    let fl = v.floor();
    if v - fl >= t {
        fl + 1.0
    } else {
        fl
    }
}

/// Round each coordinate up when its fractional part is at least `t`.
/// The rounded pair is rejected with `Infeasible` unless it meets the rate
/// floor and `oracle`; callers then fall back to enumeration.
pub fn round_relaxed<O: FeasibilityOracle + ?Sized>(
    solution: &RelaxedSolution,
    t: f64,
    c: &AdaptConstraints,
    oracle: &O,
) -> Result<RoundedSolution> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("rounding threshold {t} outside [0, 1]")));
    }
    let h = round_at(solution.n_h, t).clamp(1.0, c.n_h_max as f64) as u32;
    let s = round_at(solution.n_s, t).clamp(1.0, c.n_s_max as f64) as u32;
    let pair = FramePair::new(h, s);
    if !c.meets_rate(pair) || !oracle.feasible(pair) {
        return Err(Error::Infeasible);
    }
    Ok(RoundedSolution {
        pair,
        lower: solution.p_rlx,
        upper: c.tc * pair.chips_per_bit() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::solve_implicit;

    fn sol(n_h: f64, n_s: f64) -> RelaxedSolution {
        RelaxedSolution { n_h, n_s, p_rlx: 0.5e-6 * n_h * n_s }
    }

    #[test]
    fn rounding_threshold() {
        let c = AdaptConstraints::default();
        let any = |_: FramePair| true;
        assert_eq!(round_relaxed(&sol(2.4, 3.6), 0.5, &c, &any).unwrap().pair, FramePair::new(2, 4));
        assert_eq!(round_relaxed(&sol(2.4, 3.6), 0.3, &c, &any).unwrap().pair, FramePair::new(3, 4));
        assert_eq!(round_relaxed(&sol(4.0, 7.0), 0.9, &c, &any).unwrap().pair, FramePair::new(4, 7));
        assert!(round_relaxed(&sol(2.4, 3.6), 1.5, &c, &any).is_err());
        assert!(matches!(
            round_relaxed(&sol(2.4, 3.6), 0.5, &c, &|p: FramePair| p.n_s > 5),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn synthetic_bounds_bracket_enumeration() {
        let c = AdaptConstraints { r_min: 0.0, n_h_max: 3, n_s_max: 3, ..AdaptConstraints::default() };
        let oracle = |p: FramePair| p.n_h + p.n_s >= 4;
        // continuous optimum of h·s subject to h + s >= 4 on [1, 3]² sits at a corner, h·s = 3
        let r = round_relaxed(&sol(3.0, 1.0), 0.5, &c, &oracle).unwrap();
        let best = solve_implicit(&c, &oracle).unwrap();
        let p_int = c.tc * best.chips_per_bit() as f64;
        assert!(r.lower <= p_int * (1.0 + 1e-12) && p_int <= r.upper * (1.0 + 1e-12));
    }

    #[test]
    fn no_interferers_lands_on_hyperbola() {
        let c = AdaptConstraints { sinr_min: 20.0, ..AdaptConstraints::default() };
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 0.37 };
        let s = solve_relaxed(&c, &RelaxedProblem { own, n_h_lower: 1.0 }).unwrap();
        let product = 0.37 * 20.0;
        assert!((s.n_h * s.n_s / product - 1.0).abs() < 1e-6, "{s:?}");
        assert!((s.p_rlx / (c.tc * product) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn integral_optimum_rounds_to_itself() {
        let c = AdaptConstraints { sinr_min: 1.0, r_min: 0.0, ..AdaptConstraints::default() };
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 0.5 };
        // product >= 0.5 is slack at the box corner (1, 1)
        let s = solve_relaxed(&c, &RelaxedProblem { own, n_h_lower: 1.0 }).unwrap();
        assert!((s.n_h - 1.0).abs() < 1e-6 && (s.n_s - 1.0).abs() < 1e-6, "{s:?}");
        let r = round_relaxed(&s, 0.5, &c, &|_: FramePair| true).unwrap();
        assert_eq!(r.pair, FramePair::new(1, 1));
    }

    #[test]
    fn infeasible_relaxation() {
        let c = AdaptConstraints { sinr_min: 1e6, ..AdaptConstraints::default() };
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 1.0 };
        assert!(matches!(
            solve_relaxed(&c, &RelaxedProblem { own, n_h_lower: 1.0 }),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn degenerate_box_is_feasible() {
        let c = AdaptConstraints { r_min: 2.0e6, sinr_min: 1.0, ..AdaptConstraints::default() };
        let own = OwnSinr { alpha: 1.0, beta_sum: 0.0, eta: 0.5 };
        let s = solve_relaxed(&c, &RelaxedProblem { own, n_h_lower: 1.0 }).unwrap();
        assert!((s.n_h - 1.0).abs() < 1e-6 && (s.n_s - 1.0).abs() < 1e-6);
    }
}
