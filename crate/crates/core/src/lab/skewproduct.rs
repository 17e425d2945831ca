//! Orbit sampling of the skew-product semiflow
//! `(t, g, phi) -> (g_t, x_t(., g, phi))` and the cocycle spot-check that
//! restarting from an intermediate segment reproduces later segments.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lab::report::Verdict;
use crate::model::VectorField;
use crate::solver::integrate::SolverParams;
use crate::solver::trajectory::{solve, InitialHistory, Trajectory};
use crate::topologies::metric::{metric, SeminormEnumeration};
use crate::topologies::seminorm::{SeminormContext, SeminormKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitRow {
    pub t: f64,
    /// Distance of the translated field to the base field.
    pub base_distance: f64,
    /// Sup norm of the solution segment at `t`.
    pub segment_sup: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleCheck {
    pub s: f64,
    pub t: f64,
    /// Sup gap between the restarted segment and the direct one.
    pub gap: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitReport {
    pub rows: Vec<OrbitRow>,
    pub cocycle: Vec<CocycleCheck>,
    pub verdict: Verdict,
}

/// Samples the orbit of `(f, phi)` at the given times and spot-checks the
/// cocycle property at the given `(s, t)` pairs with tolerance
/// `cocycle_tol_steps * step`.
#[allow(clippy::too_many_arguments)]
pub fn skewproduct_orbit(
    f: &VectorField,
    phi: &InitialHistory,
    sample_times: &[f64],
    cocycle_pairs: &[(f64, f64)],
    kind: SeminormKind,
    enumeration: &SeminormEnumeration,
    k_max: usize,
    ctx: &SeminormContext<'_>,
    params: &SolverParams,
    cocycle_tol_steps: f64,
) -> Result<OrbitReport> {
    let horizon = sample_times
        .iter()
        .copied()
        .chain(cocycle_pairs.iter().map(|(s, t)| s + t))
        .fold(0.0_f64, f64::max);
    let traj = solve(f, phi, horizon, params)?;

    let mut rows = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        let base_distance = metric(&f.translate(t), f, kind, enumeration, k_max, ctx)?.value;
        let segment = traj.segment(t)?;
        let segment_sup = segment
            .values()
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        rows.push(OrbitRow {
            t,
            base_distance,
            segment_sup,
        });
    }

    let tol = cocycle_tol_steps * params.step;
    let mut cocycle = Vec::with_capacity(cocycle_pairs.len());
    let mut all_passed = true;
    for &(s, t) in cocycle_pairs {
        let gap = cocycle_gap(f, &traj, s, t, params)?;
        let passed = gap <= tol;
        all_passed &= passed;
        cocycle.push(CocycleCheck { s, t, gap, tol, passed });
    }
    Ok(OrbitReport {
        rows,
        cocycle,
        verdict: Verdict::new(
            "cocycle_property",
            all_passed,
            format!("{} spot checks at tolerance {tol:.3e}", cocycle_pairs.len()),
        ),
    })
}

/// Solves from `(f_s, x_s)` for time `t` and compares the resulting segment
/// with the direct segment at `s + t`.
pub fn cocycle_gap(
    f: &VectorField,
    traj: &Trajectory,
    s: f64,
    t: f64,
    params: &SolverParams,
) -> Result<f64> {
    let restart_history = InitialHistory::new(traj.segment(s)?, None)?;
    let shifted = f.translate(s);
    let restarted = solve(&shifted, &restart_history, t, params)?;
    let direct = traj.segment(s + t)?;
    let replayed = restarted.segment(t)?;
    direct.sup_distance(&replayed)
}
