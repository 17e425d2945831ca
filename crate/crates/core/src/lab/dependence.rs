//! Continuous-dependence experiments: solve the delay problem along a
//! sequence of fields and initial data, and tabulate topology distances
//! against solution errors.

use crate::bounds::{optimal_l1_bound, optimal_l2_bound, BoundResolution};
use crate::error::{CoreError, Result};
use crate::lab::report::{decay_verdict, DecayRow, ExperimentReport, Verdict};
use crate::model::interval::RationalInterval;
use crate::model::path::SampledPath;
use crate::model::VectorField;
use crate::solver::integrate::SolverParams;
use crate::solver::sobolev::c1p_norm;
use crate::solver::trajectory::{solve, InitialHistory, Trajectory};
use crate::topologies::metric::{metric, SeminormEnumeration};
use crate::topologies::seminorm::{SeminormContext, SeminormKind};

/// A labelled sequence of fields with its limit.
pub struct FieldSequence {
    pub members: Vec<(f64, VectorField)>,
    pub limit: VectorField,
}

/// A labelled sequence of initial data with its limit; when `members` is
/// empty every solve uses `limit`.
pub struct DataSequence {
    pub members: Vec<InitialHistory>,
    pub limit: InitialHistory,
}

impl DataSequence {
    pub fn constant(limit: InitialHistory) -> Self {
        DataSequence {
            members: Vec::new(),
            limit,
        }
    }

    fn member(&self, i: usize) -> &InitialHistory {
        if self.members.is_empty() {
            &self.limit
        } else {
            &self.members[i]
        }
    }
}

pub struct DependenceConfig<'a> {
    pub scenario: String,
    pub kind: SeminormKind,
    pub enumeration: SeminormEnumeration,
    pub k_max: usize,
    pub ctx: SeminormContext<'a>,
    pub horizon: f64,
    pub solver: SolverParams,
    /// Final solution error must drop below this.
    pub error_threshold: f64,
    /// Re-derive the seminorm resolution per member from its oscillation
    /// frequency (see [`crate::lab::adapted_oscillation_resolution`]).
    pub adapt_to_oscillation: bool,
}

impl DependenceConfig<'_> {
    /// Context used for the member labelled `n`.
    fn member_ctx(&self, n: f64) -> Result<SeminormContext<'_>> {
        if !self.adapt_to_oscillation {
            return Ok(self.ctx);
        }
        let theta = self.ctx.theta.ok_or_else(|| {
            CoreError::Config("oscillation-adapted resolution needs a theta set".into())
        })?;
        let interval = RationalInterval::integers(
            -(self.enumeration.max_radius.max(1) as i64),
            self.enumeration.max_radius.max(1) as i64,
        );
        let res =
            crate::lab::adapted_oscillation_resolution(n, theta, &interval, &self.ctx.resolution)?;
        let mut ctx = SeminormContext::new(res).with_theta(theta);
        if let Some(hat) = self.ctx.theta_hat {
            ctx = ctx.with_theta_hat(hat);
        }
        Ok(ctx)
    }
}

/// Gronwall-style sensitivity constant `exp(integral_0^T (l1^j + l2^j))`
/// estimated from the computed coordinate Lipschitz bounds of the limit
/// field on a ball enclosing the observed solutions. Both the running and
/// the delayed error are controlled by the sup error, so the two bounds
/// add.
pub fn gronwall_constant(
    f: &VectorField,
    j: u32,
    horizon: f64,
    res: &BoundResolution,
) -> Result<f64> {
    let t_end = horizon.max(1.0).ceil() as i64;
    let interval = RationalInterval::integers(0, t_end);
    let l1 = optimal_l1_bound(f, j, &interval, res)?;
    let l2 = optimal_l2_bound(f, j, &interval, res)?;
    Ok((l1.window_integral(0.0, horizon) + l2.window_integral(0.0, horizon)).exp())
}

fn sup_error_on(lo: f64, hi: f64, a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &t in a.path.times().iter().chain(b.path.times().iter()) {
        if t < lo - 1e-12 || t > hi + 1e-12 {
            continue;
        }
        let t = t.clamp(lo, hi);
        let va = a.path.at(t)?;
        let vb = b.path.at(t)?;
        let d = va
            .iter()
            .zip(&vb)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Solves `(f_n, phi_n)` against the limit problem and reports the decay of
/// the scenario-topology distance, the data distance, and the sup solution
/// error on `[-1, T]`. Blow-up of the limit problem before `T` is an error
/// instructing a smaller horizon; blow-up of a member is recorded in the
/// table as an infinite error.
pub fn continuous_dependence_experiment(
    fields: &FieldSequence,
    data: &DataSequence,
    cfg: &DependenceConfig<'_>,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg.scenario.clone());
    let limit_traj = solve(&fields.limit, &data.limit, cfg.horizon, &cfg.solver)?;
    if let Some(blow) = &limit_traj.blow_up {
        return Err(CoreError::HorizonPastBlowUp {
            b_estimate: blow.t_estimate,
            horizon: cfg.horizon,
        });
    }
    let mut error_series = Vec::new();
    for (i, (n, fnn)) in fields.members.iter().enumerate() {
        let phi = data.member(i);
        let ctx = cfg.member_ctx(*n)?;
        let field_distance =
            metric(fnn, &fields.limit, cfg.kind, &cfg.enumeration, cfg.k_max, &ctx)?.value;
        let data_distance = phi.path.sup_distance(&data.limit.path)?;
        let traj = solve(fnn, phi, cfg.horizon, &cfg.solver)?;
        let solution_error = if traj.blow_up.is_some() {
            f64::INFINITY
        } else {
            sup_error_on(-1.0, cfg.horizon, &traj, &limit_traj)?
        };
        error_series.push((*n, solution_error));
        report.rows.push(DecayRow {
            n: *n,
            field_distance,
            data_distance,
            solution_error,
            norm_kind: format!("sup[-1,{}]", cfg.horizon),
        });
    }
    push_dependence_verdicts(&mut report, &error_series, cfg.error_threshold);
    Ok(report)
}

fn push_dependence_verdicts(
    report: &mut ExperimentReport,
    error_series: &[(f64, f64)],
    threshold: f64,
) {
    if error_series.iter().all(|(_, e)| *e == 0.0) {
        report.push_verdict(Verdict::new(
            "solution_error_decay",
            true,
            "errors identically zero",
        ));
        return;
    }
    let last = error_series.last().map(|(_, e)| *e).unwrap_or(f64::INFINITY);
    report.push_verdict(Verdict::new(
        "final_error_below_threshold",
        last < threshold,
        format!("final error {last:.6e} vs threshold {threshold:.3e}"),
    ));
    let first = error_series.first().map(|(_, e)| *e).unwrap_or(0.0);
    report.push_verdict(Verdict::new(
        "solution_error_decay",
        last <= first,
        format!("first {first:.6e} -> last {last:.6e}"),
    ));
}

/// Same experiment measured in the Sobolev norm on `[lo, T]` (`lo = -1`
/// for the full-interval statements, `0` for the variants that disregard
/// the initial data).
pub fn c1p_dependence_experiment(
    fields: &FieldSequence,
    data: &DataSequence,
    p: u32,
    lo: f64,
    cfg: &DependenceConfig<'_>,
) -> Result<ExperimentReport> {
    if p < 1 {
        return Err(CoreError::Config("p must be >= 1".into()));
    }
    let mut report = ExperimentReport::new(cfg.scenario.clone());
    let limit_traj = solve(&fields.limit, &data.limit, cfg.horizon, &cfg.solver)?;
    if let Some(blow) = &limit_traj.blow_up {
        return Err(CoreError::HorizonPastBlowUp {
            b_estimate: blow.t_estimate,
            horizon: cfg.horizon,
        });
    }
    let mut error_series = Vec::new();
    for (i, (n, fnn)) in fields.members.iter().enumerate() {
        let phi = data.member(i);
        let ctx = cfg.member_ctx(*n)?;
        let field_distance =
            metric(fnn, &fields.limit, cfg.kind, &cfg.enumeration, cfg.k_max, &ctx)?.value;
        let data_distance = phi.path.sup_distance(&data.limit.path)?;
        let traj = solve(fnn, phi, cfg.horizon, &cfg.solver)?;
        let solution_error = if traj.blow_up.is_some() {
            f64::INFINITY
        } else {
            trajectory_difference_c1p(&traj, &limit_traj, lo, cfg.horizon, p)?
        };
        error_series.push((*n, solution_error));
        report.rows.push(DecayRow {
            n: *n,
            field_distance,
            data_distance,
            solution_error,
            norm_kind: format!("C1p(p={p})[{lo},{}]", cfg.horizon),
        });
    }
    push_dependence_verdicts(&mut report, &error_series, cfg.error_threshold);
    Ok(report)
}

/// Sobolev norm of the difference of two trajectories on `[lo, hi]`,
/// stitching history and forward derivatives. The trajectories must carry
/// history derivatives when `lo < 0`.
pub fn trajectory_difference_c1p(
    a: &Trajectory,
    b: &Trajectory,
    lo: f64,
    hi: f64,
    p: u32,
) -> Result<f64> {
    let dim = a.dim();
    let cells = ((hi - lo) / a.stats.step).round().max(16.0) as usize;
    let times: Vec<f64> = (0..=cells)
        .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
        .collect();
    let deriv_of = |traj: &Trajectory, t: f64| -> Result<Vec<f64>> {
        if t >= 0.0 {
            traj.derivative.at(t)
        } else {
            match &traj.history_derivative {
                Some(d) => d.at(t),
                None => Err(CoreError::MissingDerivative(
                    "history derivative needed for norms reaching below 0".into(),
                )),
            }
        }
    };
    let mut diff_path = Vec::with_capacity(times.len());
    let mut diff_deriv = Vec::with_capacity(times.len());
    for &t in &times {
        let pa = a.path.at(t)?;
        let pb = b.path.at(t)?;
        diff_path.push((0..dim).map(|d| pa[d] - pb[d]).collect::<Vec<f64>>());
        let da = deriv_of(a, t)?;
        let db = deriv_of(b, t)?;
        diff_deriv.push((0..dim).map(|d| da[d] - db[d]).collect::<Vec<f64>>());
    }
    let path = SampledPath::new(times.clone(), diff_path)?;
    let deriv = SampledPath::new(times, diff_deriv)?;
    c1p_norm(&path, &deriv, lo, hi, p)
}

/// Tabulates the same field sequence under a weak and a strong topology
/// side by side: the weak distances must decay monotonically below
/// `weak_ratio` of their initial value while the strong distances stay
/// above `strong_floor` of theirs.
#[allow(clippy::too_many_arguments)]
pub fn weak_vs_strong_experiment(
    fields: &FieldSequence,
    weak: SeminormKind,
    strong: SeminormKind,
    enumeration: &SeminormEnumeration,
    k_max: usize,
    ctx: &SeminormContext<'_>,
    adapt_to_oscillation: bool,
    weak_ratio: f64,
    strong_floor: f64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("weak_vs_strong");
    let mut weak_series = Vec::new();
    let mut strong_series = Vec::new();
    for (n, fnn) in &fields.members {
        let member_ctx = if adapt_to_oscillation {
            let theta = ctx.theta.ok_or_else(|| {
                CoreError::Config("oscillation-adapted resolution needs a theta set".into())
            })?;
            let interval = RationalInterval::integers(
                -(enumeration.max_radius.max(1) as i64),
                enumeration.max_radius.max(1) as i64,
            );
            let res =
                crate::lab::adapted_oscillation_resolution(*n, theta, &interval, &ctx.resolution)?;
            let mut c = SeminormContext::new(res).with_theta(theta);
            if let Some(hat) = ctx.theta_hat {
                c = c.with_theta_hat(hat);
            }
            c
        } else {
            *ctx
        };
        let dw = metric(fnn, &fields.limit, weak, enumeration, k_max, &member_ctx)?.value;
        let ds = metric(fnn, &fields.limit, strong, enumeration, k_max, &member_ctx)?.value;
        weak_series.push((*n, dw));
        strong_series.push((*n, ds));
        report.rows.push(DecayRow {
            n: *n,
            field_distance: dw,
            data_distance: 0.0,
            solution_error: 0.0,
            norm_kind: weak.name().to_string(),
        });
        report.rows.push(DecayRow {
            n: *n,
            field_distance: ds,
            data_distance: 0.0,
            solution_error: 0.0,
            norm_kind: strong.name().to_string(),
        });
    }
    report.push_verdict(decay_verdict("weak_distance_decay", &weak_series, weak_ratio));
    let s_first = strong_series.first().map(|(_, d)| *d).unwrap_or(0.0);
    let s_min = strong_series
        .iter()
        .map(|(_, d)| *d)
        .fold(f64::INFINITY, f64::min);
    report.push_verdict(Verdict::new(
        "strong_distance_persists",
        s_min > strong_floor * s_first && s_first > 0.0,
        format!("min {s_min:.6e} vs floor {:.6e}", strong_floor * s_first),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests;
