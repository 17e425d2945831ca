//! Evaluation of the strong and weak integral seminorm families over
//! discretized path classes.
//!
//! Every kind reduces to a [`DpProblem`]: layers at the midpoint quadrature
//! nodes of the interval, nodes on an axis-aligned lattice in the relevant
//! ball, per-node scores `weight * |f|^p` (strong) or `weight * d . f`
//! (weak, per sampled direction), and step bounds from the moduli of
//! continuity. Components that are frozen at a dense point or maximized
//! pointwise do not enter the node set at all.
//!
//! Reported values are exact optima of this finite relaxation and lower
//! bounds of the continuum suprema, converging under grid refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::grid::{ball_lattice, TimeGrid};
use crate::model::interval::RationalInterval;
use crate::model::modulus::ModulusSet;
use crate::model::VectorField;
use crate::topologies::dp::{solve_dp, DpObjective, DpPosition, DpProblem, DpSolution, StepBound};

/// The ten seminorm families. Strong kinds integrate `|f|^p` along paths;
/// weak (sigma) kinds take the absolute value of the signed vector integral
/// and are defined in the `p = 1` setting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeminormKind {
    #[serde(rename = "TB")]
    TB,
    #[serde(rename = "TD")]
    TD,
    #[serde(rename = "sigmaD")]
    SigmaD,
    #[serde(rename = "TTheta")]
    TTheta,
    #[serde(rename = "sigmaTheta")]
    SigmaTheta,
    #[serde(rename = "TThetaD")]
    TThetaD,
    #[serde(rename = "sigmaThetaD")]
    SigmaThetaD,
    #[serde(rename = "TThetaThetaHat")]
    TThetaThetaHat,
    #[serde(rename = "sigmaThetaThetaHat")]
    SigmaThetaThetaHat,
    #[serde(rename = "TThetaB")]
    TThetaB,
}

impl SeminormKind {
    pub fn name(&self) -> &'static str {
        match self {
            SeminormKind::TB => "TB",
            SeminormKind::TD => "TD",
            SeminormKind::SigmaD => "sigmaD",
            SeminormKind::TTheta => "TTheta",
            SeminormKind::SigmaTheta => "sigmaTheta",
            SeminormKind::TThetaD => "TThetaD",
            SeminormKind::SigmaThetaD => "sigmaThetaD",
            SeminormKind::TThetaThetaHat => "TThetaThetaHat",
            SeminormKind::SigmaThetaThetaHat => "sigmaThetaThetaHat",
            SeminormKind::TThetaB => "TThetaB",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "TB" => SeminormKind::TB,
            "TD" => SeminormKind::TD,
            "sigmaD" => SeminormKind::SigmaD,
            "TTheta" => SeminormKind::TTheta,
            "sigmaTheta" => SeminormKind::SigmaTheta,
            "TThetaD" => SeminormKind::TThetaD,
            "sigmaThetaD" => SeminormKind::SigmaThetaD,
            "TThetaThetaHat" => SeminormKind::TThetaThetaHat,
            "sigmaThetaThetaHat" => SeminormKind::SigmaThetaThetaHat,
            "TThetaB" => SeminormKind::TThetaB,
            other => return Err(CoreError::Config(format!("unknown seminorm kind `{other}`"))),
        })
    }

    pub fn is_weak(&self) -> bool {
        matches!(
            self,
            SeminormKind::SigmaD
                | SeminormKind::SigmaTheta
                | SeminormKind::SigmaThetaD
                | SeminormKind::SigmaThetaThetaHat
        )
    }

    pub fn needs_dense_point(&self) -> bool {
        matches!(
            self,
            SeminormKind::TD
                | SeminormKind::SigmaD
                | SeminormKind::TThetaD
                | SeminormKind::SigmaThetaD
        )
    }

    pub fn needs_theta(&self) -> bool {
        !matches!(self, SeminormKind::TB | SeminormKind::TD | SeminormKind::SigmaD)
    }

    pub fn needs_theta_hat(&self) -> bool {
        matches!(
            self,
            SeminormKind::TThetaThetaHat | SeminormKind::SigmaThetaThetaHat
        )
    }

    /// Kinds whose delayed component is a path on `I - 1` evaluated at
    /// `t - 1` (the forms tailored to unit-delay equations).
    pub fn has_shifted_delay(&self) -> bool {
        matches!(
            self,
            SeminormKind::TThetaThetaHat
                | SeminormKind::SigmaThetaThetaHat
                | SeminormKind::TThetaB
        )
    }

    pub fn all() -> [SeminormKind; 10] {
        [
            SeminormKind::TB,
            SeminormKind::TD,
            SeminormKind::SigmaD,
            SeminormKind::TTheta,
            SeminormKind::SigmaTheta,
            SeminormKind::TThetaD,
            SeminormKind::SigmaThetaD,
            SeminormKind::TThetaThetaHat,
            SeminormKind::SigmaThetaThetaHat,
            SeminormKind::TThetaB,
        ]
    }
}

/// One seminorm of the family: which kind, on which interval, over which
/// ball, with which exponent, and at which dense point when the kind
/// freezes a component.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormIndex {
    pub kind: SeminormKind,
    pub interval: RationalInterval,
    pub radius_index: u32,
    pub exponent: u32,
    /// `TD`/`sigmaD`: the frozen `(x, u)` point, length `2N`.
    /// `TThetaD`/`sigmaThetaD`: the frozen delayed point, length `N`.
    pub frozen_point: Option<Vec<f64>>,
    /// Subinterval evaluation: integrate only over `[p1, p2]` inside the
    /// interval while the path constraints keep acting on all of it.
    pub clip: Option<RationalInterval>,
}

impl SeminormIndex {
    pub fn new(kind: SeminormKind, interval: RationalInterval, j: u32, p: u32) -> Self {
        SeminormIndex {
            kind,
            interval,
            radius_index: j,
            exponent: p,
            frozen_point: None,
            clip: None,
        }
    }

    pub fn with_point(mut self, point: Vec<f64>) -> Self {
        self.frozen_point = Some(point);
        self
    }

    pub fn with_clip(mut self, clip: RationalInterval) -> Self {
        self.clip = Some(clip);
        self
    }
}

/// Discretization of the seminorm evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeminormResolution {
    pub time_step: f64,
    pub lattice_step: f64,
    /// Unit directions sampled for weak vector-valued integrals (`N = 2`).
    pub direction_count: usize,
}

impl Default for SeminormResolution {
    fn default() -> Self {
        SeminormResolution {
            time_step: 1.0 / 256.0,
            lattice_step: 0.25,
            direction_count: 16,
        }
    }
}

/// Moduli context: `theta` constrains current-state paths, `theta_hat` the
/// delayed paths of the two-moduli kinds.
#[derive(Debug, Clone, Copy)]
pub struct SeminormContext<'a> {
    pub theta: Option<&'a ModulusSet>,
    pub theta_hat: Option<&'a ModulusSet>,
    pub resolution: SeminormResolution,
}

impl<'a> SeminormContext<'a> {
    pub fn new(resolution: SeminormResolution) -> Self {
        SeminormContext {
            theta: None,
            theta_hat: None,
            resolution,
        }
    }

    pub fn with_theta(mut self, theta: &'a ModulusSet) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_theta_hat(mut self, theta_hat: &'a ModulusSet) -> Self {
        self.theta_hat = Some(theta_hat);
        self
    }
}

/// A path achieving the optimum, sampled at the quadrature times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArgmaxPath {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SeminormValue {
    pub value: f64,
    pub argmax: Vec<ArgmaxPath>,
}

/// Evaluates the seminorm in its defining form: for the two-moduli and
/// `TThetaB` kinds the delayed path lives on `I - 1` and enters as `u(t-1)`.
pub fn seminorm(
    f: &VectorField,
    idx: &SeminormIndex,
    ctx: &SeminormContext<'_>,
) -> Result<SeminormValue> {
    evaluate(f, idx, ctx, false)
}

/// Evaluates the alternative generating form of the `TThetaThetaHat`,
/// `sigmaThetaThetaHat` and `TThetaB` families: both paths on `I`, integrand
/// `f(t, x(t), u(t))`. On the grid this only changes which interval the
/// delayed modulus is looked up at.
pub fn seminorm_alternative(
    f: &VectorField,
    idx: &SeminormIndex,
    ctx: &SeminormContext<'_>,
) -> Result<SeminormValue> {
    if !idx.kind.has_shifted_delay() {
        return Err(CoreError::Unsupported(format!(
            "alternative form only exists for the shifted-delay kinds, not {}",
            idx.kind.name()
        )));
    }
    evaluate(f, idx, ctx, true)
}

/// Half-circle direction set; for `N = 1` the single direction `+1` combined
/// with the two-sided signed optimization is exact.
fn directions(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    match dim {
        1 => Ok(vec![vec![1.0]]),
        2 => {
            let count = count.max(2);
            Ok((0..count)
                .map(|m| {
                    let angle = std::f64::consts::PI * m as f64 / count as f64;
                    vec![angle.cos(), angle.sin()]
                })
                .collect())
        }
        d => Err(CoreError::Unsupported(format!(
            "weak vector-valued seminorms are implemented for N <= 2, got N = {d}"
        ))),
    }
}

struct ProblemShape {
    /// Lattice for a moving `x` component (empty when frozen).
    x_lattice: Vec<Vec<f64>>,
    u_lattice: Vec<Vec<f64>>,
    x_frozen: Option<Vec<f64>>,
    u_frozen: Option<Vec<f64>>,
    u_inner_max: bool,
    /// Joint `(x, u)` lattice for the joint-ball kinds; when set, `x_*` and
    /// `u_*` above are unused.
    joint_lattice: Option<Vec<Vec<f64>>>,
    x_step: Option<Vec<f64>>,
    u_step: Option<Vec<f64>>,
    joint_step: Option<Vec<f64>>,
}

fn step_bounds_from(
    set: Option<&ModulusSet>,
    interval: &RationalInterval,
    j: u32,
    gaps: &[f64],
    role: &str,
) -> Result<Vec<f64>> {
    let set = set.ok_or_else(|| {
        CoreError::Config(format!("seminorm kind requires a {role} modulus set"))
    })?;
    let theta = set.entry(interval, j)?;
    Ok(gaps.iter().map(|&g| theta.eval(g)).collect())
}

fn evaluate(
    f: &VectorField,
    idx: &SeminormIndex,
    ctx: &SeminormContext<'_>,
    alternative: bool,
) -> Result<SeminormValue> {
    let n = f.dim();
    let kind = idx.kind;
    if kind.is_weak() && idx.exponent != 1 {
        return Err(CoreError::Unsupported(format!(
            "weak kind {} is only defined in the p = 1 setting, got p = {}",
            kind.name(),
            idx.exponent
        )));
    }
    if idx.exponent == 0 {
        return Err(CoreError::Config("exponent p must be >= 1".into()));
    }
    let j = idx.radius_index;
    let radius = j as f64;
    let step = ctx.resolution.lattice_step;

    let mut grid = seminorm_grid(f, &idx.interval, ctx.resolution.time_step)?;
    if let Some(clip) = &idx.clip {
        if !idx.interval.contains(clip) {
            return Err(CoreError::Config(format!(
                "clip window {clip} must lie inside the interval {}",
                idx.interval
            )));
        }
        grid.insert_nodes(&[clip.start(), clip.end()]);
    }
    let mids = grid.midpoints();
    let gaps: Vec<f64> = mids.windows(2).map(|w| w[1].0 - w[0].0).collect();
    // quadrature mask of the clip window; constraints still act everywhere
    let layer_active: Vec<bool> = match &idx.clip {
        Some(clip) => mids
            .iter()
            .map(|(t, _)| *t >= clip.start() && *t <= clip.end())
            .collect(),
        None => vec![true; mids.len()],
    };

    let delayed_interval = if alternative {
        idx.interval
    } else {
        idx.interval.shift_back_one()
    };

    let point = |len: usize| -> Result<Vec<f64>> {
        let p = idx.frozen_point.as_ref().ok_or_else(|| {
            CoreError::Config(format!("kind {} requires a dense point", kind.name()))
        })?;
        if p.len() != len {
            return Err(CoreError::DimensionMismatch { expected: len, got: p.len() });
        }
        Ok(p.clone())
    };

    let shape = match kind {
        SeminormKind::TB => ProblemShape {
            x_lattice: vec![],
            u_lattice: vec![],
            x_frozen: None,
            u_frozen: None,
            u_inner_max: false,
            joint_lattice: Some(ball_lattice(2 * n, radius, step)),
            x_step: None,
            u_step: None,
            joint_step: None,
        },
        SeminormKind::TD | SeminormKind::SigmaD => {
            let z = point(2 * n)?;
            ProblemShape {
                x_lattice: vec![],
                u_lattice: vec![],
                x_frozen: Some(z[..n].to_vec()),
                u_frozen: Some(z[n..].to_vec()),
                u_inner_max: false,
                joint_lattice: None,
                x_step: None,
                u_step: None,
                joint_step: None,
            }
        }
        SeminormKind::TTheta | SeminormKind::SigmaTheta => ProblemShape {
            x_lattice: vec![],
            u_lattice: vec![],
            x_frozen: None,
            u_frozen: None,
            u_inner_max: false,
            joint_lattice: Some(ball_lattice(2 * n, radius, step)),
            x_step: None,
            u_step: None,
            joint_step: Some(step_bounds_from(ctx.theta, &idx.interval, j, &gaps, "theta")?),
        },
        SeminormKind::TThetaD | SeminormKind::SigmaThetaD => ProblemShape {
            x_lattice: ball_lattice(n, radius, step),
            u_lattice: vec![],
            x_frozen: None,
            u_frozen: Some(point(n)?),
            u_inner_max: false,
            joint_lattice: None,
            x_step: Some(step_bounds_from(ctx.theta, &idx.interval, j, &gaps, "theta")?),
            u_step: None,
            joint_step: None,
        },
        SeminormKind::TThetaThetaHat | SeminormKind::SigmaThetaThetaHat => ProblemShape {
            x_lattice: ball_lattice(n, radius, step),
            u_lattice: ball_lattice(n, radius, step),
            x_frozen: None,
            u_frozen: None,
            u_inner_max: false,
            joint_lattice: None,
            x_step: Some(step_bounds_from(ctx.theta, &idx.interval, j, &gaps, "theta")?),
            u_step: Some(step_bounds_from(
                ctx.theta_hat,
                &delayed_interval,
                j,
                &gaps,
                "theta_hat",
            )?),
            joint_step: None,
        },
        SeminormKind::TThetaB => ProblemShape {
            x_lattice: ball_lattice(n, radius, step),
            u_lattice: ball_lattice(n, radius, step),
            x_frozen: None,
            u_frozen: None,
            u_inner_max: true,
            joint_lattice: None,
            x_step: Some(step_bounds_from(ctx.theta, &idx.interval, j, &gaps, "theta")?),
            u_step: None,
            joint_step: None,
        },
    };

    // Node positions of the layered problem.
    let positions: Vec<DpPosition> = if let Some(joint) = &shape.joint_lattice {
        joint
            .iter()
            .map(|z| DpPosition::pair(z[..n].to_vec(), z[n..].to_vec()))
            .collect()
    } else {
        match (&shape.x_frozen, shape.u_inner_max, &shape.u_frozen) {
            (Some(_), _, _) => vec![DpPosition::pair(vec![], vec![])],
            (None, true, _) | (None, false, Some(_)) => shape
                .x_lattice
                .iter()
                .map(|x| DpPosition::x_only(x.clone()))
                .collect(),
            (None, false, None) => {
                let mut all = Vec::with_capacity(shape.x_lattice.len() * shape.u_lattice.len());
                for x in &shape.x_lattice {
                    for u in &shape.u_lattice {
                        all.push(DpPosition::pair(x.clone(), u.clone()));
                    }
                }
                all
            }
        }
    };

    let steps: Vec<StepBound> = gaps
        .iter()
        .enumerate()
        .map(|(k, _)| StepBound {
            x_max: shape.x_step.as_ref().map_or(f64::INFINITY, |b| b[k]),
            u_max: shape.u_step.as_ref().map_or(f64::INFINITY, |b| b[k]),
            joint_max: shape.joint_step.as_ref().map_or(f64::INFINITY, |b| b[k]),
        })
        .collect();

    // Evaluates the integrand arguments for a node at a quadrature time.
    let eval_args = |pos: &DpPosition| -> (Vec<f64>, Vec<f64>) {
        let x = shape
            .x_frozen
            .clone()
            .unwrap_or_else(|| pos.x.clone());
        let u = shape
            .u_frozen
            .clone()
            .unwrap_or_else(|| pos.u.clone());
        (x, u)
    };

    let mask = |mut scores: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        for (row, active) in scores.iter_mut().zip(&layer_active) {
            if !active {
                row.iter_mut().for_each(|s| *s = 0.0);
            }
        }
        scores
    };

    let p = idx.exponent;
    if kind.is_weak() {
        let dirs = directions(n, ctx.resolution.direction_count)?;
        let mut best = f64::NEG_INFINITY;
        let mut winner: Option<(DpSolution, bool)> = None;
        let mut winner_scores_problem: Option<DpProblem> = None;
        for d in &dirs {
            let scores = mask(layer_scores(f, &mids, &positions, &eval_args, |v| {
                v.iter().zip(d).map(|(a, b)| a * b).sum::<f64>()
            })?);
            let problem = DpProblem {
                positions: positions.clone(),
                scores,
                steps: steps.clone(),
                objective: DpObjective::MaximizeSum,
            };
            let max_sol = solve_dp(&problem)?;
            let min_sol = solve_dp(&DpProblem {
                objective: DpObjective::MinimizeSum,
                ..problem.clone()
            })?;
            let (cand, from_min) = if max_sol.value >= -min_sol.value {
                (max_sol, false)
            } else {
                (min_sol, true)
            };
            let cand_value = if from_min { -cand.value } else { cand.value };
            if cand_value > best {
                best = cand_value;
                winner = Some((cand, from_min));
                winner_scores_problem = Some(problem);
            }
        }
        let (sol, _) = winner.ok_or_else(|| CoreError::EmptyInput("no directions".into()))?;
        let problem = winner_scores_problem.unwrap();
        let argmax = build_argmax(&mids, &problem.positions, &sol.path, &shape, f, p, false)?;
        Ok(SeminormValue { value: best.max(0.0), argmax: vec![argmax] })
    } else {
        // the free delayed component of TThetaB is maximized pointwise inside
        // the scores; every other shape evaluates the integrand at the node
        let scores = mask(if shape.u_inner_max {
            inner_max_scores(f, &mids, &shape.x_lattice, &shape.u_lattice, p)?
        } else {
            layer_scores(f, &mids, &positions, &eval_args, |v| norm_pow(v, p))?
        });
        let problem = DpProblem {
            positions,
            scores,
            steps,
            objective: DpObjective::MaximizeSum,
        };
        let sol = solve_dp(&problem)?;
        let argmax = build_argmax(&mids, &problem.positions, &sol.path, &shape, f, p, shape.u_inner_max)?;
        let value = if p == 1 {
            sol.value.max(0.0)
        } else {
            sol.value.max(0.0).powf(1.0 / p as f64)
        };
        Ok(SeminormValue { value, argmax: vec![argmax] })
    }
}

/// `|v|^p`; the scalar case uses `abs` directly so that `p = 1` strong scores
/// dominate the signed weak scores exactly, without square-root rounding.
fn norm_pow(v: &[f64], p: u32) -> f64 {
    let norm = if v.len() == 1 {
        v[0].abs()
    } else {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    };
    if p == 1 {
        norm
    } else {
        norm.powi(p as i32)
    }
}

fn seminorm_grid(f: &VectorField, interval: &RationalInterval, step: f64) -> Result<TimeGrid> {
    let mut grid = TimeGrid::uniform(interval.start(), interval.end(), step)?;
    if grid.cell_count() < 2 {
        grid = TimeGrid::uniform(interval.start(), interval.end(), interval.length() / 2.0)?;
    }
    grid.insert_nodes(f.breakpoints());
    Ok(grid)
}

type PathArgs = (Vec<f64>, Vec<f64>);

fn layer_scores<G>(
    f: &VectorField,
    mids: &[(f64, f64)],
    positions: &[DpPosition],
    eval_args: &dyn Fn(&DpPosition) -> PathArgs,
    term: G,
) -> Result<Vec<Vec<f64>>>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let args: Vec<PathArgs> = positions.iter().map(eval_args).collect();
    mids.par_iter()
        .map(|(t, w)| {
            let mut row = Vec::with_capacity(positions.len());
            let mut buf = vec![0.0; f.dim()];
            for (x, u) in &args {
                f.eval_into(*t, x, u, &mut buf)?;
                row.push(w * term(&buf));
            }
            Ok(row)
        })
        .collect()
}

fn inner_max_scores(
    f: &VectorField,
    mids: &[(f64, f64)],
    x_lattice: &[Vec<f64>],
    u_lattice: &[Vec<f64>],
    p: u32,
) -> Result<Vec<Vec<f64>>> {
    mids.par_iter()
        .map(|(t, w)| {
            let mut row = Vec::with_capacity(x_lattice.len());
            let mut buf = vec![0.0; f.dim()];
            for x in x_lattice {
                let mut best = f64::NEG_INFINITY;
                for u in u_lattice {
                    f.eval_into(*t, x, u, &mut buf)?;
                    best = best.max(norm_pow(&buf, p));
                }
                row.push(w * best);
            }
            Ok(row)
        })
        .collect()
}

fn build_argmax(
    mids: &[(f64, f64)],
    positions: &[DpPosition],
    path: &[usize],
    shape: &ProblemShape,
    f: &VectorField,
    p: u32,
    resolve_inner: bool,
) -> Result<ArgmaxPath> {
    let mut xs = Vec::with_capacity(path.len());
    let mut us = Vec::with_capacity(path.len());
    let mut buf = vec![0.0; f.dim()];
    for (k, &i) in path.iter().enumerate() {
        let pos = &positions[i];
        let x = shape.x_frozen.clone().unwrap_or_else(|| pos.x.clone());
        let u = if resolve_inner {
            // recover the pointwise argmax of the free delayed component
            let t = mids[k].0;
            let mut best = f64::NEG_INFINITY;
            let mut arg = shape.u_lattice[0].clone();
            for u in &shape.u_lattice {
                f.eval_into(t, &x, u, &mut buf)?;
                let v = norm_pow(&buf, p);
                if v > best {
                    best = v;
                    arg = u.clone();
                }
            }
            arg
        } else {
            shape.u_frozen.clone().unwrap_or_else(|| pos.u.clone())
        };
        xs.push(x);
        us.push(u);
    }
    Ok(ArgmaxPath {
        times: mids.iter().map(|(t, _)| *t).collect(),
        x: xs,
        u: us,
    })
}
