//! The method of steps: each unit interval reduces the delay problem to an
//! ordinary Carathéodory problem with the previous segment frozen as
//! history.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::path::SampledPath;
use crate::model::VectorField;
use crate::solver::integrate::{
    integrate_caratheodory_ode, step_reduce, IntegrateOutcome, SolverParams,
};

/// Initial data on `[-1, 0]`: a continuous path, optionally with derivative
/// samples when the data lives in a Sobolev class.
#[derive(Debug, Clone)]
pub struct InitialHistory {
    pub path: SampledPath,
    pub derivative: Option<SampledPath>,
}

impl InitialHistory {
    pub fn new(path: SampledPath, derivative: Option<SampledPath>) -> Result<Self> {
        if (path.start() + 1.0).abs() > 1e-9 || path.end().abs() > 1e-9 {
            return Err(CoreError::InvalidPath(format!(
                "initial history must span [-1, 0], got [{}, {}]",
                path.start(),
                path.end()
            )));
        }
        if let Some(d) = &derivative {
            if d.dim() != path.dim() {
                return Err(CoreError::DimensionMismatch { expected: path.dim(), got: d.dim() });
            }
            // integral-consistency: integrating the derivative must recover
            // the increments of the path
            let quad_tol = 1e-6
                + 2.0 / d.times().len().max(2) as f64
                    * d.values().iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
            for dim in 0..path.dim() {
                let mut acc = 0.0;
                for w in d.times().windows(2) {
                    let a = d.at(w[0])?[dim];
                    let b = d.at(w[1])?[dim];
                    acc += 0.5 * (a + b) * (w[1] - w[0]);
                }
                let increment = path.at(0.0)?[dim] - path.at(-1.0)?[dim];
                if (acc - increment).abs() > quad_tol {
                    return Err(CoreError::InvalidPath(format!(
                        "derivative samples are inconsistent with the path: \
                         integral {acc} vs increment {increment}"
                    )));
                }
            }
        }
        Ok(InitialHistory { path, derivative })
    }

    /// Constant history with zero derivative.
    pub fn constant(value: Vec<f64>) -> Result<Self> {
        let dim = value.len();
        let path = SampledPath::constant(-1.0, 0.0, value)?;
        let derivative = SampledPath::constant(-1.0, 0.0, vec![0.0; dim])?;
        InitialHistory::new(path, Some(derivative))
    }

    /// Samples `phi` (and `phi'` when given) on a uniform grid.
    pub fn from_fns<F, D>(cells: usize, phi: F, derivative: Option<D>) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
        D: Fn(f64) -> Vec<f64>,
    {
        let path = SampledPath::from_fn(-1.0, 0.0, cells, phi)?;
        let d = match derivative {
            Some(dphi) => Some(SampledPath::from_fn(-1.0, 0.0, cells, dphi)?),
            None => None,
        };
        InitialHistory::new(path, d)
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlowUp {
    /// First grid time at which the solution crossed the escape radius; the
    /// estimate of the right endpoint of the maximal interval.
    pub t_estimate: f64,
    pub escape_radius: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveStats {
    pub step: f64,
    pub picard_total: usize,
    pub residual_max: f64,
}

/// A computed solution on `[-1, t_reached]` with its derivative samples.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// The solution path, history included.
    pub path: SampledPath,
    /// Samples of `f(t, x(t), x(t-1))` at the grid nodes in `[0, t_reached]`;
    /// at `t = 0` this is the right-hand value.
    pub derivative: SampledPath,
    /// Derivative of the initial data, when provided.
    pub history_derivative: Option<SampledPath>,
    pub blow_up: Option<BlowUp>,
    pub stats: SolveStats,
}

impl Trajectory {
    pub fn t_reached(&self) -> f64 {
        self.path.end()
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    /// The state segment `s -> x(t + s)`, `s` in `[-1, 0]`, resampled on the
    /// solver grid density.
    pub fn segment(&self, t: f64) -> Result<SampledPath> {
        if t < 0.0 - 1e-9 || t > self.t_reached() + 1e-9 {
            return Err(CoreError::OutOfSpan {
                t,
                start: 0.0,
                end: self.t_reached(),
            });
        }
        let cells = (1.0 / self.stats.step).round().max(8.0) as usize;
        self.path.window(t, -1.0, 0.0, cells)
    }

    /// Value of the stored derivative at `t >= 0` (linear interpolation).
    pub fn derivative_at(&self, t: f64) -> Result<Vec<f64>> {
        self.derivative.at(t)
    }
}

/// Solves the delay problem by the method of steps up to horizon `T`,
/// stopping early with a blow-up flag when the solution escapes.
pub fn solve(
    f: &VectorField,
    phi: &InitialHistory,
    horizon: f64,
    params: &SolverParams,
) -> Result<Trajectory> {
    if f.dim() != phi.dim() {
        return Err(CoreError::DimensionMismatch { expected: f.dim(), got: phi.dim() });
    }
    if horizon < 0.0 {
        return Err(CoreError::Config(format!("horizon must be >= 0, got {horizon}")));
    }

    let mut times: Vec<f64> = phi.path.times().to_vec();
    let mut values: Vec<Vec<f64>> = phi.path.values().to_vec();
    // normalize the endpoints so unit boundaries land exactly on the grid
    *times.first_mut().unwrap() = -1.0;
    *times.last_mut().unwrap() = 0.0;

    let mut blow_up = None;
    let mut picard_total = 0usize;

    let mut k = 0usize;
    while (k as f64) < horizon && blow_up.is_none() {
        let a = k as f64;
        let b = horizon.min(a + 1.0);
        // history = accumulated path restricted to [a-1, a]
        let lo = times.partition_point(|&t| t < a - 1.0 - 1e-12);
        let history = SampledPath::new(times[lo..].to_vec(), values[lo..].to_vec())?;
        let rhs = step_reduce(f, &history, (a, b))?;
        let x0 = values.last().unwrap().clone();
        let (piece, iterations, outcome) =
            integrate_caratheodory_ode(&rhs, &x0, a, b, params)?;
        picard_total += iterations;
        for (t, v) in piece.times().iter().zip(piece.values()).skip(1) {
            times.push(*t);
            values.push(v.clone());
        }
        if let IntegrateOutcome::BlowUp { t } = outcome {
            blow_up = Some(BlowUp {
                t_estimate: t,
                escape_radius: params.escape_radius,
            });
        }
        k += 1;
    }

    let path = SampledPath::new(times, values)?;

    // derivative samples f(t, x(t), x(t-1)) on the solved part
    let t_end = path.end();
    let mut dtimes = Vec::new();
    let mut dvalues = Vec::new();
    let mut delayed = vec![0.0; f.dim()];
    let mut out = vec![0.0; f.dim()];
    for (t, v) in path.times().iter().zip(path.values()) {
        if *t < -1e-12 || *t > t_end + 1e-12 {
            continue;
        }
        let t = t.max(0.0);
        path.at_into(t - 1.0, &mut delayed)?;
        f.eval_into(t, v, &delayed, &mut out)?;
        dtimes.push(t);
        dvalues.push(out.clone());
    }
    let derivative = SampledPath::new(dtimes, dvalues)?;

    // integral-form residual against the trapezoid cumulative of the
    // derivative samples
    let x_at_zero = path.at(0.0)?;
    let mut residual_max = 0.0_f64;
    let mut acc = vec![0.0; f.dim()];
    let dt_times = derivative.times();
    for i in 0..dt_times.len() {
        if i > 0 {
            let w = dt_times[i] - dt_times[i - 1];
            for (d, a) in acc.iter_mut().enumerate() {
                *a += 0.5 * w * (derivative.values()[i - 1][d] + derivative.values()[i][d]);
            }
        }
        let x = path.at(dt_times[i])?;
        let r = (0..f.dim())
            .map(|d| (x[d] - x_at_zero[d] - acc[d]).abs())
            .fold(0.0, f64::max);
        residual_max = residual_max.max(r);
    }

    Ok(Trajectory {
        path,
        derivative,
        history_derivative: phi.derivative.clone(),
        blow_up,
        stats: SolveStats {
            step: params.step,
            picard_total,
            residual_max,
        },
    })
}
