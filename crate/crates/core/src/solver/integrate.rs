//! Averaged-Euler integration of the integral form
//! `x(t) = x0 + integral of g(s, x(s))`, with a fixed-point correction per
//! step. Runge-Kutta order theory needs continuity in `t`, which
//! Carathéodory fields do not offer; the integral form with midpoint
//! sub-quadrature and breakpoints forced onto the grid does not.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::grid::TimeGrid;
use crate::model::path::SampledPath;
use crate::model::VectorField;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverParams {
    /// Base time step of the method of steps.
    pub step: f64,
    /// Fixed-point stopping tolerance per step.
    pub picard_tol: f64,
    /// Maximum fixed-point iterations per step.
    pub picard_max: usize,
    /// Midpoint sub-quadrature cells per step.
    pub sub_quadrature: usize,
    /// Solutions are declared blown up once `|x|` crosses this radius.
    pub escape_radius: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            step: 1e-3,
            picard_tol: 1e-10,
            picard_max: 50,
            sub_quadrature: 4,
            escape_radius: 1e6,
        }
    }
}

/// A non-autonomous right-hand side `g(t, x)` with declared kink times.
pub trait OdeRhs {
    fn dim(&self) -> usize;
    fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;
    /// Times where `g` may jump or kink in `t`; forced onto the step grid.
    fn kink_times(&self) -> Vec<f64>;
}

/// The one-step reduction of the delay problem: on `[k, k+1]` the delayed
/// argument is the frozen history segment, leaving the ordinary field
/// `g(t, x) = f(t, x, history(t - 1))`.
pub struct DelayStepRhs<'a> {
    field: &'a VectorField,
    history: &'a SampledPath,
}

/// Builds the reduced right-hand side, checking that the history spans the
/// full previous unit interval `[a-1, b-1]` of the target span `[a, b]`.
pub fn step_reduce<'a>(
    field: &'a VectorField,
    history: &'a SampledPath,
    span: (f64, f64),
) -> Result<DelayStepRhs<'a>> {
    let (a, b) = span;
    if history.dim() != field.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: field.dim(),
            got: history.dim(),
        });
    }
    if history.start() > a - 1.0 + 1e-9 || history.end() < b - 1.0 - 1e-9 {
        return Err(CoreError::InvalidPath(format!(
            "history [{}, {}] does not span [{}, {}]",
            history.start(),
            history.end(),
            a - 1.0,
            b - 1.0
        )));
    }
    Ok(DelayStepRhs { field, history })
}

impl OdeRhs for DelayStepRhs<'_> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut delayed = vec![0.0; self.field.dim()];
        self.history.at_into(t - 1.0, &mut delayed)?;
        self.field.eval_into(t, x, &delayed, out)
    }

    fn kink_times(&self) -> Vec<f64> {
        let mut kinks: Vec<f64> = self.field.breakpoints().to_vec();
        kinks.extend(self.history.times().iter().map(|t| t + 1.0));
        kinks
    }
}

/// Closure-backed right-hand side, mostly for tests and oracles.
pub struct FnRhs<F> {
    pub dim: usize,
    pub f: F,
    pub kinks: Vec<f64>,
}

impl<F> OdeRhs for FnRhs<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let v = (self.f)(t, x);
        out.copy_from_slice(&v);
        Ok(())
    }

    fn kink_times(&self) -> Vec<f64> {
        self.kinks.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrateOutcome {
    Completed,
    /// `|x|` crossed the escape radius (or became non-finite) near this time.
    BlowUp { t: f64 },
}

/// Integrates `x' = g(t, x)` on `[a, b]` in integral form. Per step,
/// `x_{k+1} = x_k + integral of g(s, xhat(s))` with `xhat` the linear
/// interpolant between `x_k` and the current iterate of `x_{k+1}`, the
/// integral by composite midpoint on a sub-grid, iterated to a fixed point.
/// Returns the path, the number of fixed-point iterations spent, and
/// whether the solution escaped.
pub fn integrate_caratheodory_ode<G: OdeRhs>(
    g: &G,
    x0: &[f64],
    a: f64,
    b: f64,
    params: &SolverParams,
) -> Result<(SampledPath, usize, IntegrateOutcome)> {
    if x0.len() != g.dim() {
        return Err(CoreError::DimensionMismatch { expected: g.dim(), got: x0.len() });
    }
    let mut grid = TimeGrid::uniform(a, b, params.step)?;
    grid.insert_nodes(&g.kink_times());
    let nodes = grid.nodes().to_vec();
    let dim = g.dim();
    let n_sub = params.sub_quadrature.max(1);

    let mut times = Vec::with_capacity(nodes.len());
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    times.push(nodes[0]);
    values.push(x0.to_vec());

    let mut picard_total = 0usize;
    let mut gbuf = vec![0.0; dim];
    let mut xhat = vec![0.0; dim];

    for w in nodes.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let width = t1 - t0;
        let x_curr = values.last().unwrap().clone();
        let mut x_next = x_curr.clone();
        let mut converged = false;
        for _iter in 0..params.picard_max {
            picard_total += 1;
            // composite midpoint along the current interpolant
            let mut integral = vec![0.0; dim];
            for s_idx in 0..n_sub {
                let frac = (s_idx as f64 + 0.5) / n_sub as f64;
                let s = t0 + frac * width;
                for d in 0..dim {
                    xhat[d] = x_curr[d] + frac * (x_next[d] - x_curr[d]);
                }
                g.eval_into(s, &xhat, &mut gbuf)?;
                for d in 0..dim {
                    integral[d] += gbuf[d];
                }
            }
            let mut delta = 0.0_f64;
            let mut norm2 = 0.0_f64;
            let scale = width / n_sub as f64;
            for d in 0..dim {
                let candidate = x_curr[d] + scale * integral[d];
                delta = delta.max((candidate - x_next[d]).abs());
                x_next[d] = candidate;
                norm2 += candidate * candidate;
            }
            if !norm2.is_finite() || norm2.sqrt() > params.escape_radius {
                // escape during iteration is the blow-up signal
                let path = SampledPath::new(times, values)?;
                return Ok((path, picard_total, IntegrateOutcome::BlowUp { t: t1 }));
            }
            if delta < params.picard_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(CoreError::StiffStep {
                step: times.len(),
                t: t1,
                max_iter: params.picard_max,
            });
        }
        times.push(t1);
        values.push(x_next);
    }
    Ok((SampledPath::new(times, values)?, picard_total, IntegrateOutcome::Completed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Expr;

    fn params(step: f64) -> SolverParams {
        SolverParams { step, ..SolverParams::default() }
    }

    #[test]
    fn zero_rhs_stays_constant() {
        let g = FnRhs { dim: 1, f: |_: f64, _: &[f64]| vec![0.0], kinks: vec![] };
        let (path, _, outcome) = integrate_caratheodory_ode(&g, &[2.5], 0.0, 1.0, &params(0.1)).unwrap();
        assert_eq!(outcome, IntegrateOutcome::Completed);
        for v in path.values() {
            assert_eq!(v[0], 2.5);
        }
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let g = FnRhs { dim: 1, f: |_, x: &[f64]| vec![-x[0]], kinks: vec![] };
        let (path, _, _) = integrate_caratheodory_ode(&g, &[1.0], 0.0, 1.0, &params(1e-3)).unwrap();
        let end = path.at(1.0).unwrap()[0];
        assert!((end - (-1.0_f64).exp()).abs() < 1e-4, "x(1) = {end}");
    }

    #[test]
    fn step_density_with_breakpoint_on_grid_is_exact() {
        // g = 0 for t < 1/2, 1 afterwards: x(1) = 1/2 exactly
        let g = FnRhs {
            dim: 1,
            f: |t: f64, _: &[f64]| vec![if t < 0.5 { 0.0 } else { 1.0 }],
            kinks: vec![0.5],
        };
        let (path, _, _) = integrate_caratheodory_ode(&g, &[0.0], 0.0, 1.0, &params(0.125)).unwrap();
        assert_eq!(path.at(1.0).unwrap()[0], 0.5);
    }

    #[test]
    fn halving_the_step_at_least_halves_the_error() {
        let g = FnRhs { dim: 1, f: |_, x: &[f64]| vec![-x[0]], kinks: vec![] };
        let exact = (-1.0_f64).exp();
        let mut errors = Vec::new();
        for step in [4e-2, 2e-2, 1e-2] {
            let (path, _, _) =
                integrate_caratheodory_ode(&g, &[1.0], 0.0, 1.0, &params(step)).unwrap();
            errors.push((path.at(1.0).unwrap()[0] - exact).abs());
        }
        assert!(errors[1] <= 0.5 * errors[0] + 1e-15);
        assert!(errors[2] <= 0.5 * errors[1] + 1e-15);
    }

    #[test]
    fn step_reduce_substitutes_the_history() {
        // f = x u with history(t) = 1 + t on [-1, 0] gives g(t, x) = x t on [0, 1]
        let f = crate::model::VectorField::scalar(Expr::mul(Expr::state(0), Expr::delayed(0)))
            .unwrap();
        let history = SampledPath::from_fn(-1.0, 0.0, 8, |t| vec![1.0 + t]).unwrap();
        let g = step_reduce(&f, &history, (0.0, 1.0)).unwrap();
        let mut out = [0.0];
        for &(t, x) in &[(0.25, 2.0), (0.5, -1.0), (0.9, 0.3)] {
            g.eval_into(t, &[x], &mut out).unwrap();
            assert!((out[0] - x * t).abs() < 1e-12);
        }
    }

    #[test]
    fn step_reduce_rejects_short_history() {
        let f = crate::model::VectorField::scalar(Expr::delayed(0)).unwrap();
        let history = SampledPath::from_fn(-0.5, 0.0, 4, |_| vec![1.0]).unwrap();
        assert!(step_reduce(&f, &history, (0.0, 1.0)).is_err());
    }

    #[test]
    fn delay_free_reduction_keeps_state_dependence() {
        let f = crate::model::VectorField::scalar(Expr::state(0)).unwrap();
        let history = SampledPath::from_fn(-1.0, 0.0, 4, |t| vec![t * t]).unwrap();
        let g = step_reduce(&f, &history, (0.0, 1.0)).unwrap();
        let mut out = [0.0];
        g.eval_into(0.7, &[3.25], &mut out).unwrap();
        assert_eq!(out[0], 3.25);
    }
}
