//! Optimal `m`-bounds and `l`-bounds of vector fields on balls, boundedness
//! and equicontinuity of families of densities, and the moduli of continuity
//! generated by integrating `m`-bounds.
//!
//! Suprema over balls are approximated by a deterministic axis-aligned
//! lattice search in the joint `(x, u)` ball, refined once at half step
//! around the argmax. Reported values are lower bounds of the true suprema
//! and never decrease when the spatial step is halved, because every point
//! probed at step `h` lies on the lattice of step `h/2`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::grid::{ball_lattice, refine_window, TimeGrid};
use crate::model::interval::RationalInterval;
use crate::model::modulus::{Modulus, ModulusSet};
use crate::model::VectorField;

/// Pairs closer than this are excluded from difference quotients to avoid
/// catastrophic cancellation.
pub const PAIR_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    M,
    L,
    L1,
    L2,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::M => "m",
            BoundKind::L => "l",
            BoundKind::L1 => "l1",
            BoundKind::L2 => "l2",
        }
    }
}

/// Resolution of the bound computations: lattice step inside the ball and
/// time step of the quadrature grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundResolution {
    pub spatial_step: f64,
    pub time_step: f64,
    /// Apply the half-step refinement pass around the lattice argmax.
    pub refine: bool,
}

impl Default for BoundResolution {
    fn default() -> Self {
        BoundResolution {
            spatial_step: 0.25,
            time_step: 1.0 / 64.0,
            refine: true,
        }
    }
}

/// A sampled nonnegative function of time: one value per quadrature cell of
/// the underlying grid, evaluated at the cell midpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFunction {
    pub kind: BoundKind,
    pub radius_index: u32,
    /// Cell edges of the time grid; `len = values.len() + 1`.
    pub edges: Vec<f64>,
    /// Cell midpoints where the supremum was evaluated.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Exponent used when this bound enters an `L^p` quantity.
    pub p: u32,
}

impl BoundFunction {
    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// `integral of value^p` over the whole sampled span (midpoint rule).
    pub fn integral_pow(&self, p: u32) -> f64 {
        self.times
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (_, v))| (self.edges[i + 1] - self.edges[i]) * v.powi(p as i32))
            .sum()
    }

    pub fn integral(&self) -> f64 {
        self.integral_pow(1)
    }

    /// Cumulative integral evaluated at `t` by treating the density as
    /// constant on each cell; clamps outside the span.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        let t = t.clamp(self.start(), self.end());
        let mut acc = 0.0;
        for i in 0..self.values.len() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            if t >= b {
                acc += (b - a) * self.values[i];
            } else {
                if t > a {
                    acc += (t - a) * self.values[i];
                }
                break;
            }
        }
        acc
    }

    /// `integral over [s, t]` of the sampled density.
    pub fn window_integral(&self, s: f64, t: f64) -> f64 {
        self.cumulative_at(t) - self.cumulative_at(s)
    }

    /// Nodewise maximum of two bounds on identical grids.
    pub fn max_with(&self, other: &BoundFunction) -> Result<BoundFunction> {
        if self.edges.len() != other.edges.len() {
            return Err(CoreError::Config("bound grids differ".into()));
        }
        let mut out = self.clone();
        for (v, o) in out.values.iter_mut().zip(&other.values) {
            *v = v.max(*o);
        }
        Ok(out)
    }
}

fn split_xu(point: &[f64], dim: usize) -> (&[f64], &[f64]) {
    (&point[..dim], &point[dim..])
}

/// Supremum of `|f(t, x, u)|` over the lattice in the joint ball, refined
/// once around the argmax.
fn sup_norm_on_ball(
    f: &VectorField,
    t: f64,
    lattice: &[Vec<f64>],
    radius: f64,
    step: f64,
    refine: bool,
) -> Result<f64> {
    let dim = f.dim();
    let mut best = f64::NEG_INFINITY;
    let mut best_point: Option<&Vec<f64>> = None;
    for z in lattice {
        let (x, u) = split_xu(z, dim);
        let v = f.eval_norm(t, x, u)?;
        if v > best {
            best = v;
            best_point = Some(z);
        }
    }
    if refine {
        if let Some(center) = best_point {
            for z in refine_window(center, radius, step) {
                let (x, u) = split_xu(&z, dim);
                best = best.max(f.eval_norm(t, x, u)?);
            }
        }
    }
    Ok(best.max(0.0))
}

fn field_time_grid(
    f: &VectorField,
    interval: &RationalInterval,
    time_step: f64,
) -> Result<TimeGrid> {
    TimeGrid::with_breakpoints(interval.start(), interval.end(), time_step, f.breakpoints())
}

/// The optimal `m`-bound of `f` on the ball of radius `j` in the joint
/// `(x, u)` space: per quadrature midpoint, the lattice supremum of
/// `|f(t, x, u)|`. A lower bound of the true supremum converging under
/// spatial refinement.
pub fn optimal_m_bound(
    f: &VectorField,
    j: u32,
    interval: &RationalInterval,
    res: &BoundResolution,
) -> Result<BoundFunction> {
    optimal_m_bound_on_grid(f, j, &field_time_grid(f, interval, res.time_step)?, res)
}

pub fn optimal_m_bound_on_grid(
    f: &VectorField,
    j: u32,
    grid: &TimeGrid,
    res: &BoundResolution,
) -> Result<BoundFunction> {
    let radius = j as f64;
    let lattice = ball_lattice(2 * f.dim(), radius, res.spatial_step);
    let mids = grid.midpoints();
    let values: Vec<f64> = mids
        .par_iter()
        .map(|(t, _)| sup_norm_on_ball(f, *t, &lattice, radius, res.spatial_step, res.refine))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundFunction {
        kind: BoundKind::M,
        radius_index: j,
        edges: grid.nodes().to_vec(),
        times: mids.iter().map(|(t, _)| *t).collect(),
        values,
        p: f.regularity().p,
    })
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Pair constraint of the difference-quotient search.
enum PairMode {
    /// Both coordinates vary.
    Full,
    /// Only the first `N` coordinates vary (`l1`).
    FirstHalf,
    /// Only the last `N` coordinates vary (`l2`).
    SecondHalf,
}

fn sup_quotient_on_ball(
    f: &VectorField,
    t: f64,
    lattice: &[Vec<f64>],
    mode: &PairMode,
    dim: usize,
) -> Result<f64> {
    // cache field values per lattice point
    let values: Vec<Vec<f64>> = lattice
        .iter()
        .map(|z| {
            let (x, u) = split_xu(z, dim);
            f.eval(t, x, u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0_f64;
    for i in 0..lattice.len() {
        for k in (i + 1)..lattice.len() {
            let (zi, zk) = (&lattice[i], &lattice[k]);
            let gap = match mode {
                PairMode::Full => diff_norm(zi, zk),
                PairMode::FirstHalf => {
                    if zi[dim..] != zk[dim..] {
                        continue;
                    }
                    diff_norm(&zi[..dim], &zk[..dim])
                }
                PairMode::SecondHalf => {
                    if zi[..dim] != zk[..dim] {
                        continue;
                    }
                    diff_norm(&zi[dim..], &zk[dim..])
                }
            };
            if gap < PAIR_SEPARATION {
                continue;
            }
            let q = diff_norm(&values[i], &values[k]) / gap;
            best = best.max(q);
        }
    }
    Ok(best)
}

fn optimal_quotient_bound(
    f: &VectorField,
    j: u32,
    interval: &RationalInterval,
    res: &BoundResolution,
    kind: BoundKind,
) -> Result<BoundFunction> {
    let mode = match kind {
        BoundKind::L => PairMode::Full,
        BoundKind::L1 => PairMode::FirstHalf,
        BoundKind::L2 => PairMode::SecondHalf,
        BoundKind::M => unreachable!("m-bound has a dedicated entry point"),
    };
    let grid = field_time_grid(f, interval, res.time_step)?;
    let lattice = ball_lattice(2 * f.dim(), j as f64, res.spatial_step);
    let mids = grid.midpoints();
    let values: Vec<f64> = mids
        .par_iter()
        .map(|(t, _)| sup_quotient_on_ball(f, *t, &lattice, &mode, f.dim()))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundFunction {
        kind,
        radius_index: j,
        edges: grid.nodes().to_vec(),
        times: mids.iter().map(|(t, _)| *t).collect(),
        values,
        p: f.regularity().p,
    })
}

/// The optimal `l`-bound: per midpoint, the largest difference quotient
/// `|f(t,z1) - f(t,z2)| / |z1 - z2|` over lattice pairs in the joint ball.
pub fn optimal_l_bound(
    f: &VectorField,
    j: u32,
    interval: &RationalInterval,
    res: &BoundResolution,
) -> Result<BoundFunction> {
    optimal_quotient_bound(f, j, interval, res, BoundKind::L)
}

/// The optimal `l1`-bound: pairs vary only the current-state coordinates.
pub fn optimal_l1_bound(
    f: &VectorField,
    j: u32,
    interval: &RationalInterval,
    res: &BoundResolution,
) -> Result<BoundFunction> {
    optimal_quotient_bound(f, j, interval, res, BoundKind::L1)
}

/// The optimal `l2`-bound: pairs vary only the delayed coordinates.
pub fn optimal_l2_bound(
    f: &VectorField,
    j: u32,
    interval: &RationalInterval,
    res: &BoundResolution,
) -> Result<BoundFunction> {
    optimal_quotient_bound(f, j, interval, res, BoundKind::L2)
}

/// `max over the family of integral_{-r}^{r} (m^j)^p`, the quantity whose
/// finiteness defines an `L^p_loc`-bounded family of `m`-bounds.
pub fn lp_loc_bound(
    family: &[VectorField],
    j: u32,
    r: f64,
    p: u32,
    res: &BoundResolution,
) -> Result<f64> {
    if family.is_empty() {
        return Err(CoreError::EmptyInput("lp_loc_bound needs a nonempty family".into()));
    }
    let interval = symmetric_interval(r)?;
    let mut sup = f64::NEG_INFINITY;
    for f in family {
        let m = optimal_m_bound(f, j, &interval, res)?;
        sup = sup.max(m.integral_pow(p));
    }
    Ok(sup)
}

/// Same quantity for the `l`-bounds (used when verifying the hypotheses of
/// equivalence statements).
pub fn lp_loc_l_bound(
    family: &[VectorField],
    j: u32,
    r: f64,
    p: u32,
    res: &BoundResolution,
    kind: BoundKind,
) -> Result<f64> {
    if family.is_empty() {
        return Err(CoreError::EmptyInput("lp_loc_l_bound needs a nonempty family".into()));
    }
    let interval = symmetric_interval(r)?;
    let mut sup = f64::NEG_INFINITY;
    for f in family {
        let b = match kind {
            BoundKind::M => optimal_m_bound(f, j, &interval, res)?,
            BoundKind::L => optimal_l_bound(f, j, &interval, res)?,
            BoundKind::L1 => optimal_l1_bound(f, j, &interval, res)?,
            BoundKind::L2 => optimal_l2_bound(f, j, &interval, res)?,
        };
        sup = sup.max(b.integral_pow(p));
    }
    Ok(sup)
}

fn symmetric_interval(r: f64) -> Result<RationalInterval> {
    let ri = r.round() as i64;
    if (r - ri as f64).abs() > 1e-12 || ri < 1 {
        return Err(CoreError::Config(format!("radius r must be a positive integer, got {r}")));
    }
    Ok(RationalInterval::integers(-ri, ri))
}

/// For each requested epsilon, the largest window length `delta` such that
/// every window `[s, s+delta]` inside `[-r, r]` has family-sup integral of
/// the `m^j` below epsilon. Returned deltas are resolved to one time step;
/// `0` signals failure at the tested resolution.
pub fn equicontinuity_table(
    family: &[VectorField],
    j: u32,
    r: f64,
    eps_list: &[f64],
    res: &BoundResolution,
) -> Result<Vec<(f64, f64)>> {
    if family.is_empty() {
        return Err(CoreError::EmptyInput("equicontinuity_table needs a family".into()));
    }
    if eps_list.iter().any(|&e| e <= 0.0) {
        return Err(CoreError::Config("epsilon values must be positive".into()));
    }
    let interval = symmetric_interval(r)?;
    let bounds: Vec<BoundFunction> = family
        .iter()
        .map(|f| optimal_m_bound(f, j, &interval, res))
        .collect::<Result<Vec<_>>>()?;
    // worst window integral of a given length, over family and window starts
    let worst_for = |delta: f64| -> f64 {
        let mut worst = 0.0_f64;
        for b in &bounds {
            for &s in &b.edges {
                if s + delta > b.end() + 1e-12 {
                    break;
                }
                worst = worst.max(b.window_integral(s, s + delta));
            }
        }
        worst
    };
    let span = 2.0 * r;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if worst_for(res.time_step) >= eps {
            out.push((eps, 0.0));
            continue;
        }
        if worst_for(span) < eps {
            out.push((eps, span));
            continue;
        }
        let (mut lo, mut hi) = (res.time_step, span);
        while hi - lo > res.time_step {
            let mid = 0.5 * (lo + hi);
            if worst_for(mid) < eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push((eps, lo));
    }
    Ok(out)
}

/// Options of the modulus construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModuliOptions {
    /// Number of table samples per modulus.
    pub s_samples: usize,
    /// Flag the family as not equicontinuous when
    /// `theta(s_1) > rel * theta(s_max) + abs` at the first positive sample.
    pub zero_limit_rel: f64,
    pub zero_limit_abs: f64,
}

impl Default for ModuliOptions {
    fn default() -> Self {
        ModuliOptions {
            s_samples: 64,
            zero_limit_rel: 0.5,
            zero_limit_abs: 1e-9,
        }
    }
}

/// Builds the suitable set of moduli generated by the family's `m`-bounds:
/// `theta^I_j(s) = sup over t in I and f in the family of
/// integral_t^{t+s} m_f^j`. All tables share one abscissa grid, so the
/// partial order in `(I, j)` holds exactly at every sample.
pub fn moduli_from_m_bounds(
    family: &[VectorField],
    j_list: &[u32],
    intervals: &[RationalInterval],
    res: &BoundResolution,
    opts: &ModuliOptions,
) -> Result<ModulusSet> {
    if family.is_empty() || j_list.is_empty() || intervals.is_empty() {
        return Err(CoreError::EmptyInput("moduli_from_m_bounds needs family, j_list, intervals".into()));
    }
    let s_max = intervals
        .iter()
        .map(RationalInterval::length)
        .fold(0.0_f64, f64::max);
    let window_start = intervals.iter().map(RationalInterval::start).fold(f64::INFINITY, f64::min);
    let window_end = intervals.iter().map(RationalInterval::end).fold(f64::NEG_INFINITY, f64::max) + s_max;
    let n_s = opts.s_samples.max(4);

    let mut entries: BTreeMap<(RationalInterval, u32), Modulus> = BTreeMap::new();
    for &j in j_list {
        // one m-bound per family member on the common window
        let window = RationalInterval::new(
            crate::model::Rational::integer(window_start.floor() as i64),
            crate::model::Rational::integer(window_end.ceil() as i64),
        )?;
        let bounds: Vec<BoundFunction> = family
            .iter()
            .map(|f| optimal_m_bound(f, j, &window, res))
            .collect::<Result<Vec<_>>>()?;
        for interval in intervals {
            let mut xs = Vec::with_capacity(n_s + 1);
            let mut theta = Vec::with_capacity(n_s + 1);
            for k in 0..=n_s {
                let s = s_max * k as f64 / n_s as f64;
                let mut sup = 0.0_f64;
                if k > 0 {
                    for b in &bounds {
                        for &t in &b.edges {
                            if t < interval.start() - 1e-12 || t > interval.end() + 1e-12 {
                                continue;
                            }
                            sup = sup.max(b.window_integral(t, t + s));
                        }
                    }
                }
                xs.push(s);
                theta.push(sup);
            }
            // monotone by construction (nonnegative densities)
            let first_positive = theta[1];
            let last = *theta.last().unwrap();
            if first_positive > opts.zero_limit_rel * last + opts.zero_limit_abs {
                return Err(CoreError::InvalidModulus(format!(
                    "family is not L1_loc-equicontinuous at the sampled resolution: \
                     theta({}) = {first_positive} does not vanish (theta({s_max}) = {last})",
                    xs[1]
                )));
            }
            entries.insert((*interval, j), Modulus::table(xs, theta)?);
        }
    }
    Ok(ModulusSet::per_interval(entries))
}

/// Boundedness and equicontinuity summary of a family of fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyBoundReport {
    pub member_count: usize,
    pub p: u32,
    pub indices: Vec<u32>,
    pub radii: Vec<f64>,
    /// `lp_sup[a][b]` = family sup of the p-integral of `m^{indices[a]}` on
    /// `[-radii[b], radii[b]]`; nondecreasing along both axes.
    pub lp_sup: Vec<Vec<f64>>,
    /// Rows `(j, r, eps, delta)`.
    pub equicontinuity: Vec<(u32, f64, f64, f64)>,
}

pub fn family_report(
    family: &[VectorField],
    j_list: &[u32],
    r_list: &[f64],
    p: u32,
    eps_list: &[f64],
    res: &BoundResolution,
) -> Result<FamilyBoundReport> {
    if family.is_empty() {
        return Err(CoreError::EmptyInput("family_report needs a family".into()));
    }
    let mut lp_sup = Vec::with_capacity(j_list.len());
    for &j in j_list {
        let mut row = Vec::with_capacity(r_list.len());
        for &r in r_list {
            row.push(lp_loc_bound(family, j, r, p, res)?);
        }
        lp_sup.push(row);
    }
    let mut equicontinuity = Vec::new();
    for &j in j_list {
        for &r in r_list {
            for (eps, delta) in equicontinuity_table(family, j, r, eps_list, res)? {
                equicontinuity.push((j, r, eps, delta));
            }
        }
    }
    Ok(FamilyBoundReport {
        member_count: family.len(),
        p,
        indices: j_list.to_vec(),
        radii: r_list.to_vec(),
        lp_sup,
        equicontinuity,
    })
}
