use crate::error::{CoreError, Result};

/// A strictly increasing grid of time nodes spanning `[a, b]`, with mandatory
/// nodes at declared breakpoints so the midpoint quadrature never evaluates
/// at a discontinuity.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with step as close to `step` as possible while landing on
    /// `b` exactly.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negations also reject NaN
    pub fn uniform(a: f64, b: f64, step: f64) -> Result<Self> {
        if !(b > a) {
            return Err(CoreError::InvalidInterval(format!("need a < b, got [{a}, {b}]")));
        }
        if !(step > 0.0) {
            return Err(CoreError::Config(format!("time step must be positive, got {step}")));
        }
        let n = ((b - a) / step).round().max(1.0) as usize;
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            nodes.push(a + (b - a) * (i as f64) / (n as f64));
        }
        nodes[n] = b;
        Ok(TimeGrid { nodes })
    }

    /// Uniform grid plus every breakpoint that falls strictly inside `(a, b)`.
    pub fn with_breakpoints(a: f64, b: f64, step: f64, breakpoints: &[f64]) -> Result<Self> {
        let mut grid = TimeGrid::uniform(a, b, step)?;
        grid.insert_nodes(breakpoints);
        Ok(grid)
    }

    /// Inserts extra nodes (clipped to the open span), keeping the grid sorted
    /// and deduplicated.
    pub fn insert_nodes(&mut self, times: &[f64]) {
        let (a, b) = (self.start(), self.end());
        let mut changed = false;
        for &t in times {
            if t > a && t < b {
                self.nodes.push(t);
                changed = true;
            }
        }
        if changed {
            self.nodes
                .sort_by(|x, y| x.partial_cmp(y).expect("grid nodes must not be NaN"));
            self.nodes.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
        }
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(CoreError::InvalidInterval("grid needs at least two nodes".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidInterval("grid nodes must be strictly increasing".into()));
        }
        Ok(TimeGrid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn cell_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Midpoint quadrature nodes and weights: one `(midpoint, width)` pair per
    /// grid cell.
    pub fn midpoints(&self) -> Vec<(f64, f64)> {
        self.nodes
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0]))
            .collect()
    }

    /// Composite midpoint quadrature of `g` over the grid span.
    pub fn quad_midpoint<F>(&self, mut g: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut sum = 0.0;
        for (t, w) in self.midpoints() {
            sum += w * g(t)?;
        }
        Ok(sum)
    }
}

/// Axis-aligned lattice with step `step` intersected with the closed origin
/// ball of the given radius, in lexicographic index order. The origin is
/// always a lattice point, so constant zero paths are always representable.
pub fn ball_lattice(dim: usize, radius: f64, step: f64) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && radius > 0.0 && step > 0.0);
    let k_max = (radius / step + 1e-9).floor() as i64;
    let mut points = Vec::new();
    let mut index = vec![-k_max; dim];
    let r2 = radius * radius * (1.0 + 1e-12);
    'outer: loop {
        let p: Vec<f64> = index.iter().map(|&k| k as f64 * step).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= r2 {
            points.push(p);
        }
        for d in (0..dim).rev() {
            index[d] += 1;
            if index[d] <= k_max {
                continue 'outer;
            }
            index[d] = -k_max;
        }
        break;
    }
    points
}

/// The refinement window around `center`: lattice points at half the step
/// within one coarse step of the center, still inside the ball. The returned
/// points lie on the half-step lattice, so halving the base step always
/// explores a superset and grid refinement is monotone.
pub fn refine_window(center: &[f64], radius: f64, step: f64) -> Vec<Vec<f64>> {
    let dim = center.len();
    let half = step / 2.0;
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut points = Vec::new();
    let mut offsets = vec![-2i64; dim];
    'outer: loop {
        let p: Vec<f64> = center
            .iter()
            .zip(&offsets)
            .map(|(&c, &o)| c + o as f64 * half)
            .collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= r2 {
            points.push(p);
        }
        for d in (0..dim).rev() {
            offsets[d] += 1;
            if offsets[d] <= 2 {
                continue 'outer;
            }
            offsets[d] = -2;
        }
        break;
    }
    points
}
