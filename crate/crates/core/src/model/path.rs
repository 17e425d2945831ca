use crate::error::{CoreError, Result};
use crate::model::interval::RationalInterval;
use crate::model::modulus::Modulus;

/// Membership slack for ball and modulus constraints, absorbing floating
/// point noise in grid coordinates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A piecewise-linear path: values on a strictly increasing time grid,
/// evaluated anywhere in the span by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    dim: usize,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(CoreError::InvalidPath(format!(
                "need matching nonempty grids, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidPath("times must be strictly increasing".into()));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(CoreError::InvalidPath("inconsistent value dimensions".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidPath("path values must be finite".into()));
        }
        Ok(SampledPath { times, values, dim })
    }

    /// Samples `f` on a uniform grid of `cells` cells over `[a, b]`.
    pub fn from_fn<F>(a: f64, b: f64, cells: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let cells = cells.max(1);
        let times: Vec<f64> = (0..=cells)
            .map(|i| a + (b - a) * i as f64 / cells as f64)
            .collect();
        let values = times.iter().map(|&t| f(t)).collect();
        SampledPath::new(times, values)
    }

    pub fn constant(a: f64, b: f64, value: Vec<f64>) -> Result<Self> {
        SampledPath::new(vec![a, b], vec![value.clone(), value])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Linear interpolation at `t`; clamps to the span endpoints within a
    /// small tolerance and errors beyond it.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.at_into(t, &mut out)?;
        Ok(out)
    }

    pub fn at_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let (a, b) = (self.start(), self.end());
        if t < a - 1e-9 || t > b + 1e-9 {
            return Err(CoreError::OutOfSpan { t, start: a, end: b });
        }
        let t = t.clamp(a, b);
        let i = self.times.partition_point(|&x| x <= t);
        if i == self.times.len() {
            out.copy_from_slice(self.values.last().unwrap());
            return Ok(());
        }
        if i == 0 {
            out.copy_from_slice(&self.values[0]);
            return Ok(());
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.values[i - 1][k] + w * (self.values[i][k] - self.values[i - 1][k]);
        }
        Ok(())
    }

    /// Euclidean distance `|x(t) - x(s)|` between two interpolated values.
    pub fn distance_at(&self, t: f64, s: f64) -> f64 {
        let a = self.at(t).expect("t within span");
        let b = self.at(s).expect("s within span");
        a.iter()
            .zip(&b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    }

    /// Sup-norm distance to another path, evaluated on the union of both
    /// grids (where the difference of interpolants attains its maximum).
    pub fn sup_distance(&self, other: &SampledPath) -> Result<f64> {
        if self.dim != other.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut worst = 0.0_f64;
        for &t in self.times.iter().chain(other.times.iter()) {
            let t = t.clamp(
                self.start().max(other.start()),
                self.end().min(other.end()),
            );
            let a = self.at(t)?;
            let b = other.at(t)?;
            let d = a
                .iter()
                .zip(&b)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// The path resampled as `s -> x(t0 + s)` for `s` in `[lo, hi]`.
    pub fn window(&self, t0: f64, lo: f64, hi: f64, cells: usize) -> Result<SampledPath> {
        let cells = cells.max(1);
        let times: Vec<f64> = (0..=cells)
            .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
            .collect();
        let values = times
            .iter()
            .map(|&s| self.at(t0 + s))
            .collect::<Result<Vec<_>>>()?;
        SampledPath::new(times, values)
    }
}

/// The discretized path class: paths on an interval with values in the ball
/// of radius `radius(j)` and, unless free, a shared modulus of continuity.
#[derive(Debug, Clone)]
pub struct PathClass {
    pub interval: RationalInterval,
    pub radius_index: u32,
    /// `None` marks the free class, all of `C(I, B_j)`.
    pub modulus: Option<Modulus>,
}

impl PathClass {
    pub fn new(interval: RationalInterval, radius_index: u32, modulus: Option<Modulus>) -> Self {
        PathClass { interval, radius_index, modulus }
    }

    pub fn radius(&self) -> f64 {
        self.radius_index as f64
    }

    /// Membership test. The ball constraint is checked at every node; the
    /// modulus constraint between every pair of nodes, matching the
    /// continuum class, so that dropping grid nodes can only weaken the test.
    pub fn contains(&self, path: &SampledPath) -> bool {
        let r = self.radius() + MEMBERSHIP_TOL;
        for v in path.values() {
            if v.iter().map(|c| c * c).sum::<f64>().sqrt() > r {
                return false;
            }
        }
        if let Some(theta) = &self.modulus {
            let times = path.times();
            for i in 0..times.len() {
                for k in (i + 1)..times.len() {
                    let gap = times[k] - times[i];
                    if path.distance_at(times[i], times[k]) > theta.eval(gap) + MEMBERSHIP_TOL {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The relaxed test enforced by the layered optimizer: modulus between
    /// consecutive nodes only.
    pub fn contains_consecutive(&self, path: &SampledPath) -> bool {
        let r = self.radius() + MEMBERSHIP_TOL;
        for v in path.values() {
            if v.iter().map(|c| c * c).sum::<f64>().sqrt() > r {
                return false;
            }
        }
        if let Some(theta) = &self.modulus {
            let times = path.times();
            for w in times.windows(2) {
                if path.distance_at(w[0], w[1]) > theta.eval(w[1] - w[0]) + MEMBERSHIP_TOL {
                    return false;
                }
            }
        }
        true
    }
}
