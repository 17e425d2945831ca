//! The Sobolev-type space of continuous paths with `L^p` derivatives:
//! its norm, the Hölder modulus its balls share, and random ball members
//! for verification.

use rand::Rng;

use crate::error::{CoreError, Result};
use crate::model::modulus::Modulus;
use crate::model::path::SampledPath;

/// A path together with derivative samples on a common span.
#[derive(Debug, Clone)]
pub struct C1pPath {
    pub path: SampledPath,
    pub derivative: SampledPath,
}

/// `sup |x| + (integral |x'|^p)^(1/p)` over `[a, b]`. The sup runs over the
/// path nodes inside the interval; the integral uses midpoint values of the
/// interpolated derivative.
pub fn c1p_norm(
    path: &SampledPath,
    derivative: &SampledPath,
    a: f64,
    b: f64,
    p: u32,
) -> Result<f64> {
    if p == 0 {
        return Err(CoreError::Config("exponent p must be >= 1".into()));
    }
    if path.start() > a + 1e-9 || path.end() < b - 1e-9 {
        return Err(CoreError::OutOfSpan { t: a, start: path.start(), end: path.end() });
    }
    if derivative.start() > a + 1e-9 || derivative.end() < b - 1e-9 {
        return Err(CoreError::MissingDerivative(format!(
            "derivative samples span [{}, {}], requested [{a}, {b}]",
            derivative.start(),
            derivative.end()
        )));
    }
    let mut sup = 0.0_f64;
    let mut probe = |t: f64| -> Result<()> {
        let v = path.at(t)?;
        sup = sup.max(v.iter().map(|c| c * c).sum::<f64>().sqrt());
        Ok(())
    };
    probe(a)?;
    probe(b)?;
    for &t in path.times() {
        if t >= a - 1e-12 && t <= b + 1e-12 {
            probe(t.clamp(a, b))?;
        }
    }
    // quadrature cells: derivative nodes clipped to [a, b]
    let mut cells: Vec<f64> = vec![a];
    for &t in derivative.times() {
        if t > a + 1e-12 && t < b - 1e-12 {
            cells.push(t);
        }
    }
    cells.push(b);
    let mut integral = 0.0_f64;
    for w in cells.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let d = derivative.at(mid)?;
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        integral += (w[1] - w[0]) * norm.powi(p as i32);
    }
    Ok(sup + integral.powf(1.0 / p as f64))
}

/// The Hölder envelope shared by the ball of radius `j` in the Sobolev
/// space with exponent `p > 1`:
/// `tau_j(h) = j h^(1/q)` for `h <= 1` and `tau_j(h) = j` beyond, where
/// `1/q = 1 - 1/p`. At `p = 1` no such envelope exists and the call fails.
pub fn c1p_modulus_tau(j: u32, p: u32) -> Result<Modulus> {
    if p <= 1 {
        return Err(CoreError::Unsupported(
            "the Hölder envelope needs p > 1; no modulus bounds the p = 1 ball".into(),
        ));
    }
    let exponent = 1.0 - 1.0 / p as f64;
    Modulus::power(j as f64, exponent, j as f64)
}

/// Draws a random member of the radius-`j` ball: a piecewise-constant
/// derivative scaled so that `sup |phi| + ||phi'||_p = j` exactly, which
/// guarantees the Hölder envelope by construction.
pub fn sample_c1p_ball<R: Rng>(
    j: u32,
    p: u32,
    cells: usize,
    rng: &mut R,
) -> Result<C1pPath> {
    let cells = cells.max(2);
    let h = 1.0 / cells as f64;
    let slopes: Vec<f64> = (0..cells).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let start: f64 = rng.gen_range(-0.5..0.5);
    let mut times = Vec::with_capacity(cells + 1);
    let mut values = Vec::with_capacity(cells + 1);
    let mut x = start;
    times.push(-1.0);
    values.push(vec![x]);
    for (k, s) in slopes.iter().enumerate() {
        x += h * s;
        times.push(-1.0 + h * (k as f64 + 1.0));
        values.push(vec![x]);
    }
    *times.last_mut().unwrap() = 0.0;
    let sup = values.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
    let lp = slopes
        .iter()
        .map(|s| h * s.abs().powi(p as i32))
        .sum::<f64>()
        .powf(1.0 / p as f64);
    let total = sup + lp;
    let scale = if total > 0.0 { j as f64 / total } else { 0.0 };
    let values: Vec<Vec<f64>> = values.iter().map(|v| vec![v[0] * scale]).collect();
    let path = SampledPath::new(times.clone(), values)?;
    // the derivative is a staircase; represent each jump with a pair of
    // nodes a hair apart so linear interpolation reproduces the plateaus
    let jump_eps = 1e-12;
    let mut dtimes = Vec::with_capacity(2 * cells);
    let mut dvalues = Vec::with_capacity(2 * cells);
    dtimes.push(times[0]);
    dvalues.push(vec![slopes[0] * scale]);
    for k in 1..cells {
        dtimes.push(times[k] - jump_eps);
        dvalues.push(vec![slopes[k - 1] * scale]);
        dtimes.push(times[k]);
        dvalues.push(vec![slopes[k] * scale]);
    }
    dtimes.push(times[cells]);
    dvalues.push(vec![slopes[cells - 1] * scale]);
    let derivative = SampledPath::new(dtimes, dvalues)?;
    Ok(C1pPath { path, derivative })
}
