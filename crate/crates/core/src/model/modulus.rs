use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::interval::RationalInterval;
use crate::model::path::SampledPath;

/// A modulus of continuity: nondecreasing, continuous, vanishing at zero.
/// Closed forms are kept exact; pointwise maxima fall back to sampled tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulus {
    /// `c * s`
    Linear { c: f64 },
    /// `min(c * s^alpha, cap)`
    Power { c: f64, alpha: f64, cap: f64 },
    /// Nondecreasing table with linear interpolation; constant beyond the
    /// last abscissa. The first sample is pinned at `(0, 0)`.
    Table { s: Vec<f64>, theta: Vec<f64> },
}

impl Modulus {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negation also rejects NaN
    pub fn linear(c: f64) -> Result<Modulus> {
        if !(c >= 0.0) {
            return Err(CoreError::InvalidModulus(format!("linear slope must be >= 0, got {c}")));
        }
        Ok(Modulus::Linear { c })
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negation also rejects NaN
    pub fn power(c: f64, alpha: f64, cap: f64) -> Result<Modulus> {
        if !(c >= 0.0 && alpha > 0.0 && cap >= 0.0) {
            return Err(CoreError::InvalidModulus(format!(
                "power modulus needs c >= 0, alpha > 0, cap >= 0; got ({c}, {alpha}, {cap})"
            )));
        }
        Ok(Modulus::Power { c, alpha, cap })
    }

    /// Builds a table modulus; samples must start at 0 and be nondecreasing.
    pub fn table(s: Vec<f64>, theta: Vec<f64>) -> Result<Modulus> {
        if s.len() != theta.len() || s.is_empty() {
            return Err(CoreError::InvalidModulus("table lengths differ or empty".into()));
        }
        if s[0] != 0.0 || theta[0] != 0.0 {
            return Err(CoreError::InvalidModulus("table must start at (0, 0)".into()));
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidModulus("table abscissae must increase".into()));
        }
        if theta.windows(2).any(|w| w[0] > w[1] + 1e-15) {
            return Err(CoreError::InvalidModulus("table values must be nondecreasing".into()));
        }
        Ok(Modulus::Table { s, theta })
    }

    /// The everywhere-zero modulus (constant paths).
    pub fn zero() -> Modulus {
        Modulus::Linear { c: 0.0 }
    }

    /// Evaluates `theta(s)` for `s >= 0`.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self {
            Modulus::Linear { c } => c * s,
            Modulus::Power { c, alpha, cap } => (c * s.powf(*alpha)).min(*cap),
            Modulus::Table { s: xs, theta } => {
                if s >= *xs.last().unwrap() {
                    return *theta.last().unwrap();
                }
                let i = xs.partition_point(|&x| x <= s);
                // xs[i-1] <= s < xs[i]
                let (x0, x1) = (xs[i - 1], xs[i]);
                let (y0, y1) = (theta[i - 1], theta[i]);
                y0 + (y1 - y0) * (s - x0) / (x1 - x0)
            }
        }
    }

    /// Largest abscissa at which this modulus is known exactly; tables are
    /// extended by constants beyond it.
    pub fn domain_end(&self) -> Option<f64> {
        match self {
            Modulus::Linear { .. } => None,
            Modulus::Power { c, alpha, cap } => {
                if *c == 0.0 {
                    None
                } else {
                    let s = (cap / c).powf(1.0 / alpha);
                    s.is_finite().then_some(s)
                }
            }
            Modulus::Table { s, .. } => Some(*s.last().unwrap()),
        }
    }

    fn preferred_abscissae(&self, span: f64, fallback: usize) -> Vec<f64> {
        match self {
            Modulus::Table { s, .. } => s.iter().copied().filter(|&x| x <= span).collect(),
            _ => (0..=fallback).map(|i| span * i as f64 / fallback as f64).collect(),
        }
    }
}

/// Pointwise maximum of two moduli, tabulated on the union of their sample
/// abscissae (closed forms contribute a uniform default grid over the common
/// span). The result is again a valid modulus.
pub fn merge_moduli(a: &Modulus, b: &Modulus) -> Result<Modulus> {
    const FALLBACK_SPAN: f64 = 4.0;
    const FALLBACK_SAMPLES: usize = 256;
    let span = a
        .domain_end()
        .into_iter()
        .chain(b.domain_end())
        .fold(0.0_f64, f64::max)
        .max(FALLBACK_SPAN);
    let mut xs: Vec<f64> = a
        .preferred_abscissae(span, FALLBACK_SAMPLES)
        .into_iter()
        .chain(b.preferred_abscissae(span, FALLBACK_SAMPLES))
        .collect();
    xs.push(0.0);
    xs.push(span);
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup_by(|p, q| (*p - *q).abs() <= 1e-15);
    let theta: Vec<f64> = xs.iter().map(|&x| a.eval(x).max(b.eval(x))).collect();
    Modulus::table(xs, theta)
}

/// The modulus of continuity shared by a family of sampled paths on a common
/// interval: `theta0(h) = max_paths sup_{|t-s|<=h} |x(t)-x(s)|`, computed on a
/// grid of `h` values and forced monotone.
pub fn shared_modulus(paths: &[SampledPath], h_samples: usize) -> Result<Modulus> {
    if paths.is_empty() {
        return Err(CoreError::EmptyInput("shared_modulus needs at least one path".into()));
    }
    let start = paths[0].start();
    let end = paths[0].end();
    for p in paths {
        if (p.start() - start).abs() > 1e-9 || (p.end() - end).abs() > 1e-9 {
            return Err(CoreError::InvalidPath(
                "shared_modulus paths must share a common interval".into(),
            ));
        }
    }
    let span = end - start;
    let h_samples = h_samples.max(2);
    // Sweep grid: union of all path nodes refined uniformly, so kinks of the
    // interpolants are sampled.
    let sweep: Vec<f64> = {
        let mut s: Vec<f64> = paths.iter().flat_map(|p| p.times().to_vec()).collect();
        let n = 4 * h_samples;
        s.extend((0..=n).map(|i| start + span * i as f64 / n as f64));
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        s
    };
    let mut xs = Vec::with_capacity(h_samples + 1);
    let mut theta = Vec::with_capacity(h_samples + 1);
    let mut running = 0.0_f64;
    for i in 0..=h_samples {
        let h = span * i as f64 / h_samples as f64;
        let mut worst = 0.0_f64;
        if i > 0 {
            for p in paths {
                for &t in &sweep {
                    let s = t + h;
                    if s > end + 1e-12 {
                        break;
                    }
                    let d = p.distance_at(t, s.min(end));
                    worst = worst.max(d);
                }
            }
        }
        running = running.max(worst);
        xs.push(h);
        theta.push(running);
    }
    Modulus::table(xs, theta)
}

/// An indexed family `theta^I_j` of moduli with the partial order
/// `theta^{I1}_{j1} <= theta^{I2}_{j2}` whenever `I1` is contained in `I2` and
/// `j1 <= j2`.
#[derive(Debug, Clone)]
pub enum ModulusSet {
    /// One modulus for every `(I, j)`; trivially ordered. This is the shape
    /// of the set generated by the bounds of a translation-invariant family,
    /// whose entries do not depend on the interval.
    Uniform(Modulus),
    /// One modulus per radius index, independent of the interval.
    PerIndex(BTreeMap<u32, Modulus>),
    /// Fully indexed entries.
    PerInterval(BTreeMap<(RationalInterval, u32), Modulus>),
}

impl ModulusSet {
    pub fn uniform(m: Modulus) -> ModulusSet {
        ModulusSet::Uniform(m)
    }

    pub fn per_index(entries: BTreeMap<u32, Modulus>) -> ModulusSet {
        ModulusSet::PerIndex(entries)
    }

    pub fn per_interval(entries: BTreeMap<(RationalInterval, u32), Modulus>) -> ModulusSet {
        ModulusSet::PerInterval(entries)
    }

    /// Looks up `theta^I_j`; for `PerIndex` sets any interval works.
    pub fn entry(&self, interval: &RationalInterval, j: u32) -> Result<&Modulus> {
        match self {
            ModulusSet::Uniform(m) => Ok(m),
            ModulusSet::PerIndex(map) => map.get(&j).ok_or(CoreError::MissingModulus {
                interval: interval.to_string(),
                radius_index: j,
            }),
            ModulusSet::PerInterval(map) => {
                map.get(&(*interval, j)).ok_or(CoreError::MissingModulus {
                    interval: interval.to_string(),
                    radius_index: j,
                })
            }
        }
    }

    /// Merges every entry with `other` pointwise (the `max{theta, theta0}`
    /// construction used when widening a set of moduli by initial data).
    pub fn merge_with(&self, other: &Modulus) -> Result<ModulusSet> {
        Ok(match self {
            ModulusSet::Uniform(m) => ModulusSet::Uniform(merge_moduli(m, other)?),
            ModulusSet::PerIndex(map) => {
                let mut out = BTreeMap::new();
                for (j, m) in map {
                    out.insert(*j, merge_moduli(m, other)?);
                }
                ModulusSet::PerIndex(out)
            }
            ModulusSet::PerInterval(map) => {
                let mut out = BTreeMap::new();
                for (k, m) in map {
                    out.insert(*k, merge_moduli(m, other)?);
                }
                ModulusSet::PerInterval(out)
            }
        })
    }

    /// Checks the partial order on a 100-point sample grid over `[0, span]`.
    pub fn validate_partial_order(&self, span: f64) -> Result<()> {
        let entries: Vec<(Option<RationalInterval>, u32, &Modulus)> = match self {
            ModulusSet::Uniform(_) => return Ok(()),
            ModulusSet::PerIndex(map) => map.iter().map(|(j, m)| (None, *j, m)).collect(),
            ModulusSet::PerInterval(map) => {
                map.iter().map(|((i, j), m)| (Some(*i), *j, m)).collect()
            }
        };
        for (ia, ja, ma) in &entries {
            for (ib, jb, mb) in &entries {
                let comparable = match (ia, ib) {
                    (Some(a), Some(b)) => b.contains(a),
                    (None, None) => true,
                    _ => false,
                };
                if comparable && ja <= jb {
                    for k in 0..=100 {
                        let s = span * k as f64 / 100.0;
                        let (va, vb) = (ma.eval(s), mb.eval(s));
                        if va > vb + 1e-9 {
                            return Err(CoreError::InvalidModulus(format!(
                                "partial order violated at s={s}: theta[{ja}]={va} > theta[{jb}]={vb}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
