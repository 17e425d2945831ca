//! The pseudometric each seminorm family induces: a weighted Fréchet
//! combination over a fixed, documented enumeration of seminorm indices.
//! Values are only comparable across runs that share the enumeration config.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::interval::RationalInterval;
use crate::model::VectorField;
use crate::topologies::seminorm::{
    seminorm, SeminormContext, SeminormIndex, SeminormKind,
};

/// Enumeration of seminorm indices: intervals `[-r, r]` for `r = 1..=R`
/// ascending, then radius indices `j = 1..=J` ascending, then the dense
/// points in their configured order (kinds that use them).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormEnumeration {
    pub max_radius: u32,
    pub max_index: u32,
    /// Dense points; dimension `2N` for `TD`/`sigmaD`, `N` for the hybrid
    /// frozen-delay kinds. Ignored by kinds without a dense point.
    pub dense_points: Vec<Vec<f64>>,
    pub exponent: u32,
}

impl Default for SeminormEnumeration {
    fn default() -> Self {
        SeminormEnumeration {
            max_radius: 1,
            max_index: 2,
            dense_points: vec![vec![0.0]],
            exponent: 1,
        }
    }
}

impl SeminormEnumeration {
    /// The first `k_max` indices of the enumeration for the given kind.
    pub fn indices(&self, kind: SeminormKind, k_max: usize) -> Result<Vec<SeminormIndex>> {
        if self.max_radius == 0 || self.max_index == 0 {
            return Err(CoreError::Config("enumeration needs max_radius, max_index >= 1".into()));
        }
        if kind.needs_dense_point() && self.dense_points.is_empty() {
            return Err(CoreError::Config(format!(
                "kind {} needs dense points in the enumeration",
                kind.name()
            )));
        }
        let mut out = Vec::new();
        'outer: for r in 1..=self.max_radius {
            let interval = RationalInterval::integers(-(r as i64), r as i64);
            for j in 1..=self.max_index {
                if kind.needs_dense_point() {
                    for point in &self.dense_points {
                        out.push(
                            SeminormIndex::new(kind, interval, j, self.exponent)
                                .with_point(point.clone()),
                        );
                        if out.len() == k_max {
                            break 'outer;
                        }
                    }
                } else {
                    out.push(SeminormIndex::new(kind, interval, j, self.exponent));
                    if out.len() == k_max {
                        break 'outer;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Per-term breakdown of a metric evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    /// Raw seminorm values `p_k(f - g)` in enumeration order.
    pub terms: Vec<f64>,
}

/// `d(f, g) = sum_k 2^-k p_k(f - g) / (1 + p_k(f - g))` over the first
/// `k_max` indices of the enumeration. Symmetric, and zero when `f = g`.
pub fn metric(
    f: &VectorField,
    g: &VectorField,
    kind: SeminormKind,
    enumeration: &SeminormEnumeration,
    k_max: usize,
    ctx: &SeminormContext<'_>,
) -> Result<MetricValue> {
    let diff = f.difference(g)?;
    metric_of_difference(&diff, kind, enumeration, k_max, ctx)
}

/// Same combination applied to an already-formed difference field.
pub fn metric_of_difference(
    diff: &VectorField,
    kind: SeminormKind,
    enumeration: &SeminormEnumeration,
    k_max: usize,
    ctx: &SeminormContext<'_>,
) -> Result<MetricValue> {
    if k_max == 0 {
        return Err(CoreError::Config("k_max must be >= 1".into()));
    }
    let indices = enumeration.indices(kind, k_max)?;
    // independent evaluations; the weighted fold below runs in index order
    let terms: Vec<f64> = indices
        .par_iter()
        .map(|idx| seminorm(diff, idx, ctx).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let mut value = 0.0;
    for (k, term) in terms.iter().enumerate() {
        value += 0.5_f64.powi(k as i32 + 1) * term / (1.0 + term);
    }
    Ok(MetricValue { value, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Expr, Modulus, ModulusSet};
    use crate::topologies::seminorm::SeminormResolution;

    fn ctx_res() -> SeminormResolution {
        SeminormResolution {
            time_step: 1.0 / 32.0,
            lattice_step: 0.5,
            direction_count: 4,
        }
    }

    #[test]
    fn enumeration_order_is_r_then_j_then_points() {
        let e = SeminormEnumeration {
            max_radius: 2,
            max_index: 2,
            dense_points: vec![vec![0.0, 0.0], vec![0.5, 0.5]],
            exponent: 1,
        };
        let idx = e.indices(SeminormKind::TD, 8).unwrap();
        assert_eq!(idx.len(), 8);
        assert_eq!(idx[0].interval, RationalInterval::integers(-1, 1));
        assert_eq!(idx[0].radius_index, 1);
        assert_eq!(idx[0].frozen_point.as_ref().unwrap(), &vec![0.0, 0.0]);
        assert_eq!(idx[1].frozen_point.as_ref().unwrap(), &vec![0.5, 0.5]);
        assert_eq!(idx[2].radius_index, 2);
        assert_eq!(idx[4].interval, RationalInterval::integers(-2, 2));
        let no_points = e.indices(SeminormKind::TTheta, 8).unwrap();
        assert_eq!(no_points.len(), 4);
    }

    #[test]
    fn metric_of_identical_fields_is_zero() {
        let f = VectorField::scalar(Expr::mul(Expr::sin(Expr::time()), Expr::state(0))).unwrap();
        let theta = ModulusSet::uniform(Modulus::linear(1.0).unwrap());
        let ctx = SeminormContext::new(ctx_res()).with_theta(&theta);
        let e = SeminormEnumeration::default();
        let d = metric(&f, &f, SeminormKind::TTheta, &e, 2, &ctx).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn metric_is_symmetric() {
        let f = VectorField::scalar(Expr::mul(Expr::sin(Expr::time()), Expr::state(0))).unwrap();
        let g = VectorField::scalar(Expr::mul(Expr::cos(Expr::time()), Expr::delayed(0))).unwrap();
        let theta = ModulusSet::uniform(Modulus::linear(1.0).unwrap());
        let ctx = SeminormContext::new(ctx_res()).with_theta(&theta);
        let e = SeminormEnumeration::default();
        for kind in [SeminormKind::TTheta, SeminormKind::SigmaTheta, SeminormKind::TB] {
            let ab = metric(&f, &g, kind, &e, 3, &ctx).unwrap().value;
            let ba = metric(&g, &f, kind, &e, 3, &ctx).unwrap().value;
            assert!((ab - ba).abs() < 1e-12, "{}: {ab} vs {ba}", kind.name());
        }
    }

    #[test]
    fn autonomous_field_is_translation_invariant() {
        let f = VectorField::scalar(Expr::add(Expr::state(0), Expr::delayed(0))).unwrap();
        let theta = ModulusSet::uniform(Modulus::linear(1.0).unwrap());
        let ctx = SeminormContext::new(ctx_res()).with_theta(&theta);
        let e = SeminormEnumeration::default();
        for t in [0.3, -1.7, 12.0] {
            let d = metric(&f.translate(t), &f, SeminormKind::TTheta, &e, 2, &ctx).unwrap();
            assert_eq!(d.value, 0.0, "translate({t})");
        }
    }

    #[test]
    fn metric_triangle_inequality_on_samples() {
        let f = VectorField::scalar(Expr::mul(Expr::sin(Expr::time()), Expr::state(0))).unwrap();
        let g = VectorField::scalar(Expr::mul(Expr::cos(Expr::time()), Expr::delayed(0))).unwrap();
        let h = VectorField::scalar(Expr::constant(0.5)).unwrap();
        let theta = ModulusSet::uniform(Modulus::linear(1.0).unwrap());
        let ctx = SeminormContext::new(ctx_res()).with_theta(&theta);
        let e = SeminormEnumeration::default();
        let dfg = metric(&f, &g, SeminormKind::TTheta, &e, 2, &ctx).unwrap().value;
        let dfh = metric(&f, &h, SeminormKind::TTheta, &e, 2, &ctx).unwrap().value;
        let dhg = metric(&h, &g, SeminormKind::TTheta, &e, 2, &ctx).unwrap().value;
        assert!(dfg <= dfh + dhg + 1e-9);
    }
}
