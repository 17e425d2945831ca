//! Finite hull samples and continuity of the translation flow.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lab::report::{decay_verdict, DecayRow, ExperimentReport, Verdict};
use crate::model::VectorField;
use crate::topologies::metric::{metric, SeminormEnumeration};
use crate::topologies::seminorm::{SeminormContext, SeminormKind};

/// Pairwise distances between finitely many time translates of a base
/// field: a desk-scale stand-in for the hull.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullSample {
    pub times: Vec<f64>,
    /// Symmetric matrix with zero diagonal, `distances[i][k] = d(f_{t_i}, f_{t_k})`.
    pub distances: Vec<Vec<f64>>,
}

pub fn hull_sample(
    f: &VectorField,
    times: &[f64],
    kind: SeminormKind,
    enumeration: &SeminormEnumeration,
    k_max: usize,
    ctx: &SeminormContext<'_>,
) -> Result<HullSample> {
    let translates: Vec<VectorField> = times.iter().map(|&t| f.translate(t)).collect();
    let m = times.len();
    let mut distances = vec![vec![0.0; m]; m];
    for i in 0..m {
        for k in (i + 1)..m {
            let d = metric(&translates[i], &translates[k], kind, enumeration, k_max, ctx)?.value;
            distances[i][k] = d;
            distances[k][i] = d;
        }
    }
    Ok(HullSample {
        times: times.to_vec(),
        distances,
    })
}

/// Tabulates `d(f_{t_n}, f_t)` for a sequence `t_n -> t` and asks for
/// monotone decay below `ratio` times the first distance.
#[allow(clippy::too_many_arguments)]
pub fn translation_continuity_experiment(
    f: &VectorField,
    t_target: f64,
    t_sequence: &[f64],
    kind: SeminormKind,
    enumeration: &SeminormEnumeration,
    k_max: usize,
    ctx: &SeminormContext<'_>,
    ratio: f64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("translation_continuity");
    let target = f.translate(t_target);
    let mut series = Vec::with_capacity(t_sequence.len());
    for (i, &tn) in t_sequence.iter().enumerate() {
        let d = metric(&f.translate(tn), &target, kind, enumeration, k_max, ctx)?.value;
        series.push((i as f64, d));
        report.rows.push(DecayRow {
            n: (i + 1) as f64,
            field_distance: d,
            data_distance: (tn - t_target).abs(),
            solution_error: 0.0,
            norm_kind: kind.name().to_string(),
        });
    }
    if series.iter().all(|(_, d)| *d == 0.0) {
        report.push_verdict(Verdict::new(
            "translation_continuity",
            true,
            "all distances identically zero",
        ));
    } else {
        report.push_verdict(decay_verdict("translation_continuity", &series, ratio));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Expr, Modulus, ModulusSet};
    use crate::topologies::seminorm::SeminormResolution;

    fn periodic_field() -> VectorField {
        VectorField::scalar(Expr::mul(
            Expr::sin(Expr::mul(Expr::constant(std::f64::consts::TAU), Expr::time())),
            Expr::state(0),
        ))
        .unwrap()
    }

    fn ctx_theta() -> (ModulusSet, SeminormResolution) {
        (
            ModulusSet::uniform(Modulus::linear(1.0).unwrap()),
            SeminormResolution {
                time_step: 1.0 / 128.0,
                lattice_step: 0.5,
                direction_count: 4,
            },
        )
    }

    #[test]
    fn autonomous_hull_is_a_point() {
        let f = VectorField::scalar(Expr::add(Expr::state(0), Expr::delayed(0))).unwrap();
        let (theta, res) = ctx_theta();
        let ctx = SeminormContext::new(res).with_theta(&theta);
        let e = SeminormEnumeration::default();
        let sample = hull_sample(&f, &[0.0, 0.5, 1.7, -3.0], SeminormKind::TTheta, &e, 2, &ctx)
            .unwrap();
        for row in &sample.distances {
            for d in row {
                assert_eq!(*d, 0.0);
            }
        }
    }

    #[test]
    fn period_one_translate_is_indistinguishable() {
        let f = periodic_field();
        let (theta, res) = ctx_theta();
        let ctx = SeminormContext::new(res).with_theta(&theta);
        let e = SeminormEnumeration::default();
        let sample =
            hull_sample(&f, &[0.0, 1.0, 0.5], SeminormKind::TTheta, &e, 2, &ctx).unwrap();
        assert!(sample.distances[0][1] < 1e-9, "period-1 distance {}", sample.distances[0][1]);
        assert!(sample.distances[0][2] > 1e-3, "half-period distance {}", sample.distances[0][2]);
    }

    #[test]
    fn translation_flow_is_continuous_at_dyadic_rates() {
        let f = periodic_field();
        let (theta, res) = ctx_theta();
        let ctx = SeminormContext::new(res).with_theta(&theta);
        let e = SeminormEnumeration::default();
        let t = 0.3;
        let seq: Vec<f64> = (1..=8).map(|n| t + 0.5_f64.powi(n)).collect();
        let report = translation_continuity_experiment(
            &f,
            t,
            &seq,
            SeminormKind::TThetaB,
            &e,
            2,
            &ctx,
            0.1,
        )
        .unwrap();
        assert!(report.passed, "{:#?}", report.verdicts);
    }

    #[test]
    fn constant_sequence_gives_zero_distances() {
        let f = periodic_field();
        let (theta, res) = ctx_theta();
        let ctx = SeminormContext::new(res).with_theta(&theta);
        let e = SeminormEnumeration::default();
        let report = translation_continuity_experiment(
            &f,
            0.4,
            &[0.4, 0.4, 0.4],
            SeminormKind::TTheta,
            &e,
            2,
            &ctx,
            0.1,
        )
        .unwrap();
        assert!(report.passed);
        for row in &report.rows {
            assert_eq!(row.field_distance, 0.0);
        }
    }
}
