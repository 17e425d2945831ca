//! Bound propagation through limits: the integral of a limit's optimal
//! `m`-bound on a symmetric window may not exceed the family supremum of
//! the same quantity.

use serde::{Deserialize, Serialize};

use crate::bounds::{optimal_m_bound, BoundResolution};
use crate::error::{CoreError, Result};
use crate::model::interval::RationalInterval;
use crate::model::VectorField;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagationCandidate {
    pub integral: f64,
    /// `integral - family_sup`; nonpositive when the inequality holds
    /// against the finite family.
    pub excess_vs_family: f64,
    /// Excess against the Richardson-extrapolated supremum when the family
    /// comes with sequence labels.
    pub excess_vs_extrapolated: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagationReport {
    pub j: u32,
    pub r: f64,
    pub family_sup: f64,
    /// `1/n`-extrapolation of the family integrals, the desk-scale stand-in
    /// for the supremum over the infinite sequence.
    pub extrapolated_sup: Option<f64>,
    pub candidates: Vec<PropagationCandidate>,
    pub holds: bool,
}

/// Checks that every limit candidate's `m`-bound integral on `[-r, r]`
/// stays below the family supremum (finite members, plus the extrapolated
/// tail when sequence labels are available) within `tol`.
pub fn bound_propagation_check(
    family: &[(f64, VectorField)],
    limit_candidates: &[VectorField],
    j: u32,
    r: f64,
    res: &BoundResolution,
    tol: f64,
) -> Result<PropagationReport> {
    if family.is_empty() {
        return Err(CoreError::EmptyInput("bound_propagation_check needs a family".into()));
    }
    let ri = r.round() as i64;
    if (r - ri as f64).abs() > 1e-12 || ri < 1 {
        return Err(CoreError::Config(format!("radius r must be a positive integer, got {r}")));
    }
    let interval = RationalInterval::integers(-ri, ri);

    let mut labelled: Vec<(f64, f64)> = Vec::with_capacity(family.len());
    for (n, f) in family {
        let m = optimal_m_bound(f, j, &interval, res)?;
        labelled.push((*n, m.integral()));
    }
    let family_sup = labelled.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);

    // Richardson step in 1/n over the two largest labels
    let extrapolated_sup = {
        let mut sorted = labelled.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if sorted.len() >= 2 {
            let (n1, i1) = sorted[sorted.len() - 2];
            let (n2, i2) = sorted[sorted.len() - 1];
            if n1 > 0.0 && n2 > n1 {
                let h1 = 1.0 / n1;
                let h2 = 1.0 / n2;
                Some(i2 + (i2 - i1) * h2 / (h1 - h2))
            } else {
                None
            }
        } else {
            None
        }
    };

    let mut candidates = Vec::with_capacity(limit_candidates.len());
    let mut holds = true;
    for g in limit_candidates {
        let integral = optimal_m_bound(g, j, &interval, res)?.integral();
        let excess_vs_family = integral - family_sup;
        let excess_vs_extrapolated = extrapolated_sup.map(|s| integral - s);
        let reference = extrapolated_sup.map_or(family_sup, |s| s.max(family_sup));
        let ok = integral <= reference + tol;
        holds &= ok;
        candidates.push(PropagationCandidate {
            integral,
            excess_vs_family,
            excess_vs_extrapolated,
            holds: ok,
        });
    }
    Ok(PropagationReport {
        j,
        r,
        family_sup,
        extrapolated_sup,
        candidates,
        holds,
    })
}
