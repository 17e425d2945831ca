//! The chain of order between the seminorm families, checked on one shared
//! grid and lattice so every inequality follows from feasible-set inclusion
//! and holds exactly in floating point, not merely within tolerance.
//!
//! Matched indices: the current-state class uses radius index `j`; the
//! joint and two-path classes use the modulus entry at `2j` (a product of
//! two `j`-balls embeds in the joint `2j`-ball); the free classes drop the
//! constraint on the same lattice. All kinds share one integrand tensor, so
//! a path common to two kinds contributes the identical floating-point sum
//! to both optimizations.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::grid::{ball_lattice, TimeGrid};
use crate::model::interval::RationalInterval;
use crate::model::modulus::{Modulus, ModulusSet};
use crate::model::VectorField;
use crate::topologies::dp::{solve_dp, DpObjective, DpPosition, DpProblem, StepBound};
use crate::topologies::seminorm::SeminormResolution;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingInequality {
    pub lhs: String,
    pub rhs: String,
    pub lhs_value: f64,
    pub rhs_value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingReport {
    /// `(kind, value)` rows in chain order, strong then weak.
    pub values: Vec<(String, f64)>,
    pub inequalities: Vec<OrderingInequality>,
    pub all_hold: bool,
    /// The dense point after snapping to the shared lattice.
    pub snapped_point: Vec<f64>,
}

fn snap_to_lattice(point: &[f64], radius: f64, step: f64) -> Vec<f64> {
    let snapped: Vec<f64> = point.iter().map(|c| (c / step).round() * step).collect();
    let norm = snapped.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm <= radius + 1e-12 {
        snapped
    } else {
        vec![0.0; point.len()]
    }
}

fn lattice_index(lattice: &[Vec<f64>], point: &[f64]) -> usize {
    lattice
        .iter()
        .position(|p| {
            p.iter()
                .zip(point)
                .all(|(a, b)| (a - b).abs() <= 1e-9)
        })
        .expect("snapped point is a lattice point")
}

enum NodeSet {
    Single,
    XOnly,
    Product,
}

struct KindSpec {
    name: &'static str,
    nodes: NodeSet,
    x_theta: Option<&'static str>,
    u_theta: Option<&'static str>,
    joint_theta: Option<&'static str>,
}

const STRONG_CHAIN: &[KindSpec] = &[
    KindSpec { name: "TD", nodes: NodeSet::Single, x_theta: None, u_theta: None, joint_theta: None },
    KindSpec { name: "TThetaD", nodes: NodeSet::XOnly, x_theta: Some("theta_j"), u_theta: None, joint_theta: None },
    KindSpec { name: "TTheta", nodes: NodeSet::Product, x_theta: None, u_theta: None, joint_theta: Some("theta_2j") },
    KindSpec { name: "TThetaTheta", nodes: NodeSet::Product, x_theta: Some("theta_2j"), u_theta: Some("theta_2j"), joint_theta: None },
    KindSpec { name: "TThetaThetaHat", nodes: NodeSet::Product, x_theta: Some("theta_2j"), u_theta: Some("theta_hat_2j"), joint_theta: None },
    KindSpec { name: "TThetaB", nodes: NodeSet::Product, x_theta: Some("theta_2j"), u_theta: None, joint_theta: None },
    KindSpec { name: "TB", nodes: NodeSet::Product, x_theta: None, u_theta: None, joint_theta: None },
];

const WEAK_CHAIN: &[KindSpec] = &[
    KindSpec { name: "sigmaD", nodes: NodeSet::Single, x_theta: None, u_theta: None, joint_theta: None },
    KindSpec { name: "sigmaThetaD", nodes: NodeSet::XOnly, x_theta: Some("theta_j"), u_theta: None, joint_theta: None },
    KindSpec { name: "sigmaTheta", nodes: NodeSet::Product, x_theta: None, u_theta: None, joint_theta: Some("theta_2j") },
    KindSpec { name: "sigmaThetaTheta", nodes: NodeSet::Product, x_theta: Some("theta_2j"), u_theta: Some("theta_2j"), joint_theta: None },
    KindSpec { name: "sigmaThetaThetaHat", nodes: NodeSet::Product, x_theta: Some("theta_2j"), u_theta: Some("theta_hat_2j"), joint_theta: None },
];

/// Verifies the computed-value chain
/// `sigmaD <= TD <= TThetaD <= TTheta <= TThetaTheta <= TThetaThetaHat
///  <= TThetaB <= TB` (and the weak analogue ending in `TThetaThetaHat`)
/// at matched indices on one shared grid. Requires `theta <= theta_hat`
/// pointwise at the used entries.
#[allow(clippy::too_many_arguments)]
pub fn ordering_check(
    f: &VectorField,
    interval: &RationalInterval,
    j: u32,
    p: u32,
    theta: &ModulusSet,
    theta_hat: &ModulusSet,
    dense_point: &[f64],
    resolution: &SeminormResolution,
) -> Result<OrderingReport> {
    let n = f.dim();
    if dense_point.len() != 2 * n {
        return Err(CoreError::DimensionMismatch { expected: 2 * n, got: dense_point.len() });
    }
    let theta_j = theta.entry(interval, j)?.clone();
    let theta_2j = theta.entry(interval, 2 * j)?.clone();
    let theta_hat_2j = theta_hat.entry(interval, 2 * j)?.clone();
    validate_dominates(&theta_j, &theta_2j, interval.length(), "theta_j", "theta_2j")?;
    validate_dominates(&theta_2j, &theta_hat_2j, interval.length(), "theta_2j", "theta_hat_2j")?;

    let radius = j as f64;
    let step = resolution.lattice_step;
    let x_lattice = ball_lattice(n, radius, step);
    let u_lattice = x_lattice.clone();
    let (nx, nu) = (x_lattice.len(), u_lattice.len());

    let x0 = snap_to_lattice(&dense_point[..n], radius, step);
    let u0 = snap_to_lattice(&dense_point[n..], radius, step);
    let (ix0, iu0) = (lattice_index(&x_lattice, &x0), lattice_index(&u_lattice, &u0));

    let mut grid = TimeGrid::uniform(interval.start(), interval.end(), resolution.time_step)?;
    grid.insert_nodes(f.breakpoints());
    let mids = grid.midpoints();
    let gaps: Vec<f64> = mids.windows(2).map(|w| w[1].0 - w[0].0).collect();

    // raw field values once per (layer, x, u)
    let mut raw: Vec<Vec<Vec<f64>>> = Vec::with_capacity(mids.len());
    let mut buf = vec![0.0; n];
    for (t, _) in &mids {
        let mut layer = Vec::with_capacity(nx * nu);
        for x in &x_lattice {
            for u in &u_lattice {
                f.eval_into(*t, x, u, &mut buf)?;
                layer.push(buf.clone());
            }
        }
        raw.push(layer);
    }

    let strong_scores: Vec<Vec<f64>> = raw
        .iter()
        .zip(&mids)
        .map(|(layer, (_, w))| {
            layer
                .iter()
                .map(|v| {
                    let norm = if n == 1 {
                        v[0].abs()
                    } else {
                        v.iter().map(|c| c * c).sum::<f64>().sqrt()
                    };
                    w * if p == 1 { norm } else { norm.powi(p as i32) }
                })
                .collect()
        })
        .collect();

    let positions_product: Vec<DpPosition> = x_lattice
        .iter()
        .flat_map(|x| {
            u_lattice
                .iter()
                .map(move |u| DpPosition::pair(x.clone(), u.clone()))
        })
        .collect();

    let lookup = |name: &str| -> &Modulus {
        match name {
            "theta_j" => &theta_j,
            "theta_2j" => &theta_2j,
            "theta_hat_2j" => &theta_hat_2j,
            _ => unreachable!(),
        }
    };

    let build = |spec: &KindSpec, scores_full: &[Vec<f64>]| -> DpProblem {
        let bound_for = |gap: f64| StepBound {
            x_max: spec.x_theta.map_or(f64::INFINITY, |m| lookup(m).eval(gap)),
            u_max: spec.u_theta.map_or(f64::INFINITY, |m| lookup(m).eval(gap)),
            joint_max: spec.joint_theta.map_or(f64::INFINITY, |m| lookup(m).eval(gap)),
        };
        let steps: Vec<StepBound> = gaps.iter().map(|&g| bound_for(g)).collect();
        match spec.nodes {
            NodeSet::Single => DpProblem {
                positions: vec![DpPosition::pair(x0.clone(), u0.clone())],
                scores: scores_full
                    .iter()
                    .map(|layer| vec![layer[ix0 * nu + iu0]])
                    .collect(),
                steps,
                objective: DpObjective::MaximizeSum,
            },
            NodeSet::XOnly => DpProblem {
                positions: x_lattice
                    .iter()
                    .map(|x| DpPosition::pair(x.clone(), u0.clone()))
                    .collect(),
                scores: scores_full
                    .iter()
                    .map(|layer| (0..nx).map(|ix| layer[ix * nu + iu0]).collect())
                    .collect(),
                steps,
                objective: DpObjective::MaximizeSum,
            },
            NodeSet::Product => DpProblem {
                positions: positions_product.clone(),
                scores: scores_full.to_vec(),
                steps,
                objective: DpObjective::MaximizeSum,
            },
        }
    };

    // strong chain: compare the pre-root sums so the comparisons are exact
    // for every exponent
    let mut strong_sums = Vec::with_capacity(STRONG_CHAIN.len());
    for spec in STRONG_CHAIN {
        let problem = build(spec, &strong_scores);
        strong_sums.push((spec.name, solve_dp(&problem)?.value));
    }

    // weak chain only exists in the p = 1 setting
    let mut weak_values: Vec<(&str, f64)> = Vec::new();
    if p == 1 {
        let dirs: Vec<Vec<f64>> = match n {
            1 => vec![vec![1.0]],
            2 => (0..resolution.direction_count.max(2))
                .map(|m| {
                    let a = std::f64::consts::PI * m as f64
                        / resolution.direction_count.max(2) as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            d => {
                return Err(CoreError::Unsupported(format!(
                    "ordering_check weak chain needs N <= 2, got {d}"
                )))
            }
        };
        for spec in WEAK_CHAIN {
            let mut best = f64::NEG_INFINITY;
            for d in &dirs {
                let signed: Vec<Vec<f64>> = raw
                    .iter()
                    .zip(&mids)
                    .map(|(layer, (_, w))| {
                        layer
                            .iter()
                            .map(|v| w * v.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
                            .collect()
                    })
                    .collect();
                let problem = build(spec, &signed);
                let hi = solve_dp(&problem)?.value;
                let lo = solve_dp(&DpProblem {
                    objective: DpObjective::MinimizeSum,
                    ..problem
                })?
                .value;
                best = best.max(hi.max(-lo));
            }
            weak_values.push((spec.name, best.max(0.0)));
        }
    }

    // assemble report
    let root = |s: f64| if p == 1 { s } else { s.max(0.0).powf(1.0 / p as f64) };
    let mut values: Vec<(String, f64)> = strong_sums
        .iter()
        .map(|(k, s)| (k.to_string(), root(*s)))
        .collect();
    values.extend(weak_values.iter().map(|(k, v)| (k.to_string(), *v)));

    let mut inequalities = Vec::new();
    for w in strong_sums.windows(2) {
        inequalities.push(OrderingInequality {
            lhs: w[0].0.to_string(),
            rhs: w[1].0.to_string(),
            lhs_value: root(w[0].1),
            rhs_value: root(w[1].1),
            holds: w[0].1 <= w[1].1,
        });
    }
    if p == 1 {
        for w in weak_values.windows(2) {
            inequalities.push(OrderingInequality {
                lhs: w[0].0.to_string(),
                rhs: w[1].0.to_string(),
                lhs_value: w[0].1,
                rhs_value: w[1].1,
                holds: w[0].1 <= w[1].1,
            });
        }
        // cross links: sigmaD <= TD and sigmaThetaThetaHat <= TThetaThetaHat
        let sigma_d = weak_values[0].1;
        let t_d = strong_sums[0].1;
        inequalities.push(OrderingInequality {
            lhs: "sigmaD".into(),
            rhs: "TD".into(),
            lhs_value: sigma_d,
            rhs_value: t_d,
            holds: sigma_d <= t_d,
        });
        let sigma_tth = weak_values.last().unwrap().1;
        let t_tth = strong_sums[4].1;
        debug_assert_eq!(strong_sums[4].0, "TThetaThetaHat");
        inequalities.push(OrderingInequality {
            lhs: "sigmaThetaThetaHat".into(),
            rhs: "TThetaThetaHat".into(),
            lhs_value: sigma_tth,
            rhs_value: t_tth,
            holds: sigma_tth <= t_tth,
        });
    }
    let all_hold = inequalities.iter().all(|i| i.holds);
    let snapped_point: Vec<f64> = x0.iter().chain(u0.iter()).copied().collect();
    Ok(OrderingReport {
        values,
        inequalities,
        all_hold,
        snapped_point,
    })
}

fn validate_dominates(
    small: &Modulus,
    large: &Modulus,
    span: f64,
    small_name: &str,
    large_name: &str,
) -> Result<()> {
    for k in 0..=100 {
        let s = span * k as f64 / 100.0;
        if small.eval(s) > large.eval(s) + 1e-9 {
            return Err(CoreError::InvalidModulus(format!(
                "{small_name}({s}) = {} exceeds {large_name}({s}) = {}",
                small.eval(s),
                large.eval(s)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Expr;

    fn check(
        f: &VectorField,
        theta_c: f64,
        hat_c: f64,
        point: &[f64],
    ) -> OrderingReport {
        let theta = ModulusSet::uniform(Modulus::linear(theta_c).unwrap());
        let theta_hat = ModulusSet::uniform(Modulus::linear(hat_c).unwrap());
        let res = SeminormResolution {
            time_step: 1.0 / 16.0,
            lattice_step: 0.5,
            direction_count: 4,
        };
        ordering_check(
            f,
            &RationalInterval::integers(0, 1),
            1,
            1,
            &theta,
            &theta_hat,
            point,
            &res,
        )
        .unwrap()
    }

    #[test]
    fn chain_holds_for_coupled_linear_field() {
        let f = VectorField::scalar(Expr::add(Expr::state(0), Expr::delayed(0))).unwrap();
        let report = check(&f, 1.0, 2.0, &[0.0, 0.0]);
        assert!(report.all_hold, "{:#?}", report.inequalities);
    }

    #[test]
    fn chain_is_trivially_tight_for_zero_field() {
        let f = VectorField::scalar(Expr::constant(0.0)).unwrap();
        let report = check(&f, 1.0, 2.0, &[0.0, 0.0]);
        assert!(report.all_hold);
        for (_, v) in &report.values {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn delay_projection_makes_theta_b_equal_tb() {
        // f = u: the current-state constraint is irrelevant, so TThetaB and
        // TB coincide exactly on the shared lattice
        let f = VectorField::scalar(Expr::delayed(0)).unwrap();
        let report = check(&f, 1.0, 2.0, &[0.5, 0.5]);
        assert!(report.all_hold);
        let get = |name: &str| {
            report
                .values
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .unwrap()
        };
        assert_eq!(get("TThetaB"), get("TB"));
    }

    #[test]
    fn snapped_point_is_reported() {
        let f = VectorField::scalar(Expr::state(0)).unwrap();
        let report = check(&f, 1.0, 2.0, &[0.26, -0.9]);
        assert_eq!(report.snapped_point, vec![0.5, -1.0]);
    }
}
